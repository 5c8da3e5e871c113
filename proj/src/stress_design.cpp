#include "barframe/stress_design.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "barframe/error.hpp"
#include "barframe/linalg.hpp"
#include "barframe/rigidity.hpp"

namespace barframe {

OptimizationProblem stress_design_problem(const StressDesignProblem& prob) {
  const auto& fw = prob.framework;
  if (prob.targets.empty()) throw Error(ErrorCode::InvalidConstraint, "designed edge set is empty");
  std::set<int> seen;
  bool any = false;
  for (const auto& t : prob.targets) {
    if (t.edge < 0 || t.edge >= fw.num_edges())
      throw Error(ErrorCode::IndexOutOfRange, "designed edge " + std::to_string(t.edge) + " out of range");
    if (!seen.insert(t.edge).second) throw Error(ErrorCode::InvalidConstraint, "designed edge listed twice");
    any = any || t.sigma != 0.0;
  }
  if (!any) throw Error(ErrorCode::InvalidConstraint, "all stress targets are zero");

  auto extra = prob.pinning.constraints();
  extra.insert(extra.end(), prob.linear.begin(), prob.linear.end());
  auto cs = build_system(fw, extra, prob.lengths_sq);
  // free() is kept sorted, so order the weights the same way
  auto sorted = prob.targets;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.edge < b.edge; });
  std::vector<int> free;
  std::vector<double> w;
  for (const auto& t : sorted) {
    free.push_back(t.edge);
    w.push_back(t.sigma);
  }
  OptimizationProblem op;
  op.cs = cs.with_free(free);
  op.p0 = fw.coords();
  op.direction = Direction::Minimize;
  op.weights = w;
  op.tol = prob.tol;
  op.eta = prob.eta;
  op.max_iters = prob.max_iters;
  op.max_newton_iters = prob.max_newton_iters;
  return op;
}

OptimizationResult solve_stress_design(const StressDesignProblem& prob) { return solve(stress_design_problem(prob)); }

DesignedStressCheck designed_stress_check(const OptimizationResult& res, const std::vector<StressTarget>& targets,
                                          const std::vector<Constraint>& linear) {
  const auto& cs = res.cs;
  Framework fw(cs.dim(), res.p_star, cs.edges());
  Mat R = rigidity_matrix(fw, linear);
  Mat W = linalg::left_null_space(R, res.tol.rank);
  DesignedStressCheck out;
  out.num_stresses = static_cast<int>(W.cols());
  // multiplier restricted to the rows of R (edges, then linear rows)
  Vec lam = Vec::Zero(R.rows());
  for (int k = 0; k < fw.num_edges(); ++k) lam(k) = res.lambda(cs.edge_constraint(k));
  int row = fw.num_edges();
  for (int i = 0; i < cs.size(); ++i)
    if (cs.constraint(i).is_linear()) lam(row++) = res.lambda(i);
  Vec s = W * (W.transpose() * lam);
  out.stress = s;
  double worst = 0.0;
  // least-squares scale so that s_S ~ c * sigma
  double num = 0, den = 0;
  for (const auto& t : targets) {
    num += s(t.edge) * t.sigma;
    den += t.sigma * t.sigma;
  }
  const double c = den > 0 ? num / den : 0.0;
  for (const auto& t : targets) {
    if (t.sigma == 0.0) {
      worst = std::max(worst, std::abs(s(t.edge)) / std::max(std::abs(c), 1e-300));
      continue;
    }
    worst = std::max(worst, std::abs(s(t.edge) - c * t.sigma) / std::abs(c * t.sigma));
  }
  out.max_rel_deviation = c == 0.0 ? INFINITY : worst;
  return out;
}

ForceDensityResult force_density_solve(const Framework& fw, const Vec& w, const std::vector<PinnedCoordinate>& fixed) {
  const int n = fw.num_vertices(), d = fw.dim(), m = fw.num_edges();
  if (w.size() != m) throw Error(ErrorCode::DimensionMismatch, "need one force density per edge");
  if (fixed.empty()) throw Error(ErrorCode::InvalidConstraint, "force density needs fixed coordinates");
  for (const auto& f : fixed)
    if (f.vertex < 0 || f.vertex >= n || f.axis < 0 || f.axis >= d)
      throw Error(ErrorCode::IndexOutOfRange, "fixed coordinate out of range");

  Mat L = Mat::Zero(n, n);
  for (int k = 0; k < m; ++k) {
    const auto& e = fw.edges()[k];
    L(e.a, e.a) += w(k);
    L(e.b, e.b) += w(k);
    L(e.a, e.b) -= w(k);
    L(e.b, e.a) -= w(k);
  }
  ForceDensityResult out;
  out.p = fw.coords();
  out.minimizer = true;
  for (int ax = 0; ax < d; ++ax) {
    std::vector<int> freev, fixv;
    for (int v = 0; v < n; ++v) {
      bool isfixed = std::any_of(fixed.begin(), fixed.end(),
                                 [&](const PinnedCoordinate& f) { return f.vertex == v && f.axis == ax; });
      (isfixed ? fixv : freev).push_back(v);
    }
    if (freev.empty()) continue;
    Mat A(freev.size(), freev.size());
    Vec b = Vec::Zero(freev.size());
    for (std::size_t i = 0; i < freev.size(); ++i) {
      for (std::size_t j = 0; j < freev.size(); ++j) A(i, j) = L(freev[i], freev[j]);
      for (int v : fixv) b(i) -= L(freev[i], v) * fw.coords()(v * d + ax);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    const Vec& ev = es.eigenvalues();
    const double emax = ev.cwiseAbs().maxCoeff();
    const double emin = ev.cwiseAbs().minCoeff();
    if (emax == 0.0 || emin <= 1e-12 * emax)
      throw Error(ErrorCode::SingularSystem, "reduced weighted Laplacian is singular on axis " + std::to_string(ax));
    if (ev.minCoeff() <= 0) out.minimizer = false;
    Vec x = es.eigenvectors() * (ev.cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * b));
    for (std::size_t i = 0; i < freev.size(); ++i) out.p(freev[i] * d + ax) = x(i);
  }
  // equilibrium residual on the free coordinates
  Vec force = Vec::Zero(n * d);
  for (int k = 0; k < m; ++k) {
    const auto& e = fw.edges()[k];
    Vec dv = out.p.segment(e.a * d, d) - out.p.segment(e.b * d, d);
    force.segment(e.a * d, d) += w(k) * dv;
    force.segment(e.b * d, d) -= w(k) * dv;
  }
  for (const auto& f : fixed) force(f.vertex * d + f.axis) = 0.0;
  out.residual = force.lpNorm<Eigen::Infinity>();
  return out;
}

ForceDensityResult force_density_solve(const Framework& fw, const Vec& w, const std::vector<int>& fixed_vertices) {
  std::vector<PinnedCoordinate> fixed;
  for (int v : fixed_vertices)
    for (int ax = 0; ax < fw.dim(); ++ax) fixed.push_back({v, ax});
  return force_density_solve(fw, w, fixed);
}

}  // namespace barframe
