#include "barframe/manifold_opt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "barframe/error.hpp"

namespace barframe {

const char* to_string(Direction d) { return d == Direction::Minimize ? "min" : "max"; }

const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::ConvergedDegenerate: return "converged-degenerate";
    case Status::MaxIters: return "max-iters";
    case Status::ProjectionFailed: return "projection-failed";
  }
  return "?";
}

Vec project_from(const ConstraintSystem& cs, const Vec& trial, const Vec& base, const ProjectOptions& opts) {
  if (trial.size() != cs.dof() || base.size() != cs.dof())
    throw Error(ErrorCode::DimensionMismatch, "configuration has wrong length");
  const auto fixed = cs.fixed_indices();
  if (fixed.empty()) return trial;
  Mat J0t = cs.rows_jacobian(fixed, base).transpose();
  Vec y = trial;
  Vec c = cs.fixed_residual(y);
  double r = c.lpNorm<Eigen::Infinity>();
  const double r0 = r;
  for (int it = 0; it < opts.max_newton; ++it) {
    if (r <= 1e-2 * opts.feas_tol) return y;
    if (opts.refresh_jacobian && it > 0) J0t = cs.rows_jacobian(fixed, y).transpose();
    Mat A = cs.rows_jacobian(fixed, y) * J0t;
    Eigen::FullPivLU<Mat> lu(A);
    if (lu.rank() < A.rows()) throw Error(ErrorCode::ProjectionFailed, "singular Newton system in projection");
    Vec da = lu.solve(-c);
    y += J0t * da;
    c = cs.fixed_residual(y);
    double rn = c.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(rn) || rn > 1e6 * std::max(1.0, r0))
      throw Error(ErrorCode::ProjectionFailed, "projection diverged");
    // stagnation at roundoff level
    if (rn <= opts.feas_tol && rn >= 0.5 * r) return y;
    r = rn;
  }
  if (r <= opts.feas_tol) return y;
  throw Error(ErrorCode::ProjectionFailed, "projection did not converge (residual " + std::to_string(r) + ")");
}

Vec project(const ConstraintSystem& cs, const Vec& p, const ProjectOptions& opts) {
  return project_from(cs, p, p, opts);
}

namespace {

std::vector<double> resolved_weights(const ConstraintSystem& cs, const std::vector<double>& w) {
  if (w.empty()) return std::vector<double>(cs.free().size(), 1.0);
  if (w.size() != cs.free().size()) throw Error(ErrorCode::DimensionMismatch, "one weight per free constraint");
  return w;
}

double objective(const ConstraintSystem& cs, const std::vector<double>& w, const Vec& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * cs.value(cs.free()[k], p);
  return s;
}

Vec objective_gradient(const ConstraintSystem& cs, const std::vector<double>& w, const Vec& p) {
  Vec g = Vec::Zero(cs.dof());
  for (std::size_t k = 0; k < w.size(); ++k) g += w[k] * cs.gradient(cs.free()[k], p);
  return g;
}

}  // namespace

Multiplier lagrange_multiplier(const ConstraintSystem& cs, const Vec& p, const std::vector<double>& weights) {
  if (cs.free().empty()) throw Error(ErrorCode::InvalidConstraint, "no free constraint to normalize against");
  auto w = resolved_weights(cs, weights);
  Vec g = objective_gradient(cs, w, p);
  const auto fixed = cs.fixed_indices();
  Multiplier out;
  out.lambda = Vec::Zero(cs.size());
  for (std::size_t k = 0; k < w.size(); ++k) out.lambda(cs.free()[k]) = w[k];
  Vec r = g;
  if (!fixed.empty()) {
    Mat At = cs.rows_jacobian(fixed, p).transpose();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(At);
    Vec l = cod.solve(-g);
    for (std::size_t k = 0; k < fixed.size(); ++k) out.lambda(fixed[k]) = l(k);
    r = g + At * l;
  }
  const double gn = g.norm();
  out.kkt_residual = gn > 0 ? r.norm() / gn : 0.0;
  return out;
}

bool licq_check(const ConstraintSystem& cs, const Vec& p, double rank_tol) {
  Mat J = cs.fixed_jacobian(p);
  return linalg::rank(J, rank_tol) == J.rows();
}

Mat critical_cone(const ConstraintSystem& cs, const Vec& p, double rank_tol) {
  return linalg::null_space(cs.fixed_jacobian(p), rank_tol);
}

SecondOrderVerdict second_order_check(const ConstraintSystem& cs, const Vec& p, const Vec& lambda, Direction dir,
                                      double pd_rel, double rank_tol) {
  if (lambda.size() != cs.size()) throw Error(ErrorCode::DimensionMismatch, "multiplier length mismatch");
  SecondOrderVerdict v;
  v.direction = dir;
  Mat V = critical_cone(cs, p, rank_tol);
  v.cone_dim = static_cast<int>(V.cols());
  if (V.cols() == 0) {
    v.kind = SecondOrderKind::Certified;
    v.empty_cone = true;
    return v;
  }
  // Hessian of the Lagrangian sum_i lambda_i Hess(f_i)
  Mat H = 2.0 * stress_matrix(cs, lambda);
  Mat M = V.transpose() * H * V;
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> eh(H, Eigen::EigenvaluesOnly);
  v.min_eig = es.eigenvalues().minCoeff();
  v.max_eig = es.eigenvalues().maxCoeff();
  v.pd_tol = pd_rel * eh.eigenvalues().cwiseAbs().maxCoeff();
  bool ok = dir == Direction::Minimize ? v.min_eig > v.pd_tol : v.max_eig < -v.pd_tol;
  v.kind = ok ? SecondOrderKind::Certified : SecondOrderKind::NotCertified;
  return v;
}

namespace {

// Newton on g(p) + J(p)^T l = 0, c(p) = 0 from a converged gradient iterate.
// Rejected when it does not reduce the residual or moves far.
Vec kkt_polish(const ConstraintSystem& cs, const std::vector<double>& w, const Vec& x0, double feas_tol) {
  const auto fixed = cs.fixed_indices();
  const int nd = cs.dof(), r = static_cast<int>(fixed.size());
  auto residual = [&](const Vec& p, const Vec& l) {
    Vec F(nd + r);
    F.head(nd) = objective_gradient(cs, w, p) + cs.rows_jacobian(fixed, p).transpose() * l;
    F.tail(r) = cs.fixed_residual(p);
    return F;
  };
  auto mult = lagrange_multiplier(cs, x0, w);
  Vec l(r);
  for (int k = 0; k < r; ++k) l(k) = mult.lambda(fixed[k]);
  Vec p = x0;
  Vec F = residual(p, l);
  const double f0 = F.norm();
  const double scale = 1.0 + x0.norm();
  for (int it = 0; it < 8; ++it) {
    Vec lam = mult.lambda;
    for (int k = 0; k < r; ++k) lam(fixed[k]) = l(k);
    Mat K = Mat::Zero(nd + r, nd + r);
    K.topLeftCorner(nd, nd) = 2.0 * stress_matrix(cs, lam);
    Mat J = cs.rows_jacobian(fixed, p);
    K.topRightCorner(nd, r) = J.transpose();
    K.bottomLeftCorner(r, nd) = J;
    Eigen::FullPivLU<Mat> lu(K);
    if (lu.rank() < nd + r) break;
    Vec dz = lu.solve(-F);
    Vec pn = p + dz.head(nd), ln = l + dz.tail(r);
    Vec Fn = residual(pn, ln);
    if (!(Fn.norm() < F.norm())) break;
    p = pn;
    l = ln;
    F = Fn;
    if (F.norm() <= 1e-15 * scale * (1.0 + l.norm())) break;
  }
  if ((p - x0).norm() > 1e-4 * scale || !(F.norm() < f0) || cs.violation(p) > feas_tol) return x0;
  return p;
}

}  // namespace

OptimizationResult solve(const OptimizationProblem& prob) {
  const auto& cs = prob.cs;
  if (cs.free().empty()) throw Error(ErrorCode::InvalidConstraint, "optimization needs a free constraint");
  for (int f : cs.free())
    if (!cs.constraint(f).is_edge()) throw Error(ErrorCode::InvalidConstraint, "objective must be an edge length");
  auto w = resolved_weights(cs, prob.weights);
  const double sign = prob.direction == Direction::Minimize ? 1.0 : -1.0;
  auto phi = [&](const Vec& p) { return sign * objective(cs, w, p); };

  OptimizationResult res;
  res.cs = cs;
  res.direction = prob.direction;
  res.weights = w;
  res.tol = prob.tol;

  ProjectOptions popt{prob.tol.feas, prob.max_newton_iters, false};
  Vec x;
  try {
    x = project(cs, prob.p0, popt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProjectionFailed) throw;
    res.p_star = prob.p0;
    res.status = Status::ProjectionFailed;
    res.objective = objective(cs, w, prob.p0);
    return res;
  }

  double eta = prob.eta;
  const double eta_min = prob.eta * std::ldexp(1.0, -50);
  int streak = 0;
  double fx = phi(x);
  const bool single_min = w.size() == 1 && prob.direction == Direction::Minimize && w[0] > 0;
  res.status = Status::MaxIters;
  long it = 0;
  for (; it < prob.max_iters; ++it) {
    if (single_min && cs.value(cs.free()[0], x) < 1e-12) {
      res.status = Status::ConvergedDegenerate;
      break;
    }
    Vec trial = x - eta * (sign * objective_gradient(cs, w, x));
    Vec xn;
    bool ok = true;
    try {
      xn = project_from(cs, trial, x, popt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProjectionFailed) throw;
      ok = false;
    }
    double fn = 0;
    if (ok) {
      fn = phi(xn);
      // allow roundoff-level increases only
      if (fn > fx + 1e-14 * (1.0 + std::abs(fx))) ok = false;
    }
    if (!ok) {
      eta *= 0.5;
      streak = 0;
      if (eta < eta_min) {
        res.status = Status::ProjectionFailed;
        break;
      }
      continue;
    }
    const double step = (xn - x).norm();
    x = xn;
    fx = fn;
    if (eta < prob.eta && ++streak >= 5) {
      eta = prob.eta;
      streak = 0;
    }
    if (step < prob.tol.step) {
      res.status = Status::Converged;
      ++it;
      break;
    }
  }
  res.iters = it;
  if (res.status == Status::Converged && prob.kkt_polish && !cs.fixed_indices().empty())
    x = kkt_polish(cs, w, x, prob.tol.feas);
  res.p_star = x;
  res.objective = objective(cs, w, x);
  auto mult = lagrange_multiplier(cs, x, w);
  res.lambda = mult.lambda;
  res.kkt_residual = mult.kkt_residual;
  double pin_sq = 0;
  for (int i = 0; i < cs.size(); ++i)
    if (cs.constraint(i).is_pin()) pin_sq += res.lambda(i) * res.lambda(i);
  res.pin_multiplier = std::sqrt(pin_sq) / std::max(res.lambda.norm(), 1e-300);
  res.licq_ok = licq_check(cs, x, prob.tol.rank);
  res.second_order = second_order_check(cs, x, res.lambda, prob.direction, prob.tol.pd, prob.tol.rank);
  return res;
}

CrossEdgeVerdict cross_edge_optimality(const OptimizationResult& result, int edge) {
  const auto& cs0 = result.cs;
  const int j = cs0.edge_constraint(edge);
  if (j < 0) throw Error(ErrorCode::IndexOutOfRange, "edge " + std::to_string(edge) + " has no length constraint");
  CrossEdgeVerdict out;
  out.edge = edge;
  Vec omega = result.certifying_stress();
  out.stress_component = omega(j);
  if (std::abs(result.lambda(j)) <= result.tol.kkt)
    throw Error(ErrorCode::StressVanishes, "stress vanishes on edge " + std::to_string(edge));

  // freeze the previous objective edges at their optimal values, free edge j
  ConstraintSystem cs = cs0;
  for (int f : cs0.free()) cs = cs.with_target(f, cs0.value(f, result.p_star));
  cs = cs.with_free({j});

  out.direction = omega(j) > 0 ? Direction::Minimize : Direction::Maximize;
  auto mult = lagrange_multiplier(cs, result.p_star);
  out.lambda = mult.lambda;
  out.kkt_residual = mult.kkt_residual;
  out.second_order =
      second_order_check(cs, result.p_star, mult.lambda, out.direction, result.tol.pd, result.tol.rank);
  out.certified = out.second_order.certified() && out.kkt_residual <= result.tol.kkt;
  return out;
}

}  // namespace barframe
