#include "barframe/framework.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "barframe/error.hpp"

namespace barframe {

namespace {

std::string edge_name(int k, const Edge& e) {
  return "edge " + std::to_string(k) + " (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
}

Vec diff(const Vec& p, int a, int b, int d) { return p.segment(a * d, d) - p.segment(b * d, d); }

}  // namespace

Framework::Framework(int dim, Vec coords, std::vector<Edge> edges)
    : dim_(dim), coords_(std::move(coords)), edges_(std::move(edges)) {
  if (dim_ != 2 && dim_ != 3)
    throw Error(ErrorCode::DimensionMismatch, "dimension must be 2 or 3, got " + std::to_string(dim_));
  if (coords_.size() % dim_ != 0)
    throw Error(ErrorCode::DimensionMismatch, "coordinate vector length is not a multiple of d");
  n_ = static_cast<int>(coords_.size() / dim_);
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    auto& e = edges_[k];
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.a < 0 || e.b >= n_)
      throw Error(ErrorCode::IndexOutOfRange, edge_name(int(k), e) + ": vertex index out of range");
    if (e.a == e.b) throw Error(ErrorCode::InvalidFramework, edge_name(int(k), e) + ": loop");
    if (!seen.insert({e.a, e.b}).second)
      throw Error(ErrorCode::InvalidFramework, edge_name(int(k), e) + ": duplicate");
    if (!(diff(coords_, e.a, e.b, dim_).squaredNorm() > 0.0))
      throw Error(ErrorCode::InvalidFramework, edge_name(int(k), e) + ": zero length");
  }
}

Framework Framework::from_points(int dim, const std::vector<std::vector<double>>& points,
                                 const std::vector<std::pair<int, int>>& edges) {
  Vec c(static_cast<Eigen::Index>(points.size()) * dim);
  for (std::size_t v = 0; v < points.size(); ++v) {
    if (static_cast<int>(points[v].size()) != dim)
      throw Error(ErrorCode::DimensionMismatch, "vertex " + std::to_string(v) + " has wrong dimension");
    for (int j = 0; j < dim; ++j) c(v * dim + j) = points[v][j];
  }
  std::vector<Edge> es;
  for (auto [a, b] : edges) es.push_back({a, b});
  return Framework(dim, c, es);
}

Framework Framework::with_coords(const Vec& coords) const {
  if (coords.size() != coords_.size())
    throw Error(ErrorCode::DimensionMismatch, "coordinate vector has wrong length");
  return Framework(dim_, coords, edges_);
}

Constraint edge_length_constraint(int edge, double target_sq) {
  return Constraint{EdgeLength{edge}, target_sq};
}

Constraint pin_constraint(int vertex, int axis) { return Constraint{PinCoordinate{vertex, axis}, 0.0}; }

Constraint linear_constraint(Vec coeffs, double offset) {
  return Constraint{Linear{std::move(coeffs)}, offset};
}

std::vector<Constraint> midpoint_constraints(int n, int d, int mid, int a, int b) {
  std::vector<Constraint> out;
  for (int ax = 0; ax < d; ++ax) {
    Vec c = Vec::Zero(n * d);
    c(mid * d + ax) += 1.0;
    c(a * d + ax) -= 0.5;
    c(b * d + ax) -= 0.5;
    out.push_back(linear_constraint(c, 0.0));
  }
  return out;
}

ConstraintSystem::ConstraintSystem(int n, int d, std::vector<Edge> edges,
                                   std::vector<Constraint> constraints, std::vector<int> free)
    : n_(n), d_(d), edges_(std::move(edges)), constraints_(std::move(constraints)), free_(std::move(free)) {
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const auto& c = constraints_[i];
    const std::string where = "constraint " + std::to_string(i);
    if (auto e = std::get_if<EdgeLength>(&c.kind)) {
      if (e->edge < 0 || e->edge >= static_cast<int>(edges_.size()))
        throw Error(ErrorCode::IndexOutOfRange, where + ": edge index out of range");
      if (!(c.target > 0.0)) throw Error(ErrorCode::InvalidConstraint, where + ": target must be positive");
    } else if (auto pc = std::get_if<PinCoordinate>(&c.kind)) {
      if (pc->vertex < 0 || pc->vertex >= n_)
        throw Error(ErrorCode::IndexOutOfRange, where + ": vertex index out of range");
      if (pc->axis < 0 || pc->axis >= d_)
        throw Error(ErrorCode::IndexOutOfRange, where + ": axis out of range");
    } else {
      const auto& l = std::get<Linear>(c.kind);
      if (l.coeffs.size() != n_ * d_)
        throw Error(ErrorCode::DimensionMismatch, where + ": coefficient vector has wrong length");
      if (l.coeffs.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::InvalidConstraint, where + ": all coefficients zero");
    }
  }
  std::sort(free_.begin(), free_.end());
  free_.erase(std::unique(free_.begin(), free_.end()), free_.end());
  for (int f : free_) check_index(f);
}

void ConstraintSystem::check_index(int i) const {
  if (i < 0 || i >= size())
    throw Error(ErrorCode::IndexOutOfRange, "constraint index " + std::to_string(i) + " out of range");
}

const Constraint& ConstraintSystem::constraint(int i) const {
  check_index(i);
  return constraints_[i];
}

std::optional<int> ConstraintSystem::free_index() const {
  if (free_.size() == 1) return free_[0];
  return std::nullopt;
}

bool ConstraintSystem::is_free(int i) const { return std::binary_search(free_.begin(), free_.end(), i); }

std::vector<int> ConstraintSystem::fixed_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!is_free(i)) out.push_back(i);
  return out;
}

ConstraintSystem ConstraintSystem::with_free(std::vector<int> free) const {
  return ConstraintSystem(n_, d_, edges_, constraints_, std::move(free));
}

ConstraintSystem ConstraintSystem::with_target(int i, double target) const {
  check_index(i);
  auto cs = constraints_;
  cs[i].target = target;
  return ConstraintSystem(n_, d_, edges_, cs, free_);
}

int ConstraintSystem::edge_constraint(int edge) const {
  for (int i = 0; i < size(); ++i)
    if (auto e = std::get_if<EdgeLength>(&constraints_[i].kind); e && e->edge == edge) return i;
  return -1;
}

double ConstraintSystem::value(int i, const Vec& p) const {
  check_index(i);
  const auto& c = constraints_[i];
  if (auto e = std::get_if<EdgeLength>(&c.kind)) {
    const auto& ed = edges_[e->edge];
    return diff(p, ed.a, ed.b, d_).squaredNorm();
  }
  if (auto pc = std::get_if<PinCoordinate>(&c.kind)) return p(pc->vertex * d_ + pc->axis);
  return std::get<Linear>(c.kind).coeffs.dot(p);
}

Vec ConstraintSystem::residual(const Vec& p) const {
  if (p.size() != dof()) throw Error(ErrorCode::DimensionMismatch, "configuration has wrong length");
  Vec r(size());
  for (int i = 0; i < size(); ++i) r(i) = value(i, p) - constraints_[i].target;
  return r;
}

Vec ConstraintSystem::fixed_residual(const Vec& p) const {
  if (p.size() != dof()) throw Error(ErrorCode::DimensionMismatch, "configuration has wrong length");
  auto idx = fixed_indices();
  Vec r(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r(k) = value(idx[k], p) - constraints_[idx[k]].target;
  return r;
}

double ConstraintSystem::violation(const Vec& p) const {
  Vec r = fixed_residual(p);
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

Vec ConstraintSystem::gradient(int i, const Vec& p) const {
  check_index(i);
  if (p.size() != dof()) throw Error(ErrorCode::DimensionMismatch, "configuration has wrong length");
  Vec g = Vec::Zero(dof());
  const auto& c = constraints_[i];
  if (auto e = std::get_if<EdgeLength>(&c.kind)) {
    const auto& ed = edges_[e->edge];
    Vec dv = diff(p, ed.a, ed.b, d_);
    g.segment(ed.a * d_, d_) = 2.0 * dv;
    g.segment(ed.b * d_, d_) = -2.0 * dv;
  } else if (auto pc = std::get_if<PinCoordinate>(&c.kind)) {
    g(pc->vertex * d_ + pc->axis) = 1.0;
  } else {
    g = std::get<Linear>(c.kind).coeffs;
  }
  return g;
}

Mat ConstraintSystem::rows_jacobian(const std::vector<int>& rows, const Vec& p) const {
  Mat J(rows.size(), dof());
  for (std::size_t k = 0; k < rows.size(); ++k) J.row(k) = gradient(rows[k], p).transpose();
  return J;
}

Mat ConstraintSystem::jacobian(const Vec& p) const {
  std::vector<int> all(size());
  for (int i = 0; i < size(); ++i) all[i] = i;
  return rows_jacobian(all, p);
}

Mat ConstraintSystem::fixed_jacobian(const Vec& p) const { return rows_jacobian(fixed_indices(), p); }

Mat ConstraintSystem::hessian(int i) const {
  check_index(i);
  Mat H = Mat::Zero(dof(), dof());
  if (auto e = std::get_if<EdgeLength>(&constraints_[i].kind)) {
    const auto& ed = edges_[e->edge];
    for (int j = 0; j < d_; ++j) {
      H(ed.a * d_ + j, ed.a * d_ + j) = 2.0;
      H(ed.b * d_ + j, ed.b * d_ + j) = 2.0;
      H(ed.a * d_ + j, ed.b * d_ + j) = -2.0;
      H(ed.b * d_ + j, ed.a * d_ + j) = -2.0;
    }
  }
  return H;
}

double ConstraintSystem::hessian_form(int i, const Vec& u, const Vec& v) const {
  check_index(i);
  if (auto e = std::get_if<EdgeLength>(&constraints_[i].kind)) {
    const auto& ed = edges_[e->edge];
    return 2.0 * diff(u, ed.a, ed.b, d_).dot(diff(v, ed.a, ed.b, d_));
  }
  return 0.0;
}

ConstraintSystem build_system(const Framework& fw, const std::vector<Constraint>& extra,
                              const std::optional<std::vector<double>>& targets_sq, std::vector<int> free) {
  std::vector<Constraint> cs;
  const int m = fw.num_edges();
  if (targets_sq && static_cast<int>(targets_sq->size()) != m)
    throw Error(ErrorCode::DimensionMismatch, "need one length target per edge");
  for (int k = 0; k < m; ++k)
    cs.push_back(edge_length_constraint(k, targets_sq ? (*targets_sq)[k] : edge_length_sq(fw, k)));
  // pins before general linear rows
  for (const auto& c : extra)
    if (c.is_pin()) cs.push_back(c);
  for (const auto& c : extra)
    if (!c.is_pin()) cs.push_back(c);
  return ConstraintSystem(fw.num_vertices(), fw.dim(), fw.edges(), cs, std::move(free));
}

double edge_length_sq(const Framework& fw, int k) {
  if (k < 0 || k >= fw.num_edges())
    throw Error(ErrorCode::IndexOutOfRange, "edge index " + std::to_string(k) + " out of range");
  const auto& e = fw.edges()[k];
  return diff(fw.coords(), e.a, e.b, fw.dim()).squaredNorm();
}

Vec constraint_gradient(const ConstraintSystem& cs, const Vec& p, int i) { return cs.gradient(i, p); }

double stress_quadratic(const ConstraintSystem& cs, const Vec& w, const Vec& v) {
  if (w.size() != cs.size()) throw Error(ErrorCode::DimensionMismatch, "stress length must equal constraint count");
  if (v.size() != cs.dof()) throw Error(ErrorCode::DimensionMismatch, "vector has wrong length");
  double s = 0.0;
  for (int i = 0; i < cs.size(); ++i)
    if (w(i) != 0.0) s += w(i) * cs.hessian_form(i, v, v);
  return s;
}

namespace {
void add_edge_block(Mat& O, const Edge& e, int d, double w) {
  for (int j = 0; j < d; ++j) {
    O(e.a * d + j, e.a * d + j) += w;
    O(e.b * d + j, e.b * d + j) += w;
    O(e.a * d + j, e.b * d + j) -= w;
    O(e.b * d + j, e.a * d + j) -= w;
  }
}
}  // namespace

Mat stress_matrix(const ConstraintSystem& cs, const Vec& w) {
  if (w.size() != cs.size()) throw Error(ErrorCode::DimensionMismatch, "stress length must equal constraint count");
  Mat O = Mat::Zero(cs.dof(), cs.dof());
  for (int i = 0; i < cs.size(); ++i)
    if (auto e = std::get_if<EdgeLength>(&cs.constraints()[i].kind))
      add_edge_block(O, cs.edges()[e->edge], cs.dim(), w(i));
  return O;
}

Mat stress_matrix(const Framework& fw, const Vec& w) {
  // entries beyond the edge count belong to linear rows, which have no curvature
  if (w.size() < fw.num_edges()) throw Error(ErrorCode::DimensionMismatch, "stress shorter than edge list");
  const int nd = fw.num_vertices() * fw.dim();
  Mat O = Mat::Zero(nd, nd);
  for (int k = 0; k < fw.num_edges(); ++k) add_edge_block(O, fw.edges()[k], fw.dim(), w(k));
  return O;
}

Framework perturb(const Framework& fw, double magnitude, std::uint64_t seed) {
  if (magnitude < 0) throw Error(ErrorCode::InvalidFramework, "perturbation magnitude must be >= 0");
  if (magnitude == 0.0) return fw;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec c = fw.coords();
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) += magnitude * u(rng);
  return fw.with_coords(c);
}

Alignment align(const Framework& a, const Framework& b) {
  if (a.dim() != b.dim() || a.num_vertices() != b.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "frameworks differ in dimension or vertex count");
  if (a.edges() != b.edges()) throw Error(ErrorCode::DimensionMismatch, "frameworks have different edge lists");
  const int n = a.num_vertices(), d = a.dim();
  Mat X = Eigen::Map<const Mat>(a.coords().data(), d, n).transpose();
  Mat Y = Eigen::Map<const Mat>(b.coords().data(), d, n).transpose();
  Eigen::RowVectorXd ca = X.colwise().mean(), cb = Y.colwise().mean();
  X.rowwise() -= ca;
  Y.rowwise() -= cb;
  Eigen::JacobiSVD<Mat> s(Y.transpose() * X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat U = s.matrixU(), V = s.matrixV();
  Alignment best;
  best.rmsd = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    // orthogonal factor with determinant `sign`
    Mat D = Mat::Identity(d, d);
    if ((U * V.transpose()).determinant() * sign < 0) D(d - 1, d - 1) = -1.0;
    Mat Q = U * D * V.transpose();
    Mat Z = Y * Q;
    double rmsd = std::sqrt((Z - X).squaredNorm() / n);
    if (rmsd < best.rmsd) {
      Z.rowwise() += ca;
      Mat Zt = Z.transpose();
      best.rmsd = rmsd;
      best.aligned = b.with_coords(Eigen::Map<Vec>(Zt.data(), n * d));
    }
  }
  return best;
}

}  // namespace barframe
