#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace barframe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Edge {
  int a = 0;
  int b = 0;
  bool operator==(const Edge&) const = default;
};

// Coordinates are flattened vertex-major: vertex v occupies [v*d, v*d + d).
class Framework {
 public:
  Framework() = default;
  Framework(int dim, Vec coords, std::vector<Edge> edges);

  static Framework from_points(int dim, const std::vector<std::vector<double>>& points,
                               const std::vector<std::pair<int, int>>& edges);

  int dim() const { return dim_; }
  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Vec& coords() const { return coords_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Vec point(int v) const { return coords_.segment(v * dim_, dim_); }

  Framework with_coords(const Vec& coords) const;

 private:
  int dim_ = 2;
  int n_ = 0;
  Vec coords_;
  std::vector<Edge> edges_;
};

struct EdgeLength {
  int edge = 0;
};
struct PinCoordinate {
  int vertex = 0;
  int axis = 0;
};
struct Linear {
  Vec coeffs;
};

struct Constraint {
  std::variant<EdgeLength, PinCoordinate, Linear> kind;
  double target = 0.0;

  bool is_edge() const { return std::holds_alternative<EdgeLength>(kind); }
  bool is_pin() const { return std::holds_alternative<PinCoordinate>(kind); }
  bool is_linear() const { return std::holds_alternative<Linear>(kind); }
};

Constraint edge_length_constraint(int edge, double target_sq);
Constraint pin_constraint(int vertex, int axis);
Constraint linear_constraint(Vec coeffs, double offset);
// p_mid - p_a/2 - p_b/2 = 0, one row per axis
std::vector<Constraint> midpoint_constraints(int n, int d, int mid, int a, int b);

class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  ConstraintSystem(int n, int d, std::vector<Edge> edges, std::vector<Constraint> constraints,
                   std::vector<int> free = {});

  int num_vertices() const { return n_; }
  int dim() const { return d_; }
  int dof() const { return n_ * d_; }
  int size() const { return static_cast<int>(constraints_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Constraint& constraint(int i) const;

  // constraints excluded from the feasible set (objective edges)
  const std::vector<int>& free() const { return free_; }
  std::optional<int> free_index() const;
  bool is_free(int i) const;
  std::vector<int> fixed_indices() const;

  ConstraintSystem with_free(std::vector<int> free) const;
  ConstraintSystem with_target(int i, double target) const;

  // constraint index of the EdgeLength row for edge k, -1 if none
  int edge_constraint(int edge) const;

  double value(int i, const Vec& p) const;
  Vec residual(const Vec& p) const;
  Vec fixed_residual(const Vec& p) const;
  double violation(const Vec& p) const;

  Vec gradient(int i, const Vec& p) const;
  Mat jacobian(const Vec& p) const;
  Mat fixed_jacobian(const Vec& p) const;
  Mat rows_jacobian(const std::vector<int>& rows, const Vec& p) const;

  // Hessians are constant (zero for pins and linear rows)
  Mat hessian(int i) const;
  double hessian_form(int i, const Vec& u, const Vec& v) const;

 private:
  void check_index(int i) const;

  int n_ = 0;
  int d_ = 2;
  std::vector<Edge> edges_;
  std::vector<Constraint> constraints_;
  std::vector<int> free_;
};

// Edge rows first (index = edge index, targets = squared lengths at fw or
// the supplied squared targets), then pins, then linear rows.
ConstraintSystem build_system(const Framework& fw, const std::vector<Constraint>& extra = {},
                              const std::optional<std::vector<double>>& targets_sq = std::nullopt,
                              std::vector<int> free = {});

double edge_length_sq(const Framework& fw, int k);
Vec constraint_gradient(const ConstraintSystem& cs, const Vec& p, int i);

// sum_i w_i v^T Hess(f_i) v.  With Hess(f_edge) = 2 * block pattern this is
// 2 * sum_edges w_i |v_a - v_b|^2; half of it is the Lagrangian form
// sum_i w_i |v_a - v_b|^2.
double stress_quadratic(const ConstraintSystem& cs, const Vec& w, const Vec& v);

// Omega = 1/2 sum_i w_i Hess(f_i), so v^T Omega v = sum_edges w_i |v_a - v_b|^2
Mat stress_matrix(const ConstraintSystem& cs, const Vec& w);
Mat stress_matrix(const Framework& fw, const Vec& w);

Framework perturb(const Framework& fw, double magnitude, std::uint64_t seed);

struct Alignment {
  double rmsd = 0.0;
  Framework aligned;
};

// best isometry (reflections allowed) applied to b to match a
Alignment align(const Framework& a, const Framework& b);

}  // namespace barframe
