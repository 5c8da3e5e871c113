#pragma once

#include <optional>
#include <string>
#include <vector>

#include "barframe/framework.hpp"
#include "barframe/linalg.hpp"

namespace barframe {

enum class Direction { Minimize, Maximize };
const char* to_string(Direction d);

struct Tolerances {
  double feas = 1e-10;
  double kkt = 1e-7;
  double step = 1e-10;
  double pd = 1e-8;  // relative to the spectral norm of the Lagrangian Hessian
  double rank = linalg::default_rank_tol;
};

struct ProjectOptions {
  double feas_tol = 1e-10;
  int max_newton = 50;
  bool refresh_jacobian = false;  // reference variant keeps J frozen at the base point
};

// Newton projection p + J(base)^T alpha onto the fixed constraints
Vec project_from(const ConstraintSystem& cs, const Vec& trial, const Vec& base, const ProjectOptions& opts = {});
Vec project(const ConstraintSystem& cs, const Vec& p, const ProjectOptions& opts = {});

enum class SecondOrderKind { Certified, NotCertified };

struct SecondOrderVerdict {
  SecondOrderKind kind = SecondOrderKind::NotCertified;
  Direction direction = Direction::Minimize;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double pd_tol = 0.0;
  int cone_dim = 0;
  bool empty_cone = false;  // first-order rigid: certified trivially

  bool certified() const { return kind == SecondOrderKind::Certified; }
  // eigenvalue deciding the verdict (min for Minimize, max for Maximize)
  double extreme_eig() const { return direction == Direction::Minimize ? min_eig : max_eig; }
};

enum class Status { Converged, ConvergedDegenerate, MaxIters, ProjectionFailed };
const char* to_string(Status s);

struct OptimizationProblem {
  ConstraintSystem cs;         // free() = objective constraints
  Vec p0;
  Direction direction = Direction::Minimize;
  std::vector<double> weights; // one per free constraint; empty means all 1
  Tolerances tol;
  double eta = 1e-2;
  long max_iters = 200000;
  int max_newton_iters = 50;
  bool kkt_polish = true;      // Newton on the KKT system after convergence
};

struct OptimizationResult {
  ConstraintSystem cs;
  Direction direction = Direction::Minimize;
  std::vector<double> weights;
  Tolerances tol;
  Vec p_star;
  double objective = 0.0;      // sum_k w_k f_k(p*)
  Vec lambda;                  // one entry per constraint, lambda_k = w_k on free rows
  double kkt_residual = 0.0;
  bool licq_ok = false;
  SecondOrderVerdict second_order;
  double pin_multiplier = 0.0;  // |lambda on pin rows| / |lambda|; nonzero means the pinning is broken
  long iters = 0;
  Status status = Status::MaxIters;

  bool converged() const { return status == Status::Converged || status == Status::ConvergedDegenerate; }
  bool certified() const { return converged() && second_order.certified() && pin_multiplier <= 1e-6; }
  // zero-extended stress that certifies: lambda for Minimize, -lambda for Maximize
  Vec certifying_stress() const { return direction == Direction::Minimize ? lambda : Vec(-lambda); }
};

OptimizationResult solve(const OptimizationProblem& prob);

struct Multiplier {
  Vec lambda;
  double kkt_residual = 0.0;
};

// least squares for the fixed rows with lambda = weights on the free rows
Multiplier lagrange_multiplier(const ConstraintSystem& cs, const Vec& p, const std::vector<double>& weights = {});

bool licq_check(const ConstraintSystem& cs, const Vec& p, double rank_tol = linalg::default_rank_tol);

// basis of the pinned critical cone: null space of the fixed rows
Mat critical_cone(const ConstraintSystem& cs, const Vec& p, double rank_tol = linalg::default_rank_tol);

SecondOrderVerdict second_order_check(const ConstraintSystem& cs, const Vec& p, const Vec& lambda, Direction dir,
                                      double pd_rel = 1e-8, double rank_tol = linalg::default_rank_tol);

struct CrossEdgeVerdict {
  int edge = -1;
  Direction direction = Direction::Minimize;  // Minimize: the edge length is a local minimum
  double stress_component = 0.0;              // certifying stress on the edge
  Vec lambda;                                 // multiplier of the edge problem (entry 1 on the edge)
  double kkt_residual = 0.0;
  SecondOrderVerdict second_order;
  bool certified = false;
};

CrossEdgeVerdict cross_edge_optimality(const OptimizationResult& result, int edge);

}  // namespace barframe
