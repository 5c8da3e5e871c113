#pragma once

#include <utility>
#include <vector>

#include "barframe/framework.hpp"
#include "barframe/manifold_opt.hpp"
#include "barframe/pinning.hpp"

namespace barframe {

struct StressTarget {
  int edge = 0;
  double sigma = 0.0;
};

struct StressDesignProblem {
  Framework framework;
  std::vector<StressTarget> targets;        // designed edges S with prescribed stress
  PinningSpec pinning;
  std::vector<Constraint> linear;           // optional extra linear rows
  std::optional<std::vector<double>> lengths_sq;  // complement targets; default measured
  Tolerances tol;
  double eta = 1e-2;
  long max_iters = 200000;
  int max_newton_iters = 50;
};

OptimizationProblem stress_design_problem(const StressDesignProblem& prob);
OptimizationResult solve_stress_design(const StressDesignProblem& prob);

// projection of the designed multiplier onto the self-stress space of the
// result; returns the deviation of its S-restriction from the targets
struct DesignedStressCheck {
  Vec stress;                 // over edges + linear rows, scaled so stress_S ~ sigma
  double max_rel_deviation = 0.0;
  int num_stresses = 0;
};
DesignedStressCheck designed_stress_check(const OptimizationResult& res, const std::vector<StressTarget>& targets,
                                          const std::vector<Constraint>& linear = {});

struct ForceDensityResult {
  Vec p;
  bool minimizer = false;  // reduced Laplacian positive definite on every axis
  double residual = 0.0;   // max over free coordinates of |(w^T R(p))_c|
};

// Fixed coordinates keep their values from fw.
ForceDensityResult force_density_solve(const Framework& fw, const Vec& w,
                                       const std::vector<PinnedCoordinate>& fixed);
ForceDensityResult force_density_solve(const Framework& fw, const Vec& w, const std::vector<int>& fixed_vertices);

}  // namespace barframe
