#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "barframe/framework.hpp"
#include "barframe/linalg.hpp"

namespace barframe {

struct TraceOptions {
  double h = 0.01;
  int max_steps = 20000;
  int alpha_origin = -1;  // default: the fully pinned vertex, else vertex 0
  int alpha_edge = -1;    // default: lowest-indexed edge at alpha_origin
  double feas_tol = 1e-10;
  int max_newton = 30;
  double rank_tol = linalg::default_rank_tol;
};

struct TraceSample {
  double t = 0.0;      // arclength from the start
  Vec p;
  double alpha = 0.0;  // angle of the alpha edge in [0, 2pi)
  double f1 = 0.0;     // squared free-edge length
  double df1 = 0.0;    // d f1 / dt
  Vec tangent;
};

enum class TraceEnd { Closed, MaxSteps, LicqFailure, ProjectionFailed };
const char* to_string(TraceEnd e);

struct ManifoldTrace {
  ConstraintSystem cs;
  double h = 0.0;
  std::vector<TraceSample> samples;
  bool closed = false;
  double loop_length = 0.0;  // arclength of the closed loop (last sample back to the first)
  TraceEnd end = TraceEnd::MaxSteps;
  int alpha_origin = 0;
  int alpha_target = 0;
};

// 1-D manifold cut out by the fixed rows of cs; cs.free() must hold exactly
// the free edge.
ManifoldTrace trace_manifold(const ConstraintSystem& cs, const Vec& p0, const TraceOptions& opts = {});

enum class ExtremumKind { Max, Min };
const char* to_string(ExtremumKind k);

struct Extremum {
  ExtremumKind kind = ExtremumKind::Min;
  double t = 0.0;
  double alpha = 0.0;
  double f1 = 0.0;
  Vec p;
  double kkt_residual = 0.0;
  bool kkt_ok = false;
  double length() const;
};

std::vector<Extremum> find_extrema(const ManifoldTrace& trace, double kkt_tol = 1e-7);

// unpolished sign changes of the sampled derivative
std::vector<Extremum> raw_extrema(const ManifoldTrace& trace);

// derivatives of f1 along the unit-speed path through p
struct PathDerivatives {
  double f1 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  Vec tangent;
  int null_dim = 0;
};
PathDerivatives path_derivatives(const ConstraintSystem& cs, const Vec& p, const Vec* tangent_ref = nullptr,
                                 double rank_tol = linalg::default_rank_tol);

double alpha_angle(const Vec& p, int dim, int origin, int target);

enum class CertificateKind { ThirdOrder, Inconclusive };

struct CertificateOptions {
  double window = 0.2;
  int samples_per_side = 20;
  double merge_tol = 1e-8;
  double a3_tol = 1e-6;
  double rank_tol = linalg::default_rank_tol;
  double feas_tol = 1e-10;
};

struct Certificate {
  CertificateKind kind = CertificateKind::Inconclusive;
  std::string reason;
  int dimK = 0;
  bool licq = false;
  double d1 = 0.0;
  double d2 = 0.0;
  double a1_fit = 0.0;
  double a2_fit = 0.0;
  double a3 = 0.0;
  double second_order_value = 0.0;  // NaN when stress or flex is not unique
  double free_stress_ratio = 0.0;   // |omega_free| / |omega|
};

Certificate third_order_certificate(const ConstraintSystem& cs, const Vec& p, const CertificateOptions& opts = {});

// cubic fit of f1(t) - f1(p) on [-w, w]; returns (a1, a2, a3)
std::vector<double> cubic_fit(const ConstraintSystem& cs, const Vec& p, double window, int samples_per_side,
                              double feas_tol = 1e-10);

struct MergeOptions {
  double h = 0.01;
  double bracket_tol = 1e-4;
  int max_bisect = 60;
  double ramp_step = 0.01;
  int max_newton = 40;
  TraceOptions trace;
  CertificateOptions cert;
};

struct MergeStep {
  double mu = 0.0;
  int extrema = 0;
  double gap = 0.0;  // arclength separation of the tracked pair, 0 when absent
};

struct BifurcationResult {
  ConstraintSystem cs;          // system at the tuned length
  int tuning_constraint = -1;
  double tuned_length = 0.0;
  Vec critical_config;
  double critical_free_length = 0.0;
  double critical_alpha = 0.0;
  double a3 = 0.0;
  int dimK = 0;
  double second_order_value = 0.0;
  Certificate certificate;
  std::vector<MergeStep> history;
  int newton_iters = 0;
};

// bracket holds tuning-edge lengths (not squared)
BifurcationResult merge_search(const ConstraintSystem& base, const Vec& p0, int tuning_constraint,
                               std::pair<double, double> bracket, const MergeOptions& opts = {});

}  // namespace barframe
