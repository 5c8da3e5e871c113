#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barframe/framework.hpp"
#include "barframe/linalg.hpp"

namespace barframe {

enum class Classification { UnderConstrained, Isostatic, OverConstrained };
enum class PrestressKind { FirstOrderRigid, PrestressStable, NotCertified, Inconclusive };

const char* to_string(Classification c);
const char* to_string(PrestressKind k);

struct PrestressVerdict {
  PrestressKind kind = PrestressKind::NotCertified;
  Vec stress;             // certifying stress (unit norm) when PrestressStable
  double min_eig = 0.0;   // smallest eigenvalue of the certified form
  double pd_tol = 0.0;
};

struct PrestressOptions {
  double pd_rel = 1e-8;
  int random_trials = 32;
  std::uint64_t seed = 12345;
};

struct AnalyzeOptions {
  double rank_tol = linalg::default_rank_tol;
  std::vector<Constraint> linear;   // extra non-pin rows (e.g. midpoints), part of R
  std::vector<Constraint> pins;     // when non-empty, flexes are null of the stacked K
  PrestressOptions prestress;
};

struct RigidityReport {
  int num_vertices = 0;
  int dim = 0;
  int num_edges = 0;
  int num_rows = 0;        // edges + linear rows
  int rank_R = 0;
  int trivial_dim = 0;
  bool degenerate_span = false;
  bool pinned = false;
  Mat nontrivial_flexes;   // columns; pinned: null K(p), else null R cap T-perp
  Mat tperp_flexes;        // null R cap T-perp (always)
  Mat self_stresses;       // columns, left null space of R (edges + linear rows)
  Classification classification = Classification::Isostatic;
  bool first_order_rigid = false;
  PrestressVerdict prestress;
  Vec singular_values;

  int num_flexes() const { return static_cast<int>(nontrivial_flexes.cols()); }
  int num_stresses() const { return static_cast<int>(self_stresses.cols()); }
  // stresses - flexes - (rows - nd + trivial_dim); zero when the ledger holds
  int ledger_defect() const;
  std::string summary() const;
};

Mat rigidity_matrix(const Framework& fw);
// rigidity matrix with extra linear rows appended
Mat rigidity_matrix(const Framework& fw, const std::vector<Constraint>& linear);

// raw generators: d translations then rotations in axis pairs (i<j), as columns
Mat trivial_flex_generators(const Framework& fw);
// orthonormal columns; fewer than d(d+1)/2 signals a degenerate span
Mat trivial_flex_basis(const Framework& fw, double rank_tol = linalg::default_rank_tol);

RigidityReport analyze(const Framework& fw, const AnalyzeOptions& opts = {});

PrestressVerdict prestress_test(const Framework& fw, const Mat& flexes, const Mat& stresses,
                                const PrestressOptions& opts = {});

// sum_edges w_k |v_a - v_b|^2 with w and v normalized to unit length
double second_order_stress_test(const Framework& fw, const Vec& w, const Vec& v);

}  // namespace barframe
