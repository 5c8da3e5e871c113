#pragma once

#include <Eigen/Dense>

namespace barframe::linalg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// relative singular value cutoff used for every numerical rank decision
inline constexpr double default_rank_tol = 1e-9;

struct Decomposition {
  Mat U;
  Vec s;
  Mat V;
  int rank = 0;
  double cutoff = 0.0;
};

// full SVD; cutoff = max(rel_tol, max(rows, cols) * eps) * sigma_max
Decomposition svd(const Mat& a, double rel_tol = default_rank_tol);

int rank(const Mat& a, double rel_tol = default_rank_tol);

// orthonormal columns
Mat null_space(const Mat& a, double rel_tol = default_rank_tol);
Mat left_null_space(const Mat& a, double rel_tol = default_rank_tol);
Mat range_basis(const Mat& a, double rel_tol = default_rank_tol);

// unit norm, first entry of largest magnitude made positive
Vec normalize_sign(const Vec& v);

// largest principal angle between two column spaces (radians)
double max_principal_angle(const Mat& a, const Mat& b);

}  // namespace barframe::linalg
