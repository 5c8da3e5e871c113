#include "barframe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace barframe::linalg {

Decomposition svd(const Mat& a, double rel_tol) {
  Decomposition d;
  const auto r = a.rows(), c = a.cols();
  if (r == 0 || c == 0) {
    d.U = Mat::Identity(r, r);
    d.V = Mat::Identity(c, c);
    d.s = Vec::Zero(0);
    return d;
  }
  Eigen::JacobiSVD<Mat> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  d.U = s.matrixU();
  d.V = s.matrixV();
  d.s = s.singularValues();
  const double smax = d.s.size() ? d.s(0) : 0.0;
  const double floor_tol =
      static_cast<double>(std::max(r, c)) * std::numeric_limits<double>::epsilon();
  d.cutoff = std::max(rel_tol, floor_tol) * smax;
  d.rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < d.s.size(); ++i)
      if (d.s(i) > d.cutoff) ++d.rank;
  }
  return d;
}

int rank(const Mat& a, double rel_tol) { return svd(a, rel_tol).rank; }

Mat null_space(const Mat& a, double rel_tol) {
  auto d = svd(a, rel_tol);
  const auto c = a.cols();
  return d.V.rightCols(c - d.rank);
}

Mat left_null_space(const Mat& a, double rel_tol) {
  auto d = svd(a, rel_tol);
  const auto r = a.rows();
  return d.U.rightCols(r - d.rank);
}

Mat range_basis(const Mat& a, double rel_tol) {
  auto d = svd(a, rel_tol);
  return d.U.leftCols(d.rank);
}

Vec normalize_sign(const Vec& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) return v;
  Vec u = v / nrm;
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    // first entry wins ties up to roundoff
    if (std::abs(u(i)) > best + 1e-12) {
      best = std::abs(u(i));
      imax = i;
    }
  }
  if (u(imax) < 0) u = -u;
  return u;
}

double max_principal_angle(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return M_PI / 2;
  if (a.cols() == 0) return 0.0;
  Mat qa = range_basis(a), qb = range_basis(b);
  if (qa.cols() != qb.cols()) return M_PI / 2;
  // sine of the largest angle, accurate for small angles
  Mat resid = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Mat> s(resid);
  double smax = s.singularValues().size() ? s.singularValues()(0) : 0.0;
  return std::asin(std::clamp(smax, 0.0, 1.0));
}

}  // namespace barframe::linalg
