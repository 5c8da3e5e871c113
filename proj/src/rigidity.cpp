#include "barframe/rigidity.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "barframe/error.hpp"

namespace barframe {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::UnderConstrained: return "under-constrained";
    case Classification::Isostatic: return "isostatic";
    case Classification::OverConstrained: return "over-constrained";
  }
  return "?";
}

const char* to_string(PrestressKind k) {
  switch (k) {
    case PrestressKind::FirstOrderRigid: return "first-order-rigid";
    case PrestressKind::PrestressStable: return "prestress-stable";
    case PrestressKind::NotCertified: return "not-certified";
    case PrestressKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

int RigidityReport::ledger_defect() const {
  return (num_stresses() - static_cast<int>(tperp_flexes.cols())) -
         (num_rows - num_vertices * dim + trivial_dim);
}

std::string RigidityReport::summary() const {
  std::ostringstream os;
  os << to_string(classification) << ", flexes=" << num_flexes() << ", stresses=" << num_stresses()
     << ", " << to_string(prestress.kind);
  return os.str();
}

Mat rigidity_matrix(const Framework& fw) {
  const int d = fw.dim();
  Mat R = Mat::Zero(fw.num_edges(), fw.num_vertices() * d);
  for (int k = 0; k < fw.num_edges(); ++k) {
    const auto& e = fw.edges()[k];
    Vec dv = fw.point(e.a) - fw.point(e.b);
    R.block(k, e.a * d, 1, d) = 2.0 * dv.transpose();
    R.block(k, e.b * d, 1, d) = -2.0 * dv.transpose();
  }
  return R;
}

Mat rigidity_matrix(const Framework& fw, const std::vector<Constraint>& linear) {
  Mat R0 = rigidity_matrix(fw);
  Mat R(R0.rows() + static_cast<Eigen::Index>(linear.size()), R0.cols());
  R.topRows(R0.rows()) = R0;
  for (std::size_t i = 0; i < linear.size(); ++i) {
    const auto* l = std::get_if<Linear>(&linear[i].kind);
    if (!l) throw Error(ErrorCode::InvalidConstraint, "only linear rows may be appended to R");
    if (l->coeffs.size() != R.cols()) throw Error(ErrorCode::DimensionMismatch, "linear row has wrong length");
    R.row(R0.rows() + i) = l->coeffs.transpose();
  }
  return R;
}

Mat trivial_flex_generators(const Framework& fw) {
  const int n = fw.num_vertices(), d = fw.dim();
  const int D = d * (d + 1) / 2;
  Mat T = Mat::Zero(n * d, D);
  for (int ax = 0; ax < d; ++ax)
    for (int v = 0; v < n; ++v) T(v * d + ax, ax) = 1.0;
  int col = d;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++col)
      for (int v = 0; v < n; ++v) {
        Vec x = fw.point(v);
        T(v * d + i, col) = -x(j);
        T(v * d + j, col) = x(i);
      }
  return T;
}

Mat trivial_flex_basis(const Framework& fw, double rank_tol) {
  return linalg::range_basis(trivial_flex_generators(fw), rank_tol);
}

namespace {

Mat tperp_flex_basis(const Mat& R, const linalg::Decomposition& dec, const Mat& T) {
  const int nd = static_cast<int>(R.cols());
  const int k = std::max(0, nd - dec.rank - static_cast<int>(T.cols()));
  if (k == 0) return Mat(nd, 0);
  Mat N = dec.V.rightCols(nd - dec.rank);
  Mat P = N - T * (T.transpose() * N);
  Eigen::JacobiSVD<Mat> s(P, Eigen::ComputeThinU);
  Mat F = s.matrixU().leftCols(k);
  // remove residual trivial components and re-orthonormalize
  F -= T * (T.transpose() * F);
  Eigen::HouseholderQR<Mat> qr(F);
  return qr.householderQ() * Mat::Identity(nd, k);
}

struct FormEig {
  double min_eig, max_eig, scale;
};

FormEig form_eigs(const Framework& fw, const Mat& V, const Vec& w) {
  Mat O = stress_matrix(fw, w);
  Mat M = V.transpose() * O * V;
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> eo(O, Eigen::EigenvaluesOnly);
  double scale = eo.eigenvalues().cwiseAbs().maxCoeff();
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), scale};
}

}  // namespace

PrestressVerdict prestress_test(const Framework& fw, const Mat& flexes, const Mat& stresses,
                                const PrestressOptions& opts) {
  const int nd = fw.num_vertices() * fw.dim();
  if (flexes.cols() > 0 && flexes.rows() != nd)
    throw Error(ErrorCode::DimensionMismatch, "flex vectors have wrong length");
  if (stresses.cols() > 0 && stresses.rows() < fw.num_edges())
    throw Error(ErrorCode::DimensionMismatch, "stress vectors shorter than edge list");
  PrestressVerdict out;
  if (flexes.cols() == 0) {
    out.kind = PrestressKind::FirstOrderRigid;
    return out;
  }
  if (stresses.cols() == 0) {
    out.kind = PrestressKind::NotCertified;
    return out;
  }
  // orthonormalize the flex basis so eigenvalues are comparable
  Mat V = linalg::range_basis(flexes, 1e-12);

  auto attempt = [&](const Vec& w) -> bool {
    Vec u = w / w.norm();
    auto e = form_eigs(fw, V, u);
    double tol = opts.pd_rel * e.scale;
    if (e.scale > 0 && e.min_eig > tol) {
      out = {PrestressKind::PrestressStable, u, e.min_eig, tol};
      return true;
    }
    if (e.scale > 0 && e.max_eig < -tol) {
      out = {PrestressKind::PrestressStable, Vec(-u), -e.max_eig, tol};
      return true;
    }
    out.min_eig = e.min_eig;
    out.pd_tol = tol;
    return false;
  };

  if (stresses.cols() == 1) {
    if (attempt(stresses.col(0))) return out;
    out.kind = PrestressKind::NotCertified;
    out.stress = Vec();
    return out;
  }
  for (Eigen::Index j = 0; j < stresses.cols(); ++j)
    if (attempt(stresses.col(j))) return out;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> g;
  for (int t = 0; t < opts.random_trials; ++t) {
    Vec c(stresses.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = g(rng);
    if (attempt(stresses * c.normalized())) return out;
  }
  out.kind = PrestressKind::Inconclusive;
  out.stress = Vec();
  return out;
}

RigidityReport analyze(const Framework& fw, const AnalyzeOptions& opts) {
  RigidityReport rep;
  const int n = fw.num_vertices(), d = fw.dim(), nd = n * d;
  const int D = d * (d + 1) / 2;
  rep.num_vertices = n;
  rep.dim = d;
  rep.num_edges = fw.num_edges();

  Mat R = rigidity_matrix(fw, opts.linear);
  rep.num_rows = static_cast<int>(R.rows());
  auto dec = linalg::svd(R, opts.rank_tol);
  rep.rank_R = dec.rank;
  rep.singular_values = dec.s;

  Mat T = trivial_flex_basis(fw, opts.rank_tol);
  rep.trivial_dim = static_cast<int>(T.cols());
  rep.degenerate_span = rep.trivial_dim < D;

  Mat W = dec.U.rightCols(R.rows() - dec.rank);
  if (W.cols() == 1) W.col(0) = linalg::normalize_sign(W.col(0));
  rep.self_stresses = W;

  rep.tperp_flexes = tperp_flex_basis(R, dec, T);
  if (!opts.pins.empty()) {
    if (rep.degenerate_span)
      throw Error(ErrorCode::DegenerateSpan, "affine span is degenerate; pinning not supported");
    Mat K(R.rows() + static_cast<Eigen::Index>(opts.pins.size()), nd);
    K.topRows(R.rows()) = R;
    for (std::size_t i = 0; i < opts.pins.size(); ++i) {
      const auto* pc = std::get_if<PinCoordinate>(&opts.pins[i].kind);
      if (!pc) throw Error(ErrorCode::InvalidPinSpec, "pins must be PinCoordinate constraints");
      Vec g = Vec::Zero(nd);
      g(pc->vertex * d + pc->axis) = 1.0;
      K.row(R.rows() + i) = g.transpose();
    }
    rep.pinned = true;
    rep.nontrivial_flexes = linalg::null_space(K, opts.rank_tol);
  } else {
    rep.nontrivial_flexes = rep.tperp_flexes;
  }

  const int count = rep.num_rows + D;
  rep.classification = count == nd   ? Classification::Isostatic
                       : count < nd ? Classification::UnderConstrained
                                    : Classification::OverConstrained;
  rep.first_order_rigid = rep.nontrivial_flexes.cols() == 0;
  rep.prestress = prestress_test(fw, rep.tperp_flexes, rep.self_stresses, opts.prestress);
  return rep;
}

double second_order_stress_test(const Framework& fw, const Vec& w, const Vec& v) {
  const int d = fw.dim();
  if (v.size() != fw.num_vertices() * d) throw Error(ErrorCode::DimensionMismatch, "flex has wrong length");
  if (w.size() < fw.num_edges()) throw Error(ErrorCode::DimensionMismatch, "stress shorter than edge list");
  const double wn = w.norm(), vn = v.norm();
  if (wn == 0.0 || vn == 0.0) return 0.0;
  double s = 0.0;
  for (int k = 0; k < fw.num_edges(); ++k) {
    const auto& e = fw.edges()[k];
    s += w(k) * (v.segment(e.a * d, d) - v.segment(e.b * d, d)).squaredNorm();
  }
  return s / (wn * vn * vn);
}

}  // namespace barframe
