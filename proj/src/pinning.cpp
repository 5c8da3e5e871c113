#include "barframe/pinning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "barframe/error.hpp"
#include "barframe/linalg.hpp"
#include "barframe/rigidity.hpp"

namespace barframe {

PinningSpec PinningSpec::standard(int d, const std::vector<int>& anchors) {
  if (static_cast<int>(anchors.size()) != d)
    throw Error(ErrorCode::InvalidPinSpec, "need exactly d anchor vertices");
  if (std::set<int>(anchors.begin(), anchors.end()).size() != anchors.size())
    throw Error(ErrorCode::InvalidPinSpec, "anchor vertices must be distinct");
  PinningSpec s;
  s.anchors = anchors;
  for (int i = 0; i < d; ++i)
    for (int ax = i; ax < d; ++ax) s.pinned.push_back({anchors[i], ax});
  return s;
}

PinningSpec PinningSpec::from_pins(int d, const std::vector<PinnedCoordinate>& pins) {
  const std::size_t D = static_cast<std::size_t>(d * (d + 1) / 2);
  if (pins.size() != D)
    throw Error(ErrorCode::InvalidPinSpec,
                "expected " + std::to_string(D) + " pinned coordinates, got " + std::to_string(pins.size()));
  std::map<int, std::set<int>> by_vertex;
  for (const auto& p : pins) {
    if (p.axis < 0 || p.axis >= d) throw Error(ErrorCode::InvalidPinSpec, "pin axis out of range");
    if (!by_vertex[p.vertex].insert(p.axis).second)
      throw Error(ErrorCode::InvalidPinSpec, "coordinate pinned twice");
  }
  // anchor i must carry exactly axes i..d-1
  std::vector<int> anchors(d, -1);
  for (const auto& [v, axes] : by_vertex) {
    int first = *axes.begin();
    int k = static_cast<int>(axes.size());
    if (first != d - k || *axes.rbegin() != d - 1 || anchors[first] != -1)
      throw Error(ErrorCode::InvalidPinSpec, "pins do not follow the nested anchor pattern");
    anchors[first] = v;
  }
  for (int a : anchors)
    if (a < 0) throw Error(ErrorCode::InvalidPinSpec, "pins do not follow the nested anchor pattern");
  return standard(d, anchors);
}

std::vector<Constraint> PinningSpec::constraints() const {
  std::vector<Constraint> out;
  for (const auto& p : pinned) out.push_back(pin_constraint(p.vertex, p.axis));
  return out;
}

std::vector<int> default_anchors(const Framework& fw) {
  const int n = fw.num_vertices(), d = fw.dim();
  if (n < d) throw Error(ErrorCode::DegenerateAnchors, "fewer vertices than dimensions");
  std::vector<int> anchors{0};
  Vec p0 = fw.point(0);
  while (static_cast<int>(anchors.size()) < d) {
    // distance from the affine hull of the anchors chosen so far
    Mat A(d, anchors.size() - 1);
    for (std::size_t j = 1; j < anchors.size(); ++j) A.col(j - 1) = fw.point(anchors[j]) - p0;
    Mat Q = A.cols() ? linalg::range_basis(A, 1e-12) : Mat(d, 0);
    int best = -1;
    double bestd = -1;
    for (int v = 0; v < n; ++v) {
      if (std::find(anchors.begin(), anchors.end(), v) != anchors.end()) continue;
      Vec x = fw.point(v) - p0;
      double dist = (x - Q * (Q.transpose() * x)).norm();
      if (dist > bestd + 1e-12) {
        bestd = dist;
        best = v;
      }
    }
    anchors.push_back(best);
  }
  return anchors;
}

PinnedFramework make_pinning(const Framework& fw, const std::optional<std::vector<int>>& anchors_in) {
  const int d = fw.dim(), n = fw.num_vertices();
  std::vector<int> anchors = anchors_in ? *anchors_in : default_anchors(fw);
  if (static_cast<int>(anchors.size()) != d) throw Error(ErrorCode::InvalidPinSpec, "need exactly d anchors");
  for (int a : anchors)
    if (a < 0 || a >= n) throw Error(ErrorCode::IndexOutOfRange, "anchor vertex out of range");

  double scale = 0;
  for (int v = 0; v < n; ++v) scale = std::max(scale, (fw.point(v) - fw.point(anchors[0])).norm());
  if (scale == 0) scale = 1;

  // orthonormal frame: e_0 along anchor 1, e_1 toward anchor 2, ...
  Vec p0 = fw.point(anchors[0]);
  Mat Q = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) {
    Vec x = fw.point(anchors[i]) - p0;
    for (int j = 0; j < i - 1; ++j) x -= Q.col(j).dot(x) * Q.col(j);
    if (x.norm() <= 1e-10 * scale) throw Error(ErrorCode::DegenerateAnchors, "anchor vertices are affinely dependent");
    Q.col(i - 1) = x.normalized();
  }
  // complete to a proper rotation
  if (d == 2) {
    Q.col(1) = Eigen::Vector2d(-Q(1, 0), Q(0, 0));
  } else {
    Eigen::Vector3d a = Q.col(0), b = Q.col(1);
    Q.col(2) = a.cross(b);
  }

  Vec c(n * d);
  for (int v = 0; v < n; ++v) c.segment(v * d, d) = Q.transpose() * (fw.point(v) - p0);
  PinnedFramework out{PinningSpec::standard(d, anchors), fw};
  for (const auto& p : out.spec.pinned) c(p.vertex * d + p.axis) = 0.0;
  out.framework = fw.with_coords(c);
  return out;
}

Mat pin_matrix(const Framework& fw, const PinningSpec& spec) {
  const int d = fw.dim();
  Mat G = Mat::Zero(spec.pinned.size(), fw.num_vertices() * d);
  for (std::size_t i = 0; i < spec.pinned.size(); ++i) {
    const auto& p = spec.pinned[i];
    if (p.vertex < 0 || p.vertex >= fw.num_vertices() || p.axis < 0 || p.axis >= d)
      throw Error(ErrorCode::IndexOutOfRange, "pinned coordinate out of range");
    G(i, p.vertex * d + p.axis) = 1.0;
  }
  return G;
}

PinningCondition pinning_condition(const Framework& fw, const PinningSpec& spec) {
  const int d = fw.dim();
  const int D = d * (d + 1) / 2;
  if (static_cast<int>(spec.pinned.size()) != D)
    throw Error(ErrorCode::InvalidPinSpec, "wrong pin count");
  Mat G = pin_matrix(fw, spec);
  Mat T = trivial_flex_generators(fw);
  int r = linalg::rank(G * T);
  return {r == D, r};
}

}  // namespace barframe
