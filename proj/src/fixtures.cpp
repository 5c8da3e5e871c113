#include "barframe/fixtures.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "barframe/error.hpp"

namespace barframe {

namespace {

using Points = std::vector<std::vector<double>>;
using Edges = std::vector<std::pair<int, int>>;

FrameworkDocument doc2(const std::string& name, const std::string& provenance, Points pts, Edges edges,
                       std::vector<PinnedCoordinate> pins) {
  FrameworkDocument d;
  d.dim = static_cast<int>(pts.front().size());
  d.vertices = std::move(pts);
  for (auto& [a, b] : edges)
    if (a > b) std::swap(a, b);
  d.edges = std::move(edges);
  d.pins = std::move(pins);
  d.metadata["name"] = name;
  d.metadata["provenance"] = provenance;
  return d;
}

const char* kTabulated = "tabulated coordinates, 5 significant digits";

// hexagon A..F with the three long diagonals, AD last
const Edges kHexagon{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {1, 4}, {2, 5}, {0, 3}};
// triangles ABC, DEF joined by BE, AD, CF
const Edges kTwoTriangles{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {1, 4}, {0, 3}, {2, 5}};
// outer square P1..P4, edge midpoints P5..P8, inner quad P9..P12
const Edges kMidpointSquare{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {8, 9}, {9, 10},
                            {10, 11}, {11, 8}, {4, 8}, {5, 9}, {6, 10}, {7, 11}};
// triangles P1P2P3, P4P5P6; P2P5 free, P1P4 tuned
const Edges kThirdOrder{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {1, 4}, {0, 3}, {2, 5}};
const std::vector<PinnedCoordinate> kPinsAD{{0, 0}, {0, 1}, {3, 1}};

FrameworkDocument hexagon(const std::string& name, Points pts, bool optimized) {
  auto d = doc2(name, kTabulated, std::move(pts), kHexagon, {{0, 0}, {0, 1}, {5, 1}});
  d.metadata["free_edge"] = 8;
  d.metadata["direction"] = "max";
  if (optimized) d.metadata["rank_tolerance"] = 1e-4;
  return d;
}

FrameworkDocument two_triangles(const std::string& name, Points pts, bool optimized) {
  auto d = doc2(name, kTabulated, std::move(pts), kTwoTriangles, kPinsAD);
  d.metadata["free_edge"] = 8;
  d.metadata["direction"] = "min";
  if (optimized) d.metadata["rank_tolerance"] = 1e-4;
  return d;
}

FrameworkDocument midpoint_square(const std::string& name, Points pts, bool optimized) {
  auto d = doc2(name, kTabulated, std::move(pts), kMidpointSquare, {{0, 0}, {0, 1}, {1, 1}});
  d.midpoints = {{4, 0, 1}, {5, 1, 2}, {6, 2, 3}, {7, 3, 0}};
  d.metadata["free_edge"] = 8;
  d.metadata["direction"] = "min";
  if (optimized) d.metadata["rank_tolerance"] = 1e-4;
  return d;
}

FrameworkDocument third_order(const std::string& name, Points pts, bool low_precision) {
  auto d = doc2(name, kTabulated, std::move(pts), kThirdOrder, kPinsAD);
  d.metadata["free_edge"] = 6;
  d.metadata["tune_edge"] = 7;
  d.metadata["alpha_edge"] = 2;
  d.metadata["bracket"] = {0.3, 1.0};
  if (low_precision) d.metadata["rank_tolerance"] = 1e-4;
  return d;
}

FrameworkDocument stacked_squares() {
  Points pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {0, 4}, {1, 4}};
  // A..J; each square braced by both diagonals
  Edges e{{0, 1}, {0, 2}, {2, 3}, {3, 1}, {2, 1}, {0, 3}, {4, 2}, {4, 5}, {3, 5}, {2, 5}, {4, 3},
          {4, 6}, {6, 7}, {5, 7}, {4, 7}, {6, 5}, {8, 6}, {8, 7}, {9, 7}, {6, 9}, {9, 8}};
  auto d = doc2("stacked_squares", kTabulated, pts, e, {{0, 0}, {0, 1}, {1, 1}});
  // AC, BD, CE, DF, EG, FH, GI, HJ
  d.metadata["targets"] = {{1, 8.0}, {3, 4.0}, {6, 2.0}, {8, 1.0}, {11, 8.0}, {13, 4.0}, {16, 2.0}, {18, 1.0}};
  return d;
}

FrameworkDocument fourbar() {
  // crank AB, coupler BC, rocker CD, ground AD; BD is free
  const double crank = 0.5, coupler = 2.2, rocker = 1.5, ground = 2.0;
  const double bx = 0.0, by = crank;
  // C: circle(B, coupler) meets circle(D, rocker), upper branch
  const double dx = ground - bx, dy = -by, dist = std::hypot(dx, dy);
  const double a = (coupler * coupler - rocker * rocker + dist * dist) / (2 * dist);
  const double h = std::sqrt(coupler * coupler - a * a);
  const double cx = bx + a * dx / dist - h * dy / dist, cy = by + a * dy / dist + h * dx / dist;
  auto d = doc2("fourbar", "constructed", {{0, 0}, {bx, by}, {cx, cy}, {ground, 0}},
                {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {1, 3}}, {{0, 0}, {0, 1}, {3, 1}});
  d.metadata["free_edge"] = 4;
  return d;
}

FrameworkDocument prism3d() {
  // three stacked triangles, alternate layers rotated by 60 degrees; each
  // vertex braced to the two nearest vertices of the next layer
  Points pts;
  for (int layer = 0; layer < 3; ++layer)
    for (int k = 0; k < 3; ++k) {
      const double th = 2 * M_PI * k / 3 + (layer % 2) * M_PI / 3;
      pts.push_back({std::cos(th), std::sin(th), 0.9 * layer});
    }
  Edges e;
  for (int layer = 0; layer < 3; ++layer)
    for (int k = 0; k < 3; ++k) e.push_back({3 * layer + k, 3 * layer + (k + 1) % 3});
  for (int layer = 0; layer < 2; ++layer)
    for (int k = 0; k < 3; ++k) {
      const int up = 3 * (layer + 1);
      if (layer % 2 == 0) {
        e.push_back({3 * layer + k, up + k});
        e.push_back({3 * layer + k, up + (k + 2) % 3});
      } else {
        e.push_back({3 * layer + k, up + k});
        e.push_back({3 * layer + k, up + (k + 1) % 3});
      }
    }
  auto d = doc2("prism3d", "constructed", pts, e, {});
  d.metadata["free_edge"] = 9;
  d.metadata["direction"] = "max";
  return d;
}

const std::map<std::string, std::function<FrameworkDocument()>>& builders() {
  static const std::map<std::string, std::function<FrameworkDocument()>> m{
      {"hexagon_diagonals_initial",
       [] {
         return hexagon("hexagon_diagonals_initial",
                        {{0, 0}, {-5.0000e-01, 8.6603e-01}, {6.2583e-01, 1.5160e+00}, {2.6258e+00, 1.5160e+00},
                         {3.4744e+00, 6.6750e-01}, {1, 0}},
                        false);
       }},
      {"hexagon_diagonals_optimized",
       [] {
         return hexagon("hexagon_diagonals_optimized",
                        {{0, 0}, {-6.1425e-01, 7.8911e-01}, {4.8962e-01, 1.4758e+00}, {2.4634e+00, 1.7987e+00},
                         {3.3594e+00, 1.0005e+00}, {1, 0}},
                        true);
       }},
      {"two_triangles_initial",
       [] {
         return two_triangles("two_triangles_initial",
                              {{0, 0}, {6.5000e-01, 1.1258e+00}, {1.6500e+00, 1.1303e+00}, {3.2000e+00, 0},
                               {3.4568e+00, 2.1850e+00}, {2.3762e+00, 8.7259e-01}},
                              false);
       }},
      {"two_triangles_optimized",
       [] {
         return two_triangles("two_triangles_optimized",
                              {{0, 0}, {8.5812e-01, 9.7654e-01}, {1.8396e+00, 7.8484e-01}, {3.2000e+00, 0},
                               {3.6146e+00, 2.1606e+00}, {2.4417e+00, 9.3002e-01}},
                              true);
       }},
      {"midpoint_square_initial",
       [] {
         return midpoint_square("midpoint_square_initial",
                                {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 0}, {4, 2}, {2, 4}, {0, 2},
                                 {2.3088e+00, 1.0172e+00}, {2.7017e+00, 1.8515e+00}, {1.7877e+00, 3.4701e+00},
                                 {8.7688e-01, 2.1496e+00}},
                                false);
       }},
      {"midpoint_square_optimized",
       [] {
         return midpoint_square("midpoint_square_optimized",
                                {{0, 0}, {4, 0}, {2.6004e+00, 3.7471e+00}, {-1.3996e+00, 3.7471e+00}, {2, 0},
                                 {3.3002e+00, 1.8736e+00}, {6.0036e-01, 3.7471e+00}, {-6.9982e-01, 1.8736e+00},
                                 {1.7710e+00, 8.7585e-01}, {1.9975e+00, 1.7698e+00}, {8.5574e-01, 3.2366e+00},
                                 {1.8475e-01, 1.7795e+00}},
                                true);
       }},
      {"third_order_family_unit",
       [] {
         return third_order("third_order_family_unit",
                            {{0, 0}, {9.9555e-01, 1.3780e+00}, {0, 2.5000e+00}, {1, 0}, {5.4036e-01, 1.7403e+00},
                             {2.2906e+00, 2.7082e+00}},
                            false);
       }},
      {"third_order_family_tuned",
       [] {
         return third_order("third_order_family_tuned",
                            {{0, 0}, {9.9555e-01, 1.3780e+00}, {0, 2.5000e+00}, {4.9815e-01, 0},
                             {3.9104e-01, 1.7968e+00}, {2.2978e+00, 2.4002e+00}},
                            false);
       }},
      {"third_order_family_minimum",
       [] {
         auto d = third_order("third_order_family_minimum",
                              {{0, 0}, {2.2087e-01, 1.6856e+00}, {-1.1883e+00, 2.1995e+00}, {4.9815e-01, 0},
                               {-4.2870e-01, 1.5430e+00}, {9.8204e-01, 2.9607e+00}},
                              true);
         d.metadata["direction"] = "min";
         return d;
       }},
      {"third_order_family_critical",
       [] {
         return third_order("third_order_family_critical",
                            {{0, 0}, {-1.3135e+00, -1.0792e+00}, {-6.3624e-01, -2.4177e+00}, {4.9815e-01, 0},
                             {-4.6325e-01, -1.5217e+00}, {-2.3639e+00, -8.9924e-01}},
                            true);
       }},
      {"stacked_squares", stacked_squares},
      {"fourbar", fourbar},
      {"prism3d", prism3d},
  };
  return m;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : builders()) out.push_back(k);
  return out;
}

FrameworkDocument fixture(const std::string& name) {
  auto it = builders().find(name);
  if (it == builders().end()) throw Error(ErrorCode::InvalidDocument, "unknown fixture '" + name + "'");
  return it->second();
}

}  // namespace barframe
