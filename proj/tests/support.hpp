#pragma once

#include <random>
#include <string>

#include "barframe/document.hpp"
#include "barframe/framework.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(BARFRAME_FIXTURE_DIR) + "/" + name + ".json";
}

inline barframe::FrameworkDocument load_fixture(const std::string& name) {
  return barframe::load_document(fixture_path(name));
}

// random graph on n vertices with m distinct edges, coordinates in [-1, 1]
inline barframe::Framework random_framework(int n, int d, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  barframe::Vec x(n * d);
  for (int i = 0; i < n * d; ++i) x(i) = u(rng);
  std::vector<barframe::Edge> all;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) all.push_back({a, b});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min<std::size_t>(m, all.size()));
  return barframe::Framework(d, x, all);
}

}  // namespace testsupport
