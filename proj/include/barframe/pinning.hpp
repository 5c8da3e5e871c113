#pragma once

#include <optional>
#include <vector>

#include "barframe/framework.hpp"

namespace barframe {

struct PinnedCoordinate {
  int vertex = 0;
  int axis = 0;
  bool operator==(const PinnedCoordinate&) const = default;
};

// d=2: anchor 0 on both axes, anchor 1 on axis 1.
// d=3: anchor 0 on all axes, anchor 1 on axes 1,2, anchor 2 on axis 2.
struct PinningSpec {
  std::vector<PinnedCoordinate> pinned;
  std::vector<int> anchors;

  static PinningSpec standard(int d, const std::vector<int>& anchors);
  // validates the nested pattern; throws InvalidPinSpec
  static PinningSpec from_pins(int d, const std::vector<PinnedCoordinate>& pins);

  std::vector<Constraint> constraints() const;
};

std::vector<int> default_anchors(const Framework& fw);

struct PinnedFramework {
  PinningSpec spec;
  Framework framework;
};

PinnedFramework make_pinning(const Framework& fw, const std::optional<std::vector<int>>& anchors = std::nullopt);

struct PinningCondition {
  bool holds = false;
  int rank = 0;
};

PinningCondition pinning_condition(const Framework& fw, const PinningSpec& spec);

// pin gradient rows G (D x nd)
Mat pin_matrix(const Framework& fw, const PinningSpec& spec);

}  // namespace barframe
