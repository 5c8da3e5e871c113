#pragma once

#include <string>
#include <vector>

#include "barframe/document.hpp"

namespace barframe {

std::vector<std::string> fixture_names();
// throws InvalidDocument for unknown names
FrameworkDocument fixture(const std::string& name);

}  // namespace barframe
