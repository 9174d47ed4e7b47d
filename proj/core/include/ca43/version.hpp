#pragma once

#include <string_view>

namespace ca43 {

/// Library version, "major.minor.patch".
std::string_view version();

}  // namespace ca43
