#include "ca43/version.hpp"

namespace ca43 {

std::string_view version() { return CA43_VERSION; }

}  // namespace ca43
