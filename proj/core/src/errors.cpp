#include "ca43/errors.hpp"

#include <iostream>
#include <mutex>

namespace ca43 {

namespace {
std::mutex g_mutex;
WarningHandler g_handler = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_mutex);
  g_handler = handler ? std::move(handler) : WarningHandler([](const std::string&) {});
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  g_handler(message);
}

}  // namespace ca43
