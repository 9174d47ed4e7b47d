#pragma once

#include <stdexcept>
#include <string>

namespace ca43 {

/// Malformed or inconsistent configuration (species file, experiment file, presets).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function was called with arguments that violate its preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fock-space truncation is too small for the requested propagation.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structured failure raised while executing a sequence.
class RunError : public std::runtime_error {
 public:
  RunError(std::string step, const std::string& what)
      : std::runtime_error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

}  // namespace ca43

#include <functional>

namespace ca43 {

/// Receives non-fatal diagnostics (suspicious but legal arguments). The default
/// handler writes to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace ca43
