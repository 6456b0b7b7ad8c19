#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfseir {

/// Raised for malformed or invalid run configuration. Carries the key at fault.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Raised when a time march cannot proceed: stability bound violated up front,
/// or a non-finite value produced mid-run (step() names the offending level).
class SolverError : public std::runtime_error {
 public:
  static constexpr std::size_t kNoStep = static_cast<std::size_t>(-1);

  explicit SolverError(const std::string& what, std::size_t step = kNoStep)
      : std::runtime_error(step == kNoStep ? what : what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace cfseir
