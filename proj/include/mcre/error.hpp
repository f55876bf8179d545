#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mcre {

// Bad user configuration (flags, config files, grids).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or derived object violates one of its invariants.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(std::vector<std::string> violations);
  explicit ModelError(const std::string& violation)
      : ModelError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A theorem's applicability condition does not hold for the given inputs.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcre
