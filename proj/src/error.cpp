#include "mcre/error.hpp"

namespace mcre {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "model invalid";
  for (const auto& v : violations) out += "\n  - " + v;
  return out;
}

}  // namespace

ModelError::ModelError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace mcre
