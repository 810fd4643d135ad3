#include "tmaf/error.hpp"

namespace tmaf {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "invalid configuration:";
  for (const auto& v : violations) {
    out += "\n  - ";
    out += v;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace tmaf
