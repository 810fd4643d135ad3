#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tmaf {

enum class ParamClass {
  kWeight,
  kBias,
  kBnScale,
  kBnShift,
  kPReLUSlope,
  kTmafAlpha,
  kTmafBeta,
  kTmafGamma,
};

const char* to_string(ParamClass cls);

/// A contiguous run of trainable scalars and their gradient accumulators.
/// Spans point into the owning layer; a block is invalidated if the owner
/// moves or is destroyed.
struct ParamBlock {
  std::string name;
  ParamClass cls;
  std::span<double> values;
  std::span<double> grads;
};

using ParamList = std::vector<ParamBlock>;

inline std::size_t scalar_count(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.values.size();
  return n;
}

}  // namespace tmaf
