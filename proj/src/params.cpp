#include "tmaf/params.hpp"

namespace tmaf {

const char* to_string(ParamClass cls) {
  switch (cls) {
    case ParamClass::kWeight: return "weight";
    case ParamClass::kBias: return "bias";
    case ParamClass::kBnScale: return "bn_scale";
    case ParamClass::kBnShift: return "bn_shift";
    case ParamClass::kPReLUSlope: return "prelu_slope";
    case ParamClass::kTmafAlpha: return "tmaf_alpha";
    case ParamClass::kTmafBeta: return "tmaf_beta";
    case ParamClass::kTmafGamma: return "tmaf_gamma";
  }
  return "unknown";
}

}  // namespace tmaf
