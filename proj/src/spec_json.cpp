#include "spec_json.hpp"

namespace tmaf::detail {

Json to_json(const IntervalSpec& spec) {
  if (spec.type == IntervalSpec::Type::kDecile) return "decile";
  return Json{{"lo", spec.lo}, {"hi", spec.hi}, {"k", spec.k}};
}

Json to_json(const ActivationSpec& spec) {
  Json j{{"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case ActivationKind::kLeakyReLU:
      j["leaky_slope"] = spec.leaky_slope;
      break;
    case ActivationKind::kPReLU:
      j["prelu_init"] = spec.prelu_init;
      break;
    case ActivationKind::kTriDiagTMAF:
      j["beta"] = to_json(spec.beta);
      j["gamma"] = to_json(spec.gamma);
      [[fallthrough]];
    case ActivationKind::kDiagTMAF:
      j["alpha"] = to_json(spec.alpha);
      j["per_neuron"] = spec.per_neuron;
      break;
    default:
      break;
  }
  return j;
}

Json to_json(const NetworkSpec& spec) {
  return Json{{"widths", spec.widths},
              {"activation", to_json(spec.activation)},
              {"batch_norm", spec.batch_norm}};
}

IntervalSpec parse_interval_spec(const Json& v, const std::string& path,
                                 std::vector<std::string>& violations) {
  if (v.is_string()) {
    if (v.get<std::string>() == "decile") return IntervalSpec::decile();
    violations.push_back(path + ": unknown interval preset '" + v.get<std::string>() +
                         "' (expected \"decile\" or {lo, hi, k})");
    return {};
  }
  ObjectReader r(v, path, violations);
  IntervalSpec spec = IntervalSpec::grid(-1.0, 1.0, 100);
  if (auto lo = r.require<double>("lo")) spec.lo = *lo;
  if (auto hi = r.require<double>("hi")) spec.hi = *hi;
  if (auto k = r.require<std::size_t>("k")) spec.k = *k;
  r.finish();
  if (r.valid()) {
    if (!(spec.lo < spec.hi)) violations.push_back(path + ": lo must be < hi");
    if (spec.k < 1) violations.push_back(path + ": k must be >= 1");
  }
  return spec;
}

ActivationSpec parse_activation_spec(const Json& v, const std::string& path,
                                     std::vector<std::string>& violations,
                                     const ActivationSpec& base) {
  ActivationSpec spec = base;
  ObjectReader r(v, path, violations);
  if (auto kind = r.require<std::string>("kind")) {
    if (auto parsed = parse_activation_kind(*kind)) {
      spec.kind = *parsed;
    } else {
      violations.push_back(r.key_path("kind") + ": unknown activation '" + *kind + "'");
    }
  }
  spec.leaky_slope = r.get_or<double>("leaky_slope", spec.leaky_slope);
  spec.prelu_init = r.get_or<double>("prelu_init", spec.prelu_init);
  spec.per_neuron = r.get_or<bool>("per_neuron", spec.per_neuron);
  if (const Json* a = r.find("alpha")) spec.alpha = parse_interval_spec(*a, r.key_path("alpha"), violations);
  if (const Json* b = r.find("beta")) spec.beta = parse_interval_spec(*b, r.key_path("beta"), violations);
  if (const Json* g = r.find("gamma")) spec.gamma = parse_interval_spec(*g, r.key_path("gamma"), violations);
  r.finish();
  return spec;
}

NetworkSpec parse_network_spec(const Json& v, const std::string& path,
                               std::vector<std::string>& violations) {
  NetworkSpec spec;
  ObjectReader r(v, path, violations);
  if (auto widths = r.require<std::vector<std::size_t>>("widths")) spec.widths = *widths;
  if (const Json* a = r.find("activation")) {
    spec.activation = parse_activation_spec(*a, r.key_path("activation"), violations);
  } else if (r.valid()) {
    violations.push_back(r.key_path("activation") + ": required key missing");
  }
  spec.batch_norm = r.get_or<bool>("batch_norm", false);
  r.finish();
  return spec;
}

}  // namespace tmaf::detail
