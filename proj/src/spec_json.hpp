#pragma once

#include <string>
#include <vector>

#include "json_util.hpp"
#include "tmaf/network.hpp"

namespace tmaf::detail {

Json to_json(const IntervalSpec& spec);
Json to_json(const ActivationSpec& spec);
Json to_json(const NetworkSpec& spec);

IntervalSpec parse_interval_spec(const Json& v, const std::string& path,
                                 std::vector<std::string>& violations);
/// Keys absent from `v` keep their value from `base`.
ActivationSpec parse_activation_spec(const Json& v, const std::string& path,
                                     std::vector<std::string>& violations,
                                     const ActivationSpec& base = {});
NetworkSpec parse_network_spec(const Json& v, const std::string& path,
                               std::vector<std::string>& violations);

}  // namespace tmaf::detail
