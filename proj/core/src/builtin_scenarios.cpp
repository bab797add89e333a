#include "mmeit/builtin_scenarios.hpp"

#include <array>
#include <string>

#include "mmeit/error.hpp"

namespace mmeit::scenarios {
namespace {

constexpr std::array kScenarios{
#include "builtin_scenarios_data.inc"
};

}  // namespace

std::span<const BuiltinScenario> builtin() { return kScenarios; }

std::optional<std::string_view> builtin_yaml(std::string_view name) {
  for (const auto& s : kScenarios)
    if (s.name == name) return s.yaml;
  return std::nullopt;
}

config::ScenarioConfig load_builtin(std::string_view name) {
  const auto yaml = builtin_yaml(name);
  if (!yaml) throw_invalid("unknown shipped scenario '" + std::string(name) + "'");
  return config::parse_config(*yaml);
}

}  // namespace mmeit::scenarios
