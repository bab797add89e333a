#pragma once

// Scenarios shipped with the library. The YAML sources live in scenarios/ at
// the repository root and are embedded at build time.

#include <optional>
#include <span>
#include <string_view>

#include "mmeit/config.hpp"

namespace mmeit::scenarios {

struct BuiltinScenario {
  std::string_view name;
  std::string_view yaml;
};

/// All shipped scenarios in name order.
std::span<const BuiltinScenario> builtin();

std::optional<std::string_view> builtin_yaml(std::string_view name);

/// Parsed shipped scenario. Throws invalid_argument for an unknown name.
config::ScenarioConfig load_builtin(std::string_view name);

}  // namespace mmeit::scenarios
