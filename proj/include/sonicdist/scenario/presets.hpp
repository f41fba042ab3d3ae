// SPDX-License-Identifier: MIT
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonicdist/scenario/loader.hpp"
#include "sonicdist/scenario/preset_data.hpp"

namespace sonicdist::scenario {

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : kPresetData) out.emplace_back(name);
  return out;
}

inline std::optional<std::string_view> preset_text(std::string_view name) {
  for (const auto& [n, text] : kPresetData)
    if (n == name) return text;
  return std::nullopt;
}

inline ScenarioConfig load_preset(std::string_view name) {
  const auto text = preset_text(name);
  if (!text) throw ScenarioError("no preset named '" + std::string(name) + "'");
  return parse_scenario(std::string(*text), std::string(name));
}

/// A path to an existing file wins; otherwise the argument names a preset.
inline ScenarioConfig resolve_scenario(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) return load_scenario(arg);
  if (preset_text(arg)) return load_preset(arg);
  throw ScenarioError("no scenario file or preset named '" + arg + "'");
}

}  // namespace sonicdist::scenario
