#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddlab {

/// A flat JSON object of experiment settings.
using Config = nlohmann::json;

/// Default settings of a subcommand; the key set is the set of accepted keys.
Config default_config(std::string_view subcommand);

/// Names of the known subcommands.
const std::vector<std::string>& subcommand_names();

/// Applies `key=value`. The value is parsed as JSON when possible and taken
/// as a string otherwise. Unknown keys are rejected.
void apply_override(Config& config, std::string_view assignment);

/// Defaults, then the JSON file (if any), then the overrides.
Config resolve_config(std::string_view subcommand, const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides);

/// 16-hex-digit FNV-1a hash of the canonical dump.
std::string config_hash(const Config& config);

}  // namespace ddlab
