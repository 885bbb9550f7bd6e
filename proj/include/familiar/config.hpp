#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "familiar/guidance.hpp"
#include "familiar/nlu.hpp"
#include "familiar/perception.hpp"
#include "familiar/scenario.hpp"

namespace familiar {

struct ActionDef {
  std::string name;
  std::vector<std::string> params;
  bool operator==(const ActionDef&) const = default;
};

/// The whole scenario definition: sensors, intents, action catalogue,
/// apartment and defaults, and the interaction protocols (all Inactive).
struct Config {
  int version = 1;
  std::vector<SemanticSensorDef> sensors;
  std::vector<IntentDef> intents;
  std::vector<ActionDef> actions;
  Apartment apartment;
  Point robot_start{1.0, 1.0};
  Point avatar_start{9.0, 7.0};
  SimParams sim;
  double time_limit_s = 1800.0;
  std::vector<InteractionProtocol> protocols;

  const ActionDef* find_action(const std::string& name) const;
  bool operator==(const Config&) const = default;
};

struct ConfigError {
  enum class Code {
    DuplicateId,
    UnknownReference,
    NoEntry,
    MultipleEntries,
    NoExit,
    PredecessorCycle,
    BadValue,
    SyntaxError
  };
  std::string path;  // e.g. /protocols/0/behaviors/1/predecessors/0
  Code code = Code::BadValue;
  std::string message;

  bool operator==(const ConfigError&) const = default;
};

const char* to_string(ConfigError::Code code);
nlohmann::json to_json(const ConfigError& e);

struct ConfigResult {
  std::optional<Config> config;  // present iff errors is empty
  std::vector<ConfigError> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses and fully validates a JSON document, collecting every error.
ConfigResult parse_config(std::string_view text);
ConfigResult load_config_file(const std::string& path);

/// Semantic checks only (uniqueness, references, entry/exit counts, cycles,
/// value ranges).
std::vector<ConfigError> validate(const Config& config);

/// Canonical form: keys in schema order, arrays in config order.
std::string serialize(const Config& config);
nlohmann::ordered_json to_json(const Config& config);

/// Behavior object in the config schema (used by the behavior editor path).
nlohmann::ordered_json behavior_to_json(const Behavior& behavior);
/// Structural parse of one behavior object; errors appended with `path` prefix.
bool behavior_from_json(const nlohmann::json& j, const std::string& path, Behavior& out,
                        std::vector<ConfigError>& errors);

/// World keys the session publishes; sensors and dynamic params may only
/// read these, the `region.` family, or intent slot names.
const std::vector<std::string>& session_world_keys();
inline constexpr const char* kRegionKeyPrefix = "region.";
bool is_known_world_key(const Config& config, const std::string& key);

}  // namespace familiar
