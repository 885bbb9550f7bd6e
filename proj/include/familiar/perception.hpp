#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "familiar/sensor_value.hpp"

namespace familiar {

using Tick = std::int64_t;

struct Percept {
  std::string key;
  SensorValue value;
};

/// Percept memory: latest value per key, stamped with the tick it was written.
/// Reading an absent key yields none.
class WorldState {
 public:
  struct Entry {
    SensorValue value;
    Tick tick = 0;
    bool operator==(const Entry&) const = default;
  };

  const SensorValue& get(const std::string& key) const;
  bool has(const std::string& key) const;  // present and not none
  const std::map<std::string, Entry>& entries() const { return entries_; }
  Tick latest_tick() const { return latest_tick_; }

  /// Writes each percept at `tick`; returns the keys whose value changed, in
  /// percept order (a key appears once even if repeated in the batch).
  std::vector<std::string> apply_percepts(std::span<const Percept> percepts, Tick tick);

  /// Sets listed keys to none. Absent keys are left absent.
  void clear_keys(std::span<const std::string> keys);

  bool operator==(const WorldState&) const = default;

 private:
  std::map<std::string, Entry> entries_;
  Tick latest_tick_ = 0;
};

enum class CompareOp { Eq, Ne, Le, Ge };

const char* to_string(CompareOp op);
bool parse_compare_op(std::string_view s, CompareOp& out);

/// Eq/Ne follow SensorValue equality; Le/Ge hold only between two numbers.
bool compare(const SensorValue& lhs, CompareOp op, const SensorValue& rhs);

struct Extractor {
  enum class Kind { Copy, Predicate, Count };
  Kind kind = Kind::Copy;
  std::string key;  // world key, or key prefix for Count
  CompareOp op = CompareOp::Eq;
  SensorValue constant;
  bool operator==(const Extractor&) const = default;
};

struct SemanticSensorDef {
  std::string id;
  std::string name;
  std::string icon;
  Extractor extractor;
  bool operator==(const SemanticSensorDef&) const = default;
};

struct SensorSnapshot {
  std::map<std::string, SensorValue> values;
  Tick tick = 0;

  const SensorValue& get(const std::string& sensor_id) const;
  bool operator==(const SensorSnapshot&) const = default;
};

SensorValue extract_sensor(const WorldState& ws, const SemanticSensorDef& def);
SensorSnapshot extract_sensors(const WorldState& ws, std::span<const SemanticSensorDef> defs);

}  // namespace familiar
