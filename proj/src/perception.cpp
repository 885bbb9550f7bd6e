#include "familiar/perception.hpp"

#include <algorithm>

namespace familiar {

namespace {
const SensorValue kNone{};
}

const SensorValue& WorldState::get(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? kNone : it->second.value;
}

bool WorldState::has(const std::string& key) const { return !get(key).is_none(); }

std::vector<std::string> WorldState::apply_percepts(std::span<const Percept> percepts, Tick tick) {
  // Callers must not go back in time; clamp so per-key ticks stay monotone.
  tick = std::max(tick, latest_tick_);
  latest_tick_ = tick;

  std::vector<std::string> changed;
  for (const auto& p : percepts) {
    auto [it, inserted] = entries_.try_emplace(p.key);
    const bool differs = inserted ? !p.value.is_none() : it->second.value != p.value;
    it->second.value = p.value;
    it->second.tick = tick;
    if (differs && std::find(changed.begin(), changed.end(), p.key) == changed.end()) {
      changed.push_back(p.key);
    }
  }
  return changed;
}

void WorldState::clear_keys(std::span<const std::string> keys) {
  for (const auto& key : keys) {
    auto it = entries_.find(key);
    if (it == entries_.end()) continue;
    it->second.value = SensorValue::none();
    it->second.tick = latest_tick_;
  }
}

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "eq";
    case CompareOp::Ne: return "ne";
    case CompareOp::Le: return "le";
    case CompareOp::Ge: return "ge";
  }
  return "eq";
}

bool parse_compare_op(std::string_view s, CompareOp& out) {
  if (s == "eq") out = CompareOp::Eq;
  else if (s == "ne") out = CompareOp::Ne;
  else if (s == "le") out = CompareOp::Le;
  else if (s == "ge") out = CompareOp::Ge;
  else return false;
  return true;
}

bool compare(const SensorValue& lhs, CompareOp op, const SensorValue& rhs) {
  switch (op) {
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
    case CompareOp::Le: return lhs.is_number() && rhs.is_number() && lhs.number() <= rhs.number();
    case CompareOp::Ge: return lhs.is_number() && rhs.is_number() && lhs.number() >= rhs.number();
  }
  return false;
}

const SensorValue& SensorSnapshot::get(const std::string& sensor_id) const {
  auto it = values.find(sensor_id);
  return it == values.end() ? kNone : it->second;
}

SensorValue extract_sensor(const WorldState& ws, const SemanticSensorDef& def) {
  const auto& ex = def.extractor;
  switch (ex.kind) {
    case Extractor::Kind::Copy:
      return ws.get(ex.key);
    case Extractor::Kind::Predicate: {
      const auto& v = ws.get(ex.key);
      if (v.is_none()) return SensorValue(false);
      return SensorValue(compare(v, ex.op, ex.constant));
    }
    case Extractor::Kind::Count: {
      int n = 0;
      for (auto it = ws.entries().lower_bound(ex.key); it != ws.entries().end(); ++it) {
        if (it->first.compare(0, ex.key.size(), ex.key) != 0) break;
        if (!it->second.value.is_none()) ++n;
      }
      return SensorValue(n);
    }
  }
  return {};
}

SensorSnapshot extract_sensors(const WorldState& ws, std::span<const SemanticSensorDef> defs) {
  SensorSnapshot snap;
  snap.tick = ws.latest_tick();
  for (const auto& def : defs) snap.values[def.id] = extract_sensor(ws, def);
  return snap;
}

}  // namespace familiar
