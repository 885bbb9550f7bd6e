#pragma once

// JSON encodings shared by the wire protocol and the session log.

#include <nlohmann/json.hpp>

#include "familiar/guidance.hpp"
#include "familiar/region_learner.hpp"
#include "familiar/scenario.hpp"

namespace familiar::wire {

using json = nlohmann::json;

json to_json(const Pose& pose);
json to_json(const ConcreteAction& action);
json to_json(const FloorGrid& grid);
json to_json(const RegionSample& sample);

/// `event` payload for an engine event: kind is one of precondition,
/// behavior_status, protocol_status, action_dispatched.
json to_json(const EngineEvent& event);
bool from_json(const json& j, EngineEvent& out);

/// kind: robot_moved, action_completed, avatar_sighted, avatar_lost,
/// robot_said, region_taught.
json to_json(const SimEvent& event);

json engine_state(const GuidanceEngine& engine);

}  // namespace familiar::wire
