#include "familiar/wire.hpp"

namespace familiar::wire {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

json to_json(const Pose& pose) { return json{{"x", pose.x}, {"y", pose.y}, {"heading", pose.heading}}; }

json to_json(const ConcreteAction& action) {
  json params = json::object();
  for (const auto& [k, v] : action.params) params[k] = to_json_value(v);
  return json{{"name", action.name}, {"params", std::move(params)}};
}

json to_json(const FloorGrid& grid) {
  return json{{"resolution", grid.resolution},
              {"cols", grid.cols},
              {"rows", grid.rows},
              {"labels", grid.labels},
              {"cells", grid.cells}};
}

json to_json(const RegionSample& s) { return json{{"x", s.x}, {"y", s.y}, {"label", s.label}}; }

json to_json(const EngineEvent& event) {
  return std::visit(
      overloaded{
          [](const events::PreconditionChanged& e) {
            return json{{"kind", "precondition"},
                        {"behavior_id", e.behavior_id},
                        {"index", e.index},
                        {"status", to_string(e.status)}};
          },
          [](const events::BehaviorStatusChanged& e) {
            return json{{"kind", "behavior_status"},
                        {"behavior_id", e.behavior_id},
                        {"status", to_string(e.status)}};
          },
          [](const events::ProtocolStatusChanged& e) {
            return json{{"kind", "protocol_status"},
                        {"protocol_id", e.protocol_id},
                        {"status", to_string(e.status)}};
          },
          [](const events::ActionDispatched& e) {
            return json{{"kind", "action_dispatched"},
                        {"behavior_id", e.behavior_id},
                        {"action", to_json(e.action)}};
          },
      },
      event);
}

bool from_json(const json& j, EngineEvent& out) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) return false;
  const auto kind = j["kind"].get<std::string>();
  try {
    if (kind == "precondition") {
      events::PreconditionChanged e{j.at("behavior_id").get<std::string>(), j.at("index").get<std::size_t>(), {}};
      if (!parse_status(j.at("status").get<std::string>(), e.status)) return false;
      out = e;
    } else if (kind == "behavior_status") {
      events::BehaviorStatusChanged e{j.at("behavior_id").get<std::string>(), {}};
      if (!parse_status(j.at("status").get<std::string>(), e.status)) return false;
      out = e;
    } else if (kind == "protocol_status") {
      events::ProtocolStatusChanged e{j.at("protocol_id").get<std::string>(), {}};
      if (!parse_status(j.at("status").get<std::string>(), e.status)) return false;
      out = e;
    } else if (kind == "action_dispatched") {
      events::ActionDispatched e;
      e.behavior_id = j.at("behavior_id").get<std::string>();
      e.action.name = j.at("action").at("name").get<std::string>();
      for (const auto& [k, v] : j.at("action").at("params").items()) {
        SensorValue sv;
        if (!from_json_value(v, sv)) return false;
        e.action.params[k] = sv;
      }
      out = e;
    } else {
      return false;
    }
  } catch (const json::exception&) {
    return false;
  }
  return true;
}

json to_json(const SimEvent& event) {
  return std::visit(
      overloaded{
          [](const sim_events::RobotMoved& e) {
            return json{{"kind", "robot_moved"}, {"x", e.pose.x}, {"y", e.pose.y}, {"heading", e.pose.heading}};
          },
          [](const sim_events::ActionCompleted& e) {
            return json{{"kind", "action_completed"}, {"action", e.action}};
          },
          [](const sim_events::AvatarSighted&) { return json{{"kind", "avatar_sighted"}}; },
          [](const sim_events::AvatarLost&) { return json{{"kind", "avatar_lost"}}; },
          [](const sim_events::RobotSaid& e) { return json{{"kind", "robot_said"}, {"text", e.text}}; },
          [](const sim_events::RegionTaught& e) {
            return json{{"kind", "region_taught"}, {"x", e.sample.x}, {"y", e.sample.y}, {"label", e.sample.label}};
          },
      },
      event);
}

json engine_state(const GuidanceEngine& engine) {
  json protocols = json::array();
  for (const auto& ip : engine.protocols()) {
    json behaviors = json::array();
    for (const auto& b : ip.behaviors) {
      json pcs = json::array();
      for (const auto& pc : b.preconditions) pcs.push_back(to_string(pc.status));
      behaviors.push_back({{"id", b.id}, {"status", to_string(b.status)}, {"preconditions", std::move(pcs)}});
    }
    protocols.push_back({{"id", ip.id},
                         {"status", to_string(ip.status)},
                         {"last_finished", ip.last_finished ? json(*ip.last_finished) : json(nullptr)},
                         {"behaviors", std::move(behaviors)}});
  }
  json executing = nullptr;
  if (engine.executing())
    executing = {{"protocol_id", engine.executing()->protocol_id},
                 {"behavior_id", engine.executing()->behavior_id}};
  return json{{"protocols", std::move(protocols)},
              {"executing", std::move(executing)},
              {"suspended_stack", engine.suspended_stack()}};
}

}  // namespace familiar::wire
