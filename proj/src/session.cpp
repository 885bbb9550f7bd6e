#include "familiar/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "familiar/wire.hpp"

namespace familiar {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_xy(double x, double y) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f,%.2f", x, y);
  return buf;
}

Tick limit_ticks(const Config& config) {
  return static_cast<Tick>(std::llround(config.time_limit_s * Session::kTicksPerSecond));
}

std::vector<std::string> goal_of(const Config& config) {
  std::vector<std::string> goal;
  for (const auto& r : config.apartment.rooms) goal.push_back(r.name);
  return goal;
}

json world_json(const WorldState& world) {
  json out = json::object();
  for (const auto& [k, e] : world.entries())
    if (!e.value.is_none()) out[k] = to_json_value(e.value);
  return out;
}

json samples_json(const std::vector<RegionSample>& samples) {
  json out = json::array();
  for (const auto& s : samples) out.push_back(wire::to_json(s));
  return out;
}

std::string notice_for(const InteractionProtocol* ip, const std::string& id, ProtocolStatus status) {
  const std::string name = ip ? ip->name : id;
  switch (status) {
    case ProtocolStatus::Active: return "Interaction protocol \"" + name + "\" is active";
    case ProtocolStatus::Suspended: return "Interaction protocol \"" + name + "\" was suspended";
    case ProtocolStatus::Completed: return "Interaction protocol \"" + name + "\" completed";
    case ProtocolStatus::Inactive: return "Interaction protocol \"" + name + "\" is inactive";
  }
  return name;
}

// A define_behavior request applied to a config copy. Shared by the live
// session and log reconstruction.
struct DefineOutcome {
  std::vector<ConfigError> errors;
  Behavior behavior;
  std::string protocol_id;
};

DefineOutcome apply_define(Config& config, const json& msg) {
  DefineOutcome res;
  if (!msg.contains("protocol_id") || !msg["protocol_id"].is_string()) {
    res.errors.push_back({"/protocol_id", ConfigError::Code::BadValue, "protocol_id must be a string"});
    return res;
  }
  res.protocol_id = msg["protocol_id"].get<std::string>();
  auto it = std::find_if(config.protocols.begin(), config.protocols.end(),
                         [&](const InteractionProtocol& ip) { return ip.id == res.protocol_id; });
  if (it == config.protocols.end())
    res.errors.push_back({"/protocol_id", ConfigError::Code::UnknownReference,
                          "unknown protocol '" + res.protocol_id + "'"});
  if (!msg.contains("behavior")) {
    res.errors.push_back({"/behavior", ConfigError::Code::BadValue, "missing behavior"});
    return res;
  }
  if (!behavior_from_json(msg["behavior"], "/behavior", res.behavior, res.errors) || !res.errors.empty())
    return res;

  Config candidate = config;
  auto& ip = candidate.protocols[static_cast<std::size_t>(it - config.protocols.begin())];
  Behavior copy = res.behavior;
  copy.def_index = ip.behaviors.size();
  ip.behaviors.push_back(copy);
  res.errors = validate(candidate);
  if (res.errors.empty()) config = std::move(candidate);
  return res;
}

}  // namespace

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Running: return "running";
    case Phase::TimedOut: return "timed_out";
    case Phase::Succeeded: return "succeeded";
  }
  return "running";
}

const char* to_string(CommandClass c) {
  switch (c) {
    case CommandClass::Needed: return "needed";
    case CommandClass::Wrong: return "wrong";
    case CommandClass::Unrecognized: return "unrecognized";
  }
  return "unrecognized";
}

json to_json(const Metrics& m) {
  return json{{"success", m.success},
              {"regions_taught", m.regions_taught},
              {"wrong_commands", m.wrong_commands},
              {"unrecognized_commands", m.unrecognized_commands},
              {"out_of_sight_events", m.out_of_sight_events},
              {"duration_s", m.duration_s}};
}

// ---------------------------------------------------------------------------
// SessionLog

void SessionLog::append(Tick tick, std::string kind, json body) {
  if (!records_.empty() && tick < records_.back().tick) tick = records_.back().tick;
  records_.push_back({tick, std::move(kind), std::move(body)});
}

std::string SessionLog::export_ndjson() const {
  std::string out;
  for (const auto& r : records_) {
    out += json{{"tick", r.tick}, {"kind", r.kind}, {"body", r.body}}.dump();
    out += '\n';
  }
  return out;
}

SessionLog SessionLog::parse_ndjson(std::string_view text) {
  SessionLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    log.records_.push_back({j.at("tick").get<Tick>(), j.at("kind").get<std::string>(), j.at("body")});
  }
  return log;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(Config config, SessionOptions options)
    : config_(std::move(config)),
      options_(options),
      engine_(config_.protocols),
      sim_(config_.apartment, config_.sim, config_.robot_start, config_.avatar_start),
      goal_(goal_of(config_)) {
  initialize();
}

void Session::initialize() {
  quiet_ = true;
  const Tick now = sim_.tick();
  engine_ = GuidanceEngine(config_.protocols);
  sim_ = Simulation(config_.apartment, config_.sim, config_.robot_start, config_.avatar_start);
  sim_.set_tick(now);
  world_ = WorldState{};
  sensors_ = SensorSnapshot{};
  last_failure_.reset();

  std::vector<json> sink;
  const Percept battery{"battery_low", false};
  inject_percepts(std::span(&battery, 1));
  publish_percepts(sink);
  refresh_sensors(sink);
  quiet_ = false;
}

json Session::make(std::string type, json fields) {
  fields["type"] = std::move(type);
  fields["seq"] = quiet_ ? seq_ : ++seq_;
  fields["tick"] = sim_.tick();
  return fields;
}

void Session::emit(std::vector<json>& out, json msg) {
  if (quiet_) return;
  log_.append(sim_.tick(), "server", msg);
  out.push_back(std::move(msg));
}

void Session::record_world_diff(const std::map<std::string, WorldState::Entry>& before) {
  for (const auto& [k, e] : world_.entries()) {
    auto it = before.find(k);
    if (it == before.end() ? !e.value.is_none() : it->second.value != e.value)
      log_.append(sim_.tick(), "world", json{{"key", k}, {"value", to_json_value(e.value)}});
  }
}

void Session::forward_engine_events(const std::vector<EngineEvent>& events, std::vector<json>& out) {
  for (const auto& ev : events) {
    json body = wire::to_json(ev);
    log_.append(sim_.tick(), "engine", body);
    const bool detail = std::holds_alternative<events::PreconditionChanged>(ev) ||
                        std::holds_alternative<events::BehaviorStatusChanged>(ev);
    if (detail && !options_.dynamic_viz) continue;
    if (const auto* ps = std::get_if<events::ProtocolStatusChanged>(&ev))
      body["notice"] = notice_for(engine_.find_protocol(ps->protocol_id), ps->protocol_id, ps->status);
    emit(out, make("event", std::move(body)));
  }
}

void Session::publish_percepts(std::vector<json>&) {
  const auto before = world_.entries();
  const Pose& robot = sim_.robot();
  const Pose& avatar = sim_.avatar();
  std::vector<Percept> ps;
  ps.push_back({"distance_to_avatar", distance(robot.point(), avatar.point())});
  ps.push_back({"avatar_pose", SensorValue::text(format_xy(avatar.x, avatar.y))});
  ps.push_back({"robot_pose", SensorValue::text(format_xy(robot.x, robot.y))});

  const auto& learner = sim_.learner();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < learner.size(); ++i) {
    auto label = learner.sample(i).label;
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
  }
  ps.push_back({"regions_taught", static_cast<double>(labels.size())});
  if (!learner.empty()) ps.push_back({"last_taught_label", SensorValue::label(learner.sample(learner.size() - 1).label)});
  for (const auto& l : labels) ps.push_back({kRegionKeyPrefix + l, true});

  world_.apply_percepts(ps, sim_.tick());
  record_world_diff(before);
}

void Session::refresh_sensors(std::vector<json>& out) {
  SensorSnapshot snap = extract_sensors(world_, config_.sensors);
  snap.tick = sim_.tick();
  if (options_.dynamic_viz) {
    for (const auto& def : config_.sensors) {
      const SensorValue& now = snap.get(def.id);
      auto it = sensors_.values.find(def.id);
      if (it != sensors_.values.end() && it->second == now) continue;
      emit(out, make("event", json{{"kind", "sensor_update"}, {"sensor_id", def.id}, {"value", to_json_value(now)}}));
    }
  }
  sensors_ = std::move(snap);
  forward_engine_events(engine_.update_preconditions(sensors_), out);
}

void Session::release_open_action() {
  if (!engine_.executing() || !sim_.following()) return;
  const auto& sel = *engine_.executing();
  const InteractionProtocol* ip = engine_.find_protocol(sel.protocol_id);
  if (!ip) return;
  // A higher-ranked protocol has work: wind the follow down so it can run.
  if (const auto next = engine_.select_next(); next && next->protocol_id != sel.protocol_id) {
    sim_.finish_action();
    return;
  }
  for (const auto& b : ip->behaviors) {
    if (std::find(b.predecessors.begin(), b.predecessors.end(), sel.behavior_id) == b.predecessors.end())
      continue;
    const bool ready = std::all_of(b.preconditions.begin(), b.preconditions.end(), [](const Precondition& pc) {
      return pc.status == PreconditionStatus::Satisfied;
    });
    if (ready) {
      sim_.finish_action();
      return;
    }
  }
}

void Session::try_begin(std::vector<json>& out) {
  if (engine_.executing()) return;
  const auto sel = engine_.select_next();
  if (!sel) return;

  const auto before = world_.entries();
  std::vector<EngineEvent> events;
  try {
    events = engine_.begin_execution(*sel, world_);
  } catch (const GuidanceError& e) {
    if (e.code() != GuidanceError::Code::MissingWorldKey) throw;
    const std::string key = sel->behavior_id + "/" + e.detail();
    if (last_failure_ != key) {
      last_failure_ = key;
      emit(out, make("event", json{{"kind", "action_failed"}, {"behavior_id", sel->behavior_id},
                                   {"detail", "missing world key '" + e.detail() + "'"}}));
    }
    return;
  }
  last_failure_.reset();
  record_world_diff(before);
  forward_engine_events(events, out);

  for (const auto& ev : events) {
    const auto* d = std::get_if<events::ActionDispatched>(&ev);
    if (!d) continue;
    try {
      forward_sim_events(sim_.dispatch_action(d->action), out);
    } catch (const SimError& e) {
      const json body{{"kind", "action_rejected"}, {"action", d->action.name}, {"detail", e.what()}};
      log_.append(sim_.tick(), "sim", body);
      emit(out, make("event", body));
      forward_engine_events(engine_.complete_execution(sel->behavior_id), out);
    }
  }
}

bool Session::forward_sim_events(const std::vector<SimEvent>& events, std::vector<json>& out) {
  bool completed = false;
  for (const auto& ev : events) {
    json body = wire::to_json(ev);
    log_.append(sim_.tick(), "sim", body);
    std::visit(overloaded{
                   [&](const sim_events::RobotSaid& e) { emit(out, make("robot_say", json{{"text", e.text}})); },
                   [&](const sim_events::RegionTaught&) {
                     emit(out, make("event", body));
                     json floor = wire::to_json(floor_grid(sim_.learner(), config_.apartment.width,
                                                           config_.apartment.height, 0.25));
                     floor["kind"] = "floor_update";
                     emit(out, make("event", std::move(floor)));
                   },
                   [&](const sim_events::ActionCompleted&) {
                     completed = true;
                     emit(out, make("event", body));
                   },
                   [&](const auto&) { emit(out, make("event", body)); },
               },
               ev);
  }
  return completed;
}

void Session::end_session(Phase phase, std::vector<json>& out) {
  phase_ = phase;
  emit(out, make("session_ended", json{{"success", phase == Phase::Succeeded},
                                       {"phase", to_string(phase)},
                                       {"metrics", to_json(metrics())}}));
}

std::vector<json> Session::tick() {
  std::vector<json> out;
  if (phase_ != Phase::Running) return out;

  // (1) simulation
  const bool completed = forward_sim_events(sim_.step(kTickSeconds), out);

  // (2) percepts, (3) sensors, (4) preconditions
  publish_percepts(out);
  refresh_sensors(out);

  // (5) selection
  release_open_action();
  try_begin(out);

  // (6) completion
  if (completed && engine_.executing())
    forward_engine_events(engine_.complete_execution(engine_.executing()->behavior_id), out);

  // (7) goal / time limit
  const bool all_taught = goal_labels_taught().size() == goal_.size() && !goal_.empty();
  if (all_taught && sim_.tick() <= limit_ticks(config_)) end_session(Phase::Succeeded, out);
  else if (sim_.tick() >= limit_ticks(config_)) end_session(Phase::TimedOut, out);
  return out;
}

void Session::inject_percepts(std::span<const Percept> percepts) {
  const auto before = world_.entries();
  world_.apply_percepts(percepts, sim_.tick());
  record_world_diff(before);
}

std::set<std::string> Session::goal_labels_taught() const {
  std::set<std::string> out;
  for (const auto& g : goal_)
    if (sim_.learner().has_label(g)) out.insert(g);
  return out;
}

CommandClass Session::classify_command(const ParseResult& parse) const {
  if (!parse.recognized) return CommandClass::Unrecognized;
  const auto is_open_goal = [&](const std::string& label) {
    return std::find(goal_.begin(), goal_.end(), label) != goal_.end() && !sim_.learner().has_label(label);
  };
  if (parse.intent == "teach_region") {
    auto it = parse.slots.find("region_label");
    if (it == parse.slots.end() && !parse.slots.empty()) it = parse.slots.begin();
    if (it != parse.slots.end() && !sim_.following() && is_open_goal(it->second)) return CommandClass::Needed;
    return CommandClass::Wrong;
  }
  if (parse.intent == "arrived") {
    const SensorValue& pending = world_.get("region_label");
    if (sim_.following() && sim_.in_sight() && pending.is_label() && is_open_goal(pending.label_token()))
      return CommandClass::Needed;
    return CommandClass::Wrong;
  }
  return CommandClass::Wrong;
}

Metrics Session::metrics() const {
  Metrics m;
  m.success = phase_ == Phase::Succeeded;
  m.regions_taught = static_cast<int>(goal_labels_taught().size());
  m.wrong_commands = wrong_commands_;
  m.unrecognized_commands = unrecognized_commands_;
  m.out_of_sight_events = out_of_sight_events_;
  m.duration_s = elapsed_s();
  return m;
}

json Session::state() const {
  json active = nullptr;
  if (sim_.active_action()) active = sim_.active_action()->action.name;
  return json{{"tick", sim_.tick()},
              {"phase", to_string(phase_)},
              {"engine", wire::engine_state(engine_)},
              {"world", world_json(world_)},
              {"robot", wire::to_json(sim_.robot())},
              {"avatar", wire::to_json(sim_.avatar())},
              {"samples", samples_json(sim_.learner().samples())},
              {"active_action", active}};
}

json Session::snapshot() const {
  json s = state();
  s["flags"] = {{"dynamic_viz", options_.dynamic_viz}, {"visual_programming", options_.visual_programming}};
  s["config"] = json::parse(to_json(config_).dump());
  json sensors = json::object();
  for (const auto& [k, v] : sensors_.values) sensors[k] = to_json_value(v);
  s["sensors"] = std::move(sensors);
  s["in_sight"] = sim_.in_sight();
  s["floor"] = wire::to_json(floor_grid(sim_.learner(), config_.apartment.width, config_.apartment.height, 0.25));
  s["goal"] = goal_;
  s["metrics"] = to_json(metrics());
  s["elapsed_s"] = elapsed_s();
  return s;
}

std::vector<json> Session::on_chat(const json& msg, json& meta) {
  std::vector<json> out;
  const std::string text = msg["text"].get<std::string>();
  const ParseResult parse = parse_utterance(text, config_.intents);
  const CommandClass cls = classify_command(parse);
  meta["class"] = to_string(cls);
  if (cls == CommandClass::Wrong) ++wrong_commands_;
  if (cls == CommandClass::Unrecognized) ++unrecognized_commands_;

  if (!parse.recognized) {
    emit(out, make("chat_ack", json{{"recognized", false}, {"text", text}}));
    return out;
  }
  const auto before = world_.entries();
  std::vector<Percept> ps{{kLastIntentKey, SensorValue::label(parse.intent)}};
  for (const auto& [slot, value] : parse.slots) ps.push_back({slot, SensorValue::label(value)});
  world_.apply_percepts(ps, sim_.tick());
  record_world_diff(before);
  emit(out, make("chat_ack", json{{"recognized", true}, {"intent", parse.intent}, {"slots", parse.slots}, {"text", text}}));
  return out;
}

std::vector<json> Session::on_move(const json& msg, json& meta) {
  std::vector<json> out;
  const Point target{msg["x"].get<double>(), msg["y"].get<double>()};
  const bool before = sim_.in_sight();
  const MoveResult res = sim_.move_avatar(target);
  const bool after = sim_.in_sight();
  meta["accepted"] = res.ok();
  meta["sighted_before"] = before;
  meta["sighted_after"] = after;
  if (!res.ok()) {
    emit(out, make("move_rejected", json{{"reason", to_string(res.reason)}, {"x", target.x}, {"y", target.y}}));
    return out;
  }
  if (before && !after) ++out_of_sight_events_;
  emit(out, make("avatar_moved", json{{"x", target.x}, {"y", target.y}}));
  return out;
}

std::vector<json> Session::on_define(const json& msg, json& meta) {
  std::vector<json> out;
  if (!options_.visual_programming) {
    meta["accepted"] = false;
    const ConfigError err{"", ConfigError::Code::BadValue, "visual programming is disabled"};
    emit(out, make("define_rejected", json{{"errors", json::array({to_json(err)})}}));
    return out;
  }
  DefineOutcome res = apply_define(config_, msg);
  meta["accepted"] = res.errors.empty();
  if (!res.errors.empty()) {
    json errors = json::array();
    for (const auto& e : res.errors) errors.push_back(to_json(e));
    emit(out, make("define_rejected", json{{"errors", std::move(errors)}}));
    return out;
  }
  engine_.append_behavior(res.protocol_id, res.behavior);
  emit(out, make("snapshot", snapshot()));
  return out;
}

std::vector<json> Session::handle_message(const json& msg) {
  const std::size_t idx = log_.size();
  log_.append(sim_.tick(), "client", json{{"msg", msg}});
  json meta = json::object();
  std::vector<json> out;

  auto error = [&](std::string detail) {
    meta["error"] = detail;
    emit(out, make("protocol_error", json{{"detail", std::move(detail)}}));
  };

  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    error("message must be an object with a string 'type'");
  } else {
    const std::string type = msg["type"].get<std::string>();
    if (phase_ != Phase::Running && type != "get_snapshot" && type != "reset") {
      meta["ignored"] = true;
      emit(out, make("session_ended", json{{"success", phase_ == Phase::Succeeded},
                                           {"phase", to_string(phase_)},
                                           {"metrics", to_json(metrics())}}));
    } else if (type == "chat") {
      if (!msg.contains("text") || !msg["text"].is_string()) error("chat needs a string 'text'");
      else out = on_chat(msg, meta);
    } else if (type == "move_avatar") {
      if (!msg.contains("x") || !msg.contains("y") || !msg["x"].is_number() || !msg["y"].is_number())
        error("move_avatar needs numeric 'x' and 'y'");
      else out = on_move(msg, meta);
    } else if (type == "define_behavior") {
      out = on_define(msg, meta);
    } else if (type == "get_snapshot") {
      emit(out, make("snapshot", snapshot()));
    } else if (type == "reset") {
      phase_ = Phase::Running;
      initialize();
      emit(out, make("snapshot", snapshot()));
    } else {
      error("unknown message type '" + type + "'");
    }
  }
  log_.at(idx).body["meta"] = std::move(meta);
  return out;
}

std::vector<json> Session::handle_line(std::string_view line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::parse_error& e) {
    log_.append(sim_.tick(), "client", json{{"raw", std::string(line)}, {"meta", {{"error", "parse"}}}});
    std::vector<json> out;
    emit(out, make("protocol_error", json{{"detail", std::string("invalid JSON: ") + e.what()}}));
    return out;
  }
  return handle_message(msg);
}

// ---------------------------------------------------------------------------
// Log consumers

Metrics compute_metrics(const SessionLog& log, const Config& config) {
  const auto goal = goal_of(config);
  Metrics m;
  Pose robot{config.robot_start.x, config.robot_start.y, 0.0};
  Point avatar = config.avatar_start;
  std::set<std::string> taught;
  const auto sighted = [&](Point a) {
    const double dx = robot.x - a.x;
    const double dy = robot.y - a.y;
    return std::sqrt(dx * dx + dy * dy) <= config.sim.perception_radius;
  };

  for (const auto& r : log.records()) {
    if (r.kind == "client") {
      if (!r.body.contains("msg")) continue;
      const auto& msg = r.body["msg"];
      const auto& meta = r.body.contains("meta") ? r.body["meta"] : json::object();
      if (meta.contains("class")) {
        const auto cls = meta["class"].get<std::string>();
        if (cls == "wrong") ++m.wrong_commands;
        if (cls == "unrecognized") ++m.unrecognized_commands;
      }
      const std::string type = msg.value("type", "");
      if (type == "move_avatar" && meta.value("accepted", false)) {
        const Point target{msg["x"].get<double>(), msg["y"].get<double>()};
        if (sighted(avatar) && !sighted(target)) ++m.out_of_sight_events;
        avatar = target;
      } else if (type == "reset" && !meta.contains("error")) {
        robot = {config.robot_start.x, config.robot_start.y, 0.0};
        avatar = config.avatar_start;
        taught.clear();
      }
    } else if (r.kind == "sim") {
      const auto kind = r.body.value("kind", "");
      if (kind == "robot_moved") {
        robot = {r.body["x"].get<double>(), r.body["y"].get<double>(), r.body["heading"].get<double>()};
      } else if (kind == "region_taught") {
        const auto label = r.body["label"].get<std::string>();
        if (std::find(goal.begin(), goal.end(), label) != goal.end()) taught.insert(label);
      }
    } else if (r.kind == "server" && r.body.value("type", "") == "session_ended") {
      m.regions_taught = static_cast<int>(taught.size());
      m.success = r.body.value("phase", "") == "succeeded";
      m.duration_s = static_cast<double>(r.tick) / Session::kTicksPerSecond;
      return m;
    }
  }
  throw TruncatedLog();
}

json reconstruct_state(const SessionLog& log, const Config& initial) {
  Config config = initial;
  GuidanceEngine engine(config.protocols);
  WorldState world;
  Pose robot{config.robot_start.x, config.robot_start.y, 0.0};
  Pose avatar{config.avatar_start.x, config.avatar_start.y, 0.0};
  std::vector<RegionSample> samples;
  json active = nullptr;
  std::string phase = to_string(Phase::Running);
  Tick tick = 0;

  for (const auto& r : log.records()) {
    tick = r.tick;
    if (r.kind == "engine") {
      EngineEvent ev;
      if (!wire::from_json(r.body, ev)) throw std::runtime_error("bad engine record");
      engine.apply_event(ev);
      if (const auto* d = std::get_if<events::ActionDispatched>(&ev)) active = d->action.name;
    } else if (r.kind == "world") {
      SensorValue v;
      if (!from_json_value(r.body["value"], v)) throw std::runtime_error("bad world record");
      const Percept p{r.body["key"].get<std::string>(), v};
      world.apply_percepts(std::span(&p, 1), r.tick);
    } else if (r.kind == "sim") {
      const auto kind = r.body.value("kind", "");
      if (kind == "robot_moved") {
        robot = {r.body["x"].get<double>(), r.body["y"].get<double>(), r.body["heading"].get<double>()};
      } else if (kind == "region_taught") {
        samples.push_back({r.body["x"].get<double>(), r.body["y"].get<double>(), r.body["label"].get<std::string>()});
      } else if (kind == "action_completed" || kind == "action_rejected") {
        active = nullptr;
      }
    } else if (r.kind == "client") {
      if (!r.body.contains("msg")) continue;
      const auto& msg = r.body["msg"];
      const auto& meta = r.body.contains("meta") ? r.body["meta"] : json::object();
      if (meta.contains("error") || meta.value("ignored", false)) continue;
      const std::string type = msg.value("type", "");
      if (type == "move_avatar" && meta.value("accepted", false)) {
        avatar.x = msg["x"].get<double>();
        avatar.y = msg["y"].get<double>();
      } else if (type == "define_behavior" && meta.value("accepted", false)) {
        const DefineOutcome res = apply_define(config, msg);
        if (!res.errors.empty()) throw std::runtime_error("logged behavior no longer validates");
        engine.append_behavior(res.protocol_id, res.behavior);
      } else if (type == "reset") {
        engine = GuidanceEngine(config.protocols);
        world = WorldState{};
        robot = {config.robot_start.x, config.robot_start.y, 0.0};
        avatar = {config.avatar_start.x, config.avatar_start.y, 0.0};
        samples.clear();
        active = nullptr;
        phase = to_string(Phase::Running);
      }
    } else if (r.kind == "server" && r.body.value("type", "") == "session_ended") {
      phase = r.body["phase"].get<std::string>();
    }
  }
  return json{{"tick", tick},
              {"phase", phase},
              {"engine", wire::engine_state(engine)},
              {"world", world_json(world)},
              {"robot", wire::to_json(robot)},
              {"avatar", wire::to_json(avatar)},
              {"samples", samples_json(samples)},
              {"active_action", active}};
}

// ---------------------------------------------------------------------------
// Scripts and replay

std::vector<ScriptEntry> parse_script(std::string_view text) {
  std::vector<ScriptEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("tick") || !j["tick"].is_number_integer() || !j.contains("msg"))
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": expected {\"tick\": N, \"msg\": {...}}");
    ScriptEntry e{j["tick"].get<Tick>(), j["msg"]};
    if (e.tick < 0 || (!out.empty() && e.tick < out.back().tick))
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": ticks must be non-decreasing");
    out.push_back(std::move(e));
  }
  return out;
}

ReplayResult replay(std::span<const ScriptEntry> script, const Config& config, SessionOptions options) {
  const auto errors = validate(config);
  if (!errors.empty()) throw std::invalid_argument("invalid config: " + errors.front().path + ": " + errors.front().message);

  Session session(config, options);
  std::size_t next = 0;
  while (session.phase() == Phase::Running) {
    while (next < script.size() && script[next].tick <= session.current_tick())
      session.handle_message(script[next++].msg);
    if (session.phase() != Phase::Running) break;
    session.tick();
  }
  ReplayResult res;
  res.final_state = session.state();
  res.log = session.log();
  res.metrics = compute_metrics(res.log, config);
  return res;
}

}  // namespace familiar
