#include "familiar/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace familiar {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const ActionDef* Config::find_action(const std::string& name) const {
  for (const auto& a : actions)
    if (a.name == name) return &a;
  return nullptr;
}

const char* to_string(ConfigError::Code code) {
  using C = ConfigError::Code;
  switch (code) {
    case C::DuplicateId: return "DuplicateId";
    case C::UnknownReference: return "UnknownReference";
    case C::NoEntry: return "NoEntry";
    case C::MultipleEntries: return "MultipleEntries";
    case C::NoExit: return "NoExit";
    case C::PredecessorCycle: return "PredecessorCycle";
    case C::BadValue: return "BadValue";
    case C::SyntaxError: return "SyntaxError";
  }
  return "BadValue";
}

json to_json(const ConfigError& e) {
  return json{{"path", e.path}, {"code", to_string(e.code)}, {"message", e.message}};
}

const std::vector<std::string>& session_world_keys() {
  static const std::vector<std::string> keys = {
      "distance_to_avatar", "avatar_pose", "robot_pose", "regions_taught",
      "last_taught_label",  "battery_low", "last_intent"};
  return keys;
}

bool is_known_world_key(const Config& config, const std::string& key) {
  const auto& builtin = session_world_keys();
  if (std::find(builtin.begin(), builtin.end(), key) != builtin.end()) return true;
  if (key.size() > std::string_view(kRegionKeyPrefix).size() && key.starts_with(kRegionKeyPrefix))
    return true;
  for (const auto& intent : config.intents)
    if (std::find(intent.slots.begin(), intent.slots.end(), key) != intent.slots.end()) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Structural parsing

namespace {

using Code = ConfigError::Code;

std::string join(const std::string& path, std::string_view key) {
  return path + "/" + std::string(key);
}
std::string join(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

class Reader {
 public:
  explicit Reader(std::vector<ConfigError>& errors) : errors_(errors) {}

  void error(std::string path, Code code, std::string message) {
    errors_.push_back({std::move(path), code, std::move(message)});
  }

  const json* field(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      error(join(path, key), Code::BadValue, std::string("missing required key '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool string(const json& obj, const std::string& path, const char* key, std::string& out) {
    const json* j = field(obj, path, key);
    if (!j) return false;
    if (!j->is_string()) {
      error(join(path, key), Code::BadValue, "expected a string");
      return false;
    }
    out = j->get<std::string>();
    return true;
  }

  bool number(const json& obj, const std::string& path, const char* key, double& out) {
    const json* j = field(obj, path, key);
    if (!j) return false;
    if (!j->is_number()) {
      error(join(path, key), Code::BadValue, "expected a number");
      return false;
    }
    out = j->get<double>();
    return true;
  }

  bool integer(const json& obj, const std::string& path, const char* key, int& out) {
    const json* j = field(obj, path, key);
    if (!j) return false;
    if (!j->is_number_integer()) {
      error(join(path, key), Code::BadValue, "expected an integer");
      return false;
    }
    out = j->get<int>();
    return true;
  }

  bool boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    const json* j = field(obj, path, key);
    if (!j) return false;
    if (!j->is_boolean()) {
      error(join(path, key), Code::BadValue, "expected a boolean");
      return false;
    }
    out = j->get<bool>();
    return true;
  }

  const json* array(const json& obj, const std::string& path, const char* key) {
    const json* j = field(obj, path, key);
    if (!j) return nullptr;
    if (!j->is_array()) {
      error(join(path, key), Code::BadValue, "expected an array");
      return nullptr;
    }
    return j;
  }

  const json* object(const json& obj, const std::string& path, const char* key) {
    const json* j = field(obj, path, key);
    if (!j) return nullptr;
    if (!j->is_object()) {
      error(join(path, key), Code::BadValue, "expected an object");
      return nullptr;
    }
    return j;
  }

  bool is_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, Code::BadValue, "expected an object");
    return false;
  }

  std::vector<std::string> strings(const json& obj, const std::string& path, const char* key) {
    std::vector<std::string> out;
    const json* arr = array(obj, path, key);
    if (!arr) return out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      if (!(*arr)[i].is_string()) {
        error(join(join(path, key), i), Code::BadValue, "expected a string");
        continue;
      }
      out.push_back((*arr)[i].get<std::string>());
    }
    return out;
  }

  bool numbers(const json& j, const std::string& path, std::size_t count, std::vector<double>& out) {
    if (!j.is_array() || j.size() != count ||
        !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); })) {
      error(path, Code::BadValue, "expected an array of " + std::to_string(count) + " numbers");
      return false;
    }
    out.clear();
    for (const auto& v : j) out.push_back(v.get<double>());
    return true;
  }

  bool value(const json& obj, const std::string& path, const char* key, SensorValue& out) {
    const json* j = field(obj, path, key);
    if (!j) return false;
    if (!from_json_value(*j, out)) {
      error(join(path, key), Code::BadValue, "expected null, boolean, number, string or {\"text\": ...}");
      return false;
    }
    return true;
  }

 private:
  std::vector<ConfigError>& errors_;
};

void parse_sensor(Reader& rd, const json& j, const std::string& path, SemanticSensorDef& out) {
  if (!rd.is_object(j, path)) return;
  rd.string(j, path, "id", out.id);
  rd.string(j, path, "name", out.name);
  rd.string(j, path, "icon", out.icon);
  const json* ex = rd.object(j, path, "extractor");
  if (!ex) return;
  const std::string ex_path = join(path, "extractor");
  std::string kind;
  if (rd.string(*ex, ex_path, "kind", kind)) {
    if (kind == "copy") out.extractor.kind = Extractor::Kind::Copy;
    else if (kind == "predicate") out.extractor.kind = Extractor::Kind::Predicate;
    else if (kind == "count") out.extractor.kind = Extractor::Kind::Count;
    else rd.error(join(ex_path, "kind"), Code::BadValue, "unknown extractor kind '" + kind + "'");
  }
  rd.string(*ex, ex_path, "key", out.extractor.key);
  if (out.extractor.kind == Extractor::Kind::Predicate) {
    std::string op;
    if (rd.string(*ex, ex_path, "op", op) && !parse_compare_op(op, out.extractor.op))
      rd.error(join(ex_path, "op"), Code::BadValue, "unknown comparison '" + op + "'");
    rd.value(*ex, ex_path, "value", out.extractor.constant);
  }
}

void parse_intent(Reader& rd, const json& j, const std::string& path, IntentDef& out) {
  if (!rd.is_object(j, path)) return;
  rd.string(j, path, "name", out.name);
  out.patterns = rd.strings(j, path, "patterns");
  out.slots = rd.strings(j, path, "slots");
  rd.string(j, path, "example", out.example);
}

void parse_action_def(Reader& rd, const json& j, const std::string& path, ActionDef& out) {
  if (!rd.is_object(j, path)) return;
  rd.string(j, path, "name", out.name);
  out.params = rd.strings(j, path, "params");
}

Rect rect_from(const std::vector<double>& v) { return {v[0], v[1], v[2], v[3]}; }

void parse_apartment(Reader& rd, const json& j, const std::string& path, Config& out) {
  if (!rd.is_object(j, path)) return;
  std::vector<double> nums;
  if (const json* b = rd.field(j, path, "bounds"); b && rd.numbers(*b, join(path, "bounds"), 2, nums)) {
    out.apartment.width = nums[0];
    out.apartment.height = nums[1];
  }
  if (const json* walls = rd.array(j, path, "walls")) {
    for (std::size_t i = 0; i < walls->size(); ++i) {
      if (rd.numbers((*walls)[i], join(join(path, "walls"), i), 4, nums))
        out.apartment.walls.push_back(rect_from(nums));
    }
  }
  if (const json* rooms = rd.array(j, path, "rooms")) {
    for (std::size_t i = 0; i < rooms->size(); ++i) {
      const auto room_path = join(join(path, "rooms"), i);
      const json& r = (*rooms)[i];
      if (!rd.is_object(r, room_path)) continue;
      Room room;
      rd.string(r, room_path, "name", room.name);
      if (const json* rect = rd.field(r, room_path, "rect");
          rect && rd.numbers(*rect, join(room_path, "rect"), 4, nums))
        room.rect = rect_from(nums);
      out.apartment.rooms.push_back(std::move(room));
    }
  }
  if (const json* p = rd.field(j, path, "robot_start"); p && rd.numbers(*p, join(path, "robot_start"), 2, nums))
    out.robot_start = {nums[0], nums[1]};
  if (const json* p = rd.field(j, path, "avatar_start");
      p && rd.numbers(*p, join(path, "avatar_start"), 2, nums))
    out.avatar_start = {nums[0], nums[1]};
  rd.number(j, path, "perception_radius", out.sim.perception_radius);
  rd.number(j, path, "speed", out.sim.speed);
  rd.number(j, path, "tau", out.sim.tau);
  rd.number(j, path, "time_limit_s", out.time_limit_s);
}

bool parse_behavior(Reader& rd, const json& j, const std::string& path, Behavior& out) {
  if (!rd.is_object(j, path)) return false;
  rd.string(j, path, "id", out.id);
  rd.string(j, path, "title", out.title);
  rd.boolean(j, path, "entry", out.is_entry);
  rd.boolean(j, path, "exit", out.is_exit);
  out.predecessors = rd.strings(j, path, "predecessors");

  if (const json* pcs = rd.array(j, path, "preconditions")) {
    for (std::size_t i = 0; i < pcs->size(); ++i) {
      const auto pc_path = join(join(path, "preconditions"), i);
      const json& pj = (*pcs)[i];
      if (!rd.is_object(pj, pc_path)) continue;
      Precondition pc;
      rd.string(pj, pc_path, "sensor", pc.sensor_id);
      std::string op;
      if (rd.string(pj, pc_path, "op", op)) {
        if (op == "eq") pc.negated = false;
        else if (op == "ne") pc.negated = true;
        else rd.error(join(pc_path, "op"), Code::BadValue, "precondition op must be eq or ne");
      }
      rd.value(pj, pc_path, "value", pc.expected);
      out.preconditions.push_back(std::move(pc));
    }
  }

  if (const json* action = rd.object(j, path, "action")) {
    const auto a_path = join(path, "action");
    rd.string(*action, a_path, "name", out.action.name);
    if (const json* params = rd.object(*action, a_path, "params")) {
      for (const auto& [name, binding] : params->items()) {
        const auto p_path = join(join(a_path, "params"), name);
        if (binding.is_object() && binding.size() == 1 && binding.contains("static")) {
          SensorValue v;
          if (from_json_value(binding["static"], v)) out.action.params[name] = ParamBinding::fixed(v);
          else rd.error(join(p_path, "static"), Code::BadValue, "unsupported static value");
        } else if (binding.is_object() && binding.size() == 1 && binding.contains("from_world") &&
                   binding["from_world"].is_string()) {
          out.action.params[name] = ParamBinding::from_world(binding["from_world"].get<std::string>());
        } else {
          rd.error(p_path, Code::BadValue, "binding must be {\"static\": v} or {\"from_world\": key}");
        }
      }
    }
  }
  return true;
}

void parse_protocol(Reader& rd, const json& j, const std::string& path, InteractionProtocol& out) {
  if (!rd.is_object(j, path)) return;
  rd.string(j, path, "id", out.id);
  rd.string(j, path, "name", out.name);
  rd.integer(j, path, "priority", out.priority);
  if (const json* behaviors = rd.array(j, path, "behaviors")) {
    for (std::size_t i = 0; i < behaviors->size(); ++i) {
      Behavior b;
      parse_behavior(rd, (*behaviors)[i], join(join(path, "behaviors"), i), b);
      b.def_index = out.behaviors.size();
      out.behaviors.push_back(std::move(b));
    }
  }
}

// ---------------------------------------------------------------------------
// Semantic validation

template <class T, class KeyFn>
void check_unique(const std::vector<T>& items, const std::string& base, const char* field,
                  KeyFn key, std::vector<ConfigError>& errors) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string& k = key(items[i]);
    if (!seen.insert(k).second)
      errors.push_back({join(join(base, i), field), Code::DuplicateId, "duplicate id '" + k + "'"});
  }
}

void validate_point(const Config& c, Point p, const std::string& path, std::vector<ConfigError>& errors) {
  if (!c.apartment.bounds().contains(p)) {
    errors.push_back({path, Code::BadValue, "position outside the apartment bounds"});
    return;
  }
  for (const auto& w : c.apartment.walls) {
    if (w.contains(p)) {
      errors.push_back({path, Code::BadValue, "position inside a wall"});
      return;
    }
  }
}

void validate_protocol(const Config& c, const InteractionProtocol& ip, const std::string& path,
                       std::set<std::string>& behavior_ids, std::vector<ConfigError>& errors) {
  if (ip.priority < 0) errors.push_back({join(path, "priority"), Code::BadValue, "priority must be >= 0"});

  std::size_t entries = 0;
  std::size_t exits = 0;
  std::map<std::string, std::size_t> local;
  for (std::size_t i = 0; i < ip.behaviors.size(); ++i) {
    const Behavior& b = ip.behaviors[i];
    const auto b_path = join(join(path, "behaviors"), i);
    if (b.id.empty()) errors.push_back({join(b_path, "id"), Code::BadValue, "behavior id must be non-empty"});
    else if (!behavior_ids.insert(b.id).second)
      errors.push_back({join(b_path, "id"), Code::DuplicateId, "duplicate behavior id '" + b.id + "'"});
    local.emplace(b.id, i);
    if (b.is_entry && ++entries > 1)
      errors.push_back({join(b_path, "entry"), Code::MultipleEntries,
                        "protocol '" + ip.id + "' has more than one entry behavior"});
    if (b.is_exit) ++exits;
  }
  if (entries == 0) errors.push_back({path, Code::NoEntry, "protocol '" + ip.id + "' has no entry behavior"});
  if (exits == 0) errors.push_back({path, Code::NoExit, "protocol '" + ip.id + "' has no exit behavior"});

  for (std::size_t i = 0; i < ip.behaviors.size(); ++i) {
    const Behavior& b = ip.behaviors[i];
    const auto b_path = join(join(path, "behaviors"), i);

    for (std::size_t k = 0; k < b.predecessors.size(); ++k) {
      if (!local.contains(b.predecessors[k]))
        errors.push_back({join(join(b_path, "predecessors"), k), Code::UnknownReference,
                          "unknown predecessor '" + b.predecessors[k] + "'"});
    }

    for (std::size_t k = 0; k < b.preconditions.size(); ++k) {
      const auto& pc = b.preconditions[k];
      const auto pc_path = join(join(b_path, "preconditions"), k);
      const bool known = std::any_of(c.sensors.begin(), c.sensors.end(),
                                     [&](const auto& s) { return s.id == pc.sensor_id; });
      if (!known)
        errors.push_back({join(pc_path, "sensor"), Code::UnknownReference,
                          "unknown sensor '" + pc.sensor_id + "'"});
      if (pc.expected.is_label() && pc.expected.label_token().empty())
        errors.push_back({join(pc_path, "value"), Code::BadValue, "label value must be non-empty"});
    }

    const auto a_path = join(b_path, "action");
    const ActionDef* def = c.find_action(b.action.name);
    if (!def) {
      errors.push_back({join(a_path, "name"), Code::UnknownReference,
                        "unknown action '" + b.action.name + "'"});
      continue;
    }
    for (const auto& required : def->params) {
      if (!b.action.params.contains(required))
        errors.push_back({join(a_path, "params"), Code::BadValue,
                          "missing parameter '" + required + "' for action '" + def->name + "'"});
    }
    for (const auto& [name, binding] : b.action.params) {
      const auto p_path = join(join(a_path, "params"), name);
      if (std::find(def->params.begin(), def->params.end(), name) == def->params.end()) {
        errors.push_back({p_path, Code::UnknownReference,
                          "action '" + def->name + "' has no parameter '" + name + "'"});
      } else if (binding.kind == ParamBinding::Kind::FromWorldState &&
                 !is_known_world_key(c, binding.world_key)) {
        errors.push_back({join(p_path, "from_world"), Code::UnknownReference,
                          "unknown world key '" + binding.world_key + "'"});
      }
    }
  }

  // Predecessor cycles: iterative colouring DFS.
  enum Mark : unsigned char { White, Grey, Black };
  std::vector<Mark> mark(ip.behaviors.size(), White);
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    mark[i] = Grey;
    for (const auto& pred : ip.behaviors[i].predecessors) {
      auto it = local.find(pred);
      if (it == local.end()) continue;
      if (mark[it->second] == Grey) {
        errors.push_back({join(join(path, "behaviors"), i), Code::PredecessorCycle,
                          "predecessor cycle through '" + ip.behaviors[i].id + "' -> '" + pred + "'"});
      } else if (mark[it->second] == White) {
        visit(it->second);
      }
    }
    mark[i] = Black;
  };
  for (std::size_t i = 0; i < ip.behaviors.size(); ++i)
    if (mark[i] == White) visit(i);
}

}  // namespace

std::vector<ConfigError> validate(const Config& c) {
  std::vector<ConfigError> errors;
  if (c.version != 1) errors.push_back({"/version", Code::BadValue, "version must be 1"});

  check_unique(c.sensors, "/sensors", "id", [](const auto& s) -> const std::string& { return s.id; }, errors);
  for (std::size_t i = 0; i < c.sensors.size(); ++i) {
    const auto& s = c.sensors[i];
    const auto path = join("/sensors", i);
    if (s.id.empty()) errors.push_back({join(path, "id"), Code::BadValue, "sensor id must be non-empty"});
    if (s.icon.empty()) errors.push_back({join(path, "icon"), Code::BadValue, "icon must be non-empty"});
    const auto key_path = join(join(path, "extractor"), "key");
    if (s.extractor.kind == Extractor::Kind::Count) {
      if (s.extractor.key.empty())
        errors.push_back({key_path, Code::BadValue, "count prefix must be non-empty"});
    } else if (!is_known_world_key(c, s.extractor.key)) {
      errors.push_back({key_path, Code::UnknownReference, "unknown world key '" + s.extractor.key + "'"});
    }
  }

  check_unique(c.intents, "/intents", "name", [](const auto& i) -> const std::string& { return i.name; }, errors);
  for (std::size_t i = 0; i < c.intents.size(); ++i) {
    const auto& intent = c.intents[i];
    const auto path = join("/intents", i);
    if (intent.patterns.empty())
      errors.push_back({join(path, "patterns"), Code::BadValue, "intent needs at least one pattern"});
    std::set<std::string> declared(intent.slots.begin(), intent.slots.end());
    if (declared.size() != intent.slots.size())
      errors.push_back({join(path, "slots"), Code::DuplicateId, "duplicate slot name"});
    for (std::size_t p = 0; p < intent.patterns.size(); ++p) {
      const auto p_path = join(join(path, "patterns"), p);
      const auto used = pattern_slots(intent.patterns[p]);
      for (const auto& s : used)
        if (!declared.contains(s))
          errors.push_back({p_path, Code::UnknownReference, "undeclared slot '" + s + "'"});
      const std::set<std::string> used_set(used.begin(), used.end());
      const bool all_declared = std::all_of(used.begin(), used.end(),
                                            [&](const auto& s) { return declared.contains(s); });
      if (all_declared && (used_set != declared || used_set.size() != used.size()))
        errors.push_back({p_path, Code::BadValue, "pattern must capture every declared slot exactly once"});
    }
    if (!intent.patterns.empty()) {
      const auto parsed = parse_utterance(intent.example, c.intents);
      if (!parsed.recognized || parsed.intent != intent.name)
        errors.push_back({join(path, "example"), Code::BadValue,
                          "example does not parse to intent '" + intent.name + "'"});
    }
  }

  check_unique(c.actions, "/actions", "name", [](const auto& a) -> const std::string& { return a.name; }, errors);

  const auto& apt = c.apartment;
  if (!(apt.width > 0.0) || !(apt.height > 0.0))
    errors.push_back({"/apartment/bounds", Code::BadValue, "bounds must be positive"});
  for (std::size_t i = 0; i < apt.walls.size(); ++i) {
    const auto& w = apt.walls[i];
    if (!(w.w > 0.0) || !(w.h > 0.0) || !apt.bounds().contains(w))
      errors.push_back({join("/apartment/walls", i), Code::BadValue, "wall must be a positive rectangle within bounds"});
  }
  check_unique(apt.rooms, "/apartment/rooms", "name", [](const auto& r) -> const std::string& { return r.name; }, errors);
  for (std::size_t i = 0; i < apt.rooms.size(); ++i) {
    if (apt.rooms[i].name.empty())
      errors.push_back({join(join("/apartment/rooms", i), "name"), Code::BadValue, "room name must be non-empty"});
  }
  validate_point(c, c.robot_start, "/apartment/robot_start", errors);
  validate_point(c, c.avatar_start, "/apartment/avatar_start", errors);
  if (!(c.sim.perception_radius > 0.0))
    errors.push_back({"/apartment/perception_radius", Code::BadValue, "must be positive"});
  if (!(c.sim.speed > 0.0)) errors.push_back({"/apartment/speed", Code::BadValue, "must be positive"});
  if (!(c.sim.tau > 0.0)) errors.push_back({"/apartment/tau", Code::BadValue, "must be positive"});
  if (!(c.time_limit_s > 0.0))
    errors.push_back({"/apartment/time_limit_s", Code::BadValue, "must be positive"});

  check_unique(c.protocols, "/protocols", "id", [](const auto& p) -> const std::string& { return p.id; }, errors);
  std::set<std::string> behavior_ids;
  for (std::size_t i = 0; i < c.protocols.size(); ++i)
    validate_protocol(c, c.protocols[i], join("/protocols", i), behavior_ids, errors);
  return errors;
}

ConfigResult parse_config(std::string_view text) {
  ConfigResult result;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    result.errors.push_back({"", Code::SyntaxError, e.what()});
    return result;
  }

  Reader rd(result.errors);
  if (!rd.is_object(doc, "")) return result;

  Config c;
  c.apartment = Apartment{};
  rd.integer(doc, "", "version", c.version);
  if (const json* arr = rd.array(doc, "", "sensors")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      SemanticSensorDef s;
      parse_sensor(rd, (*arr)[i], join("/sensors", i), s);
      c.sensors.push_back(std::move(s));
    }
  }
  if (const json* arr = rd.array(doc, "", "intents")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      IntentDef intent;
      parse_intent(rd, (*arr)[i], join("/intents", i), intent);
      c.intents.push_back(std::move(intent));
    }
  }
  if (const json* arr = rd.array(doc, "", "actions")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      ActionDef a;
      parse_action_def(rd, (*arr)[i], join("/actions", i), a);
      c.actions.push_back(std::move(a));
    }
  }
  if (const json* apt = rd.field(doc, "", "apartment")) parse_apartment(rd, *apt, "/apartment", c);
  if (const json* arr = rd.array(doc, "", "protocols")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      InteractionProtocol ip;
      parse_protocol(rd, (*arr)[i], join("/protocols", i), ip);
      c.protocols.push_back(std::move(ip));
    }
  }

  auto semantic = validate(c);
  result.errors.insert(result.errors.end(), semantic.begin(), semantic.end());
  if (result.errors.empty()) result.config = std::move(c);
  return result;
}

ConfigResult load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigResult r;
    r.errors.push_back({"", Code::SyntaxError, "cannot read config file '" + path + "'"});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool behavior_from_json(const json& j, const std::string& path, Behavior& out,
                        std::vector<ConfigError>& errors) {
  Reader rd(errors);
  const auto before = errors.size();
  parse_behavior(rd, j, path, out);
  return errors.size() == before;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ojson value_json(const SensorValue& v) { return ojson::parse(to_json_value(v).dump()); }

ojson rect_json(const Rect& r) { return ojson::array({r.x, r.y, r.w, r.h}); }

}  // namespace

ojson behavior_to_json(const Behavior& b) {
  ojson j;
  j["id"] = b.id;
  j["title"] = b.title;
  j["entry"] = b.is_entry;
  j["exit"] = b.is_exit;
  j["predecessors"] = b.predecessors;
  j["preconditions"] = ojson::array();
  for (const auto& pc : b.preconditions) {
    ojson p;
    p["sensor"] = pc.sensor_id;
    p["op"] = pc.negated ? "ne" : "eq";
    p["value"] = value_json(pc.expected);
    j["preconditions"].push_back(std::move(p));
  }
  ojson action;
  action["name"] = b.action.name;
  action["params"] = ojson::object();
  for (const auto& [name, binding] : b.action.params) {
    ojson bj;
    if (binding.kind == ParamBinding::Kind::Static) bj["static"] = value_json(binding.value);
    else bj["from_world"] = binding.world_key;
    action["params"][name] = std::move(bj);
  }
  j["action"] = std::move(action);
  return j;
}

ojson to_json(const Config& c) {
  ojson root;
  root["version"] = c.version;

  root["sensors"] = ojson::array();
  for (const auto& s : c.sensors) {
    ojson sj;
    sj["id"] = s.id;
    sj["name"] = s.name;
    sj["icon"] = s.icon;
    ojson ex;
    switch (s.extractor.kind) {
      case Extractor::Kind::Copy: ex["kind"] = "copy"; break;
      case Extractor::Kind::Predicate: ex["kind"] = "predicate"; break;
      case Extractor::Kind::Count: ex["kind"] = "count"; break;
    }
    ex["key"] = s.extractor.key;
    if (s.extractor.kind == Extractor::Kind::Predicate) {
      ex["op"] = to_string(s.extractor.op);
      ex["value"] = value_json(s.extractor.constant);
    }
    sj["extractor"] = std::move(ex);
    root["sensors"].push_back(std::move(sj));
  }

  root["intents"] = ojson::array();
  for (const auto& i : c.intents) {
    ojson ij;
    ij["name"] = i.name;
    ij["patterns"] = i.patterns;
    ij["slots"] = i.slots;
    ij["example"] = i.example;
    root["intents"].push_back(std::move(ij));
  }

  root["actions"] = ojson::array();
  for (const auto& a : c.actions) {
    ojson aj;
    aj["name"] = a.name;
    aj["params"] = a.params;
    root["actions"].push_back(std::move(aj));
  }

  ojson apt;
  apt["bounds"] = ojson::array({c.apartment.width, c.apartment.height});
  apt["walls"] = ojson::array();
  for (const auto& w : c.apartment.walls) apt["walls"].push_back(rect_json(w));
  apt["rooms"] = ojson::array();
  for (const auto& r : c.apartment.rooms) {
    ojson rj;
    rj["name"] = r.name;
    rj["rect"] = rect_json(r.rect);
    apt["rooms"].push_back(std::move(rj));
  }
  apt["robot_start"] = ojson::array({c.robot_start.x, c.robot_start.y});
  apt["avatar_start"] = ojson::array({c.avatar_start.x, c.avatar_start.y});
  apt["perception_radius"] = c.sim.perception_radius;
  apt["speed"] = c.sim.speed;
  apt["tau"] = c.sim.tau;
  apt["time_limit_s"] = c.time_limit_s;
  root["apartment"] = std::move(apt);

  root["protocols"] = ojson::array();
  for (const auto& ip : c.protocols) {
    ojson pj;
    pj["id"] = ip.id;
    pj["name"] = ip.name;
    pj["priority"] = ip.priority;
    pj["behaviors"] = ojson::array();
    for (const auto& b : ip.behaviors) pj["behaviors"].push_back(behavior_to_json(b));
    root["protocols"].push_back(std::move(pj));
  }
  return root;
}

std::string serialize(const Config& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace familiar
