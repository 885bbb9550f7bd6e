#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef FAMILIAR_SOURCE_DIR
#error "FAMILIAR_SOURCE_DIR must point at the repository root"
#endif

namespace familiar::testing {

using nlohmann::json;

std::string source_path(const std::string& relative) { return std::string(FAMILIAR_SOURCE_DIR) + "/" + relative; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Config default_config() {
  auto res = load_config_file(source_path("configs/default.json"));
  if (!res.ok()) throw std::runtime_error("default config does not validate");
  return *res.config;
}

std::vector<ScriptEntry> golden_script() { return parse_script(read_text(source_path("scripts/golden.jsonl"))); }

// ---------------------------------------------------------------------------
// Selection oracle

namespace {

bool has_executable(const InteractionProtocol& ip) {
  for (const auto& b : ip.behaviors)
    if (b.status == BehaviorStatus::Executable) return true;
  return false;
}

int resume_rank(ProtocolStatus s) {
  switch (s) {
    case ProtocolStatus::Suspended: return 0;
    case ProtocolStatus::Inactive: return 1;
    default: return 2;
  }
}

}  // namespace

std::optional<Selection> oracle_select(const std::vector<InteractionProtocol>& ips) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < ips.size(); ++i)
    if (has_executable(ips[i])) candidates.push_back(i);
  if (candidates.empty()) return std::nullopt;

  // p is preferred over q.
  auto beats = [&](std::size_t p, std::size_t q) {
    const auto& a = ips[p];
    const auto& b = ips[q];
    if (a.status == ProtocolStatus::Active) return a.priority >= b.priority;
    if (b.status == ProtocolStatus::Active) return a.priority > b.priority;
    if (a.priority != b.priority) return a.priority > b.priority;
    if (resume_rank(a.status) != resume_rank(b.status)) return resume_rank(a.status) < resume_rank(b.status);
    return p < q;
  };

  std::optional<std::size_t> chosen;
  for (std::size_t p : candidates) {
    bool wins = true;
    for (std::size_t q : candidates)
      if (q != p && !beats(p, q)) wins = false;
    if (wins) {
      if (chosen) throw std::logic_error("oracle: two winners");
      chosen = p;
    }
  }
  if (!chosen) throw std::logic_error("oracle: no winner");

  const auto& ip = ips[*chosen];
  if (ip.status == ProtocolStatus::Inactive) {
    for (const auto& b : ip.behaviors)
      if (b.is_entry) return Selection{ip.id, b.id};
    throw std::logic_error("oracle: inactive IP without entry");
  }

  // Scan by position: def_index equals position in a freshly built engine.
  if (ip.last_finished) {
    for (const auto& b : ip.behaviors) {
      if (b.status != BehaviorStatus::Executable) continue;
      for (const auto& pred : b.predecessors)
        if (pred == *ip.last_finished) return Selection{ip.id, b.id};
    }
  }
  for (const auto& b : ip.behaviors)
    if (b.status == BehaviorStatus::Executable) return Selection{ip.id, b.id};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Engine enumeration

namespace {

// All consistent single-IP states for `m` behaviors and the given priorities.
// Behavior j may only have earlier behaviors as predecessors (acyclic); b0 is
// the entry, the last behavior the exit.
std::vector<InteractionProtocol> ip_states(int m, const std::vector<int>& priorities) {
  std::vector<InteractionProtocol> out;
  // predecessor masks: behavior j chooses a subset of {0..j-1}
  std::vector<std::vector<int>> structures{{}};
  for (int j = 0; j < m; ++j) {
    std::vector<std::vector<int>> next;
    for (const auto& s : structures)
      for (int mask = 0; mask < (1 << j); ++mask) {
        auto t = s;
        t.push_back(mask);
        next.push_back(t);
      }
    structures = std::move(next);
  }

  const BehaviorStatus kinds[] = {BehaviorStatus::Idle, BehaviorStatus::Executable, BehaviorStatus::Finished};
  int combos = 1;
  for (int j = 0; j < m; ++j) combos *= 3;

  for (const auto& preds : structures) {
    InteractionProtocol base;
    base.name = "ip";
    for (int j = 0; j < m; ++j) {
      Behavior b;
      b.id = "b" + std::to_string(j);
      b.is_entry = j == 0;
      b.is_exit = j == m - 1;
      for (int k = 0; k < j; ++k)
        if (preds[j] & (1 << k)) b.predecessors.push_back("b" + std::to_string(k));
      b.def_index = static_cast<std::size_t>(j);
      base.behaviors.push_back(b);
    }

    for (int prio : priorities) {
      // Inactive: only the entry may be Executable.
      for (auto entry : {BehaviorStatus::Idle, BehaviorStatus::Executable}) {
        auto ip = base;
        ip.priority = prio;
        ip.status = ProtocolStatus::Inactive;
        ip.behaviors[0].status = entry;
        out.push_back(ip);
      }
      for (auto st : {ProtocolStatus::Active, ProtocolStatus::Suspended}) {
        for (int c = 0; c < combos; ++c) {
          auto ip = base;
          ip.priority = prio;
          ip.status = st;
          int code = c;
          for (int j = 0; j < m; ++j) {
            ip.behaviors[j].status = kinds[code % 3];
            code /= 3;
          }
          bool consistent = true;
          bool any_finished = false;
          for (int j = 0; j < m; ++j) {
            const auto s = ip.behaviors[j].status;
            if (s == BehaviorStatus::Finished) any_finished = true;
            if (s == BehaviorStatus::Idle) continue;
            for (int k = 0; k < j; ++k)
              if ((preds[j] & (1 << k)) && ip.behaviors[k].status != BehaviorStatus::Finished) consistent = false;
          }
          if (!consistent || !any_finished) continue;
          // last_finished: a Finished behavior no other Finished behavior depends on
          for (int j = 0; j < m; ++j) {
            if (ip.behaviors[j].status != BehaviorStatus::Finished) continue;
            bool is_pred_of_finished = false;
            for (int k = j + 1; k < m; ++k)
              if ((preds[k] & (1 << j)) && ip.behaviors[k].status == BehaviorStatus::Finished) is_pred_of_finished = true;
            if (is_pred_of_finished) continue;
            auto with_last = ip;
            with_last.last_finished = ip.behaviors[j].id;
            out.push_back(with_last);
          }
        }
      }
    }
  }
  return out;
}

void rename(InteractionProtocol& ip, std::size_t index) {
  ip.id = "ip" + std::to_string(index);
  const std::string prefix = ip.id + ".";
  for (auto& b : ip.behaviors) {
    b.id = prefix + b.id;
    for (auto& p : b.predecessors) p = prefix + p;
  }
  if (ip.last_finished) ip.last_finished = prefix + *ip.last_finished;
}

}  // namespace

std::size_t enumerate_engines(const std::function<void(const std::vector<InteractionProtocol>&)>& visit) {
  std::size_t visited = 0;
  auto product = [&](const std::vector<InteractionProtocol>& options, std::size_t n) {
    std::vector<InteractionProtocol> current;
    std::function<void(int)> rec = [&](int active_count) {
      if (current.size() == n) {
        visit(current);
        ++visited;
        return;
      }
      for (const auto& opt : options) {
        const int a = active_count + (opt.status == ProtocolStatus::Active ? 1 : 0);
        if (a > 1) continue;
        current.push_back(opt);
        rename(current.back(), current.size() - 1);
        rec(a);
        current.pop_back();
      }
    };
    rec(0);
  };

  auto up_to = [](int max_m, const std::vector<int>& prios) {
    std::vector<InteractionProtocol> all;
    for (int m = 1; m <= max_m; ++m) {
      auto s = ip_states(m, prios);
      all.insert(all.end(), s.begin(), s.end());
    }
    return all;
  };

  // Exhaustive: empty engine, 1 and 2 IPs of up to 3 behaviors, priorities 0..2.
  visit({});
  ++visited;
  const auto wide = up_to(3, {0, 1, 2});
  product(wide, 1);
  product(wide, 2);
  // Exhaustive: 3 IPs of up to 2 behaviors, priorities 0..1.
  product(up_to(2, {0, 1}), 3);
  // Seeded sample of 3 IPs x 3 behaviors.
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> pick(0, wide.size() - 1);
  for (int i = 0; i < 50000; ++i) {
    std::vector<InteractionProtocol> ips;
    int active = 0;
    while (ips.size() < 3) {
      auto ip = wide[pick(rng)];
      if (ip.status == ProtocolStatus::Active && active == 1) continue;
      active += ip.status == ProtocolStatus::Active;
      rename(ip, ips.size());
      ips.push_back(std::move(ip));
    }
    visit(ips);
    ++visited;
  }
  return visited;
}

// ---------------------------------------------------------------------------
// k-NN oracle

kernels::NearestResult brute_nearest(const std::vector<double>& xs, const std::vector<double>& ys, double px,
                                     double py) {
  kernels::NearestResult best;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double d2 = dx * dx + dy * dy;
    if (!best.found() || d2 < best.dist2) best = {i, d2};
  }
  return best;
}

std::optional<std::string> brute_classify(const std::vector<RegionSample>& samples, double tau, Point p) {
  std::optional<std::size_t> best;
  double best_d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = std::hypot(samples[i].x - p.x, samples[i].y - p.y);
    if (!best || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  if (!best || best_d > tau) return std::nullopt;
  return samples[*best].label;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng) { return uniform_int(rng, 0, 1) == 1; }

SensorValue random_value(std::mt19937_64& rng) {
  switch (uniform_int(rng, 0, 3)) {
    case 0: return coin(rng);
    case 1: return uniform(rng, -10.0, 10.0);
    case 2: return SensorValue::label("tok" + std::to_string(uniform_int(rng, 0, 9)));
    default: return SensorValue::text("free text \"" + std::to_string(uniform_int(rng, 0, 99)) + "\"");
  }
}

}  // namespace

Config random_valid_config(std::mt19937_64& rng) {
  Config c;
  c.version = 1;

  // Sensors over session world keys.
  const auto& keys = session_world_keys();
  const int n_sensors = uniform_int(rng, 1, 6);
  for (int i = 0; i < n_sensors; ++i) {
    SemanticSensorDef s;
    s.id = "sensor_" + std::to_string(i);
    s.name = "Sensor " + std::to_string(i);
    s.icon = coin(rng) ? "eye" : "chat";
    switch (uniform_int(rng, 0, 2)) {
      case 0:
        s.extractor.kind = Extractor::Kind::Copy;
        s.extractor.key = keys[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(keys.size()) - 1))];
        break;
      case 1:
        s.extractor.kind = Extractor::Kind::Predicate;
        s.extractor.key = "distance_to_avatar";
        s.extractor.op = static_cast<CompareOp>(uniform_int(rng, 0, 3));
        s.extractor.constant = uniform(rng, 0.0, 8.0);
        break;
      default:
        s.extractor.kind = Extractor::Kind::Count;
        s.extractor.key = kRegionKeyPrefix;
        break;
    }
    c.sensors.push_back(s);
  }

  // Intents with disjoint leading words so every example parses to its own intent.
  const int n_intents = uniform_int(rng, 1, 4);
  for (int i = 0; i < n_intents; ++i) {
    IntentDef d;
    d.name = "intent_" + std::to_string(i);
    const std::string word = "cmd" + std::to_string(i);
    if (coin(rng)) {
      d.slots = {"slot_" + std::to_string(i)};
      d.patterns = {word + " to {slot_" + std::to_string(i) + "}", "please " + word + " {slot_" + std::to_string(i) + "} now"};
      d.example = word + " to the garden";
    } else {
      d.patterns = {word + " go"};
      d.example = word + " go";
    }
    c.intents.push_back(d);
  }

  c.actions = {{"follow", {"target"}}, {"navigate", {"goal"}}, {"say", {"text"}}, {"learn", {"label"}}};
  const int n_extra = uniform_int(rng, 0, 2);
  for (int i = 0; i < n_extra; ++i) {
    ActionDef a{"custom_" + std::to_string(i), {}};
    for (int k = 0; k < uniform_int(rng, 0, 3); ++k) a.params.push_back("p" + std::to_string(k));
    c.actions.push_back(a);
  }

  // Apartment: walls hug the left edge, starts stay to the right of them.
  c.apartment.width = uniform(rng, 8.0, 16.0);
  c.apartment.height = uniform(rng, 6.0, 12.0);
  const int n_walls = uniform_int(rng, 0, 3);
  for (int i = 0; i < n_walls; ++i) {
    const double w = uniform(rng, 0.1, 2.0);
    const double h = uniform(rng, 0.1, c.apartment.height / 4);
    c.apartment.walls.push_back({uniform(rng, 0.0, 2.0), uniform(rng, 0.0, c.apartment.height - h), w, h});
  }
  const int n_rooms = uniform_int(rng, 0, 3);
  for (int i = 0; i < n_rooms; ++i)
    c.apartment.rooms.push_back({"room_" + std::to_string(i), {uniform(rng, 0, 4), uniform(rng, 0, 4), uniform(rng, 1, 4), uniform(rng, 1, 2)}});
  c.robot_start = {uniform(rng, 5.0, c.apartment.width), uniform(rng, 0.0, c.apartment.height)};
  c.avatar_start = {uniform(rng, 5.0, c.apartment.width), uniform(rng, 0.0, c.apartment.height)};
  c.sim.perception_radius = uniform(rng, 0.5, 10.0);
  c.sim.speed = uniform(rng, 0.1, 3.0);
  c.sim.tau = uniform(rng, 0.5, 5.0);
  c.time_limit_s = static_cast<double>(uniform_int(rng, 10, 3600));

  std::vector<std::string> world_keys = keys;
  for (const auto& d : c.intents)
    for (const auto& s : d.slots) world_keys.push_back(s);

  const int n_ips = uniform_int(rng, 0, 3);
  for (int i = 0; i < n_ips; ++i) {
    InteractionProtocol ip;
    ip.id = "ip_" + std::to_string(i);
    ip.name = "Protocol " + std::to_string(i);
    ip.priority = uniform_int(rng, 0, 9);
    const int m = uniform_int(rng, 1, 4);
    for (int j = 0; j < m; ++j) {
      Behavior b;
      b.id = ip.id + "_b" + std::to_string(j);
      b.title = "Behavior " + std::to_string(j) + (coin(rng) ? " (été)" : "");
      b.is_entry = j == 0;
      b.is_exit = j == m - 1 || (j > 0 && coin(rng));
      b.def_index = static_cast<std::size_t>(j);
      for (int k = 0; k < j; ++k)
        if (coin(rng)) b.predecessors.push_back(ip.id + "_b" + std::to_string(k));
      for (int k = 0; k < uniform_int(rng, 0, 2); ++k) {
        Precondition pc;
        pc.sensor_id = c.sensors[static_cast<std::size_t>(uniform_int(rng, 0, n_sensors - 1))].id;
        pc.negated = coin(rng);
        pc.expected = random_value(rng);
        b.preconditions.push_back(pc);
      }
      const auto& action = c.actions[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(c.actions.size()) - 1))];
      b.action.name = action.name;
      for (const auto& p : action.params) {
        if (coin(rng))
          b.action.params[p] = ParamBinding::fixed(random_value(rng));
        else
          b.action.params[p] = ParamBinding::from_world(world_keys[static_cast<std::size_t>(
              uniform_int(rng, 0, static_cast<int>(world_keys.size()) - 1))]);
      }
      ip.behaviors.push_back(b);
    }
    c.protocols.push_back(ip);
  }
  return c;
}

std::vector<ScriptEntry> random_script(std::mt19937_64& rng, const Config& config, Tick horizon) {
  std::vector<std::string> phrases{"hello", "blargh", "stop", "what can you do", "we arrived", "here we are"};
  for (const auto& r : config.apartment.rooms) {
    phrases.push_back("learn the region " + r.name);
    phrases.push_back("this is the " + r.name);
  }
  phrases.push_back("learn the region attic");

  std::vector<ScriptEntry> out;
  Tick t = 0;
  while (true) {
    t += uniform_int(rng, 0, 25);
    if (t >= horizon) break;
    json msg;
    switch (uniform_int(rng, 0, 9)) {
      case 0: case 1: case 2: case 3:
        msg = {{"type", "chat"}, {"text", phrases[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(phrases.size()) - 1))]}};
        break;
      case 4: case 5: case 6: case 7:
        msg = {{"type", "move_avatar"},
               {"x", std::round(uniform(rng, -0.5, config.apartment.width + 0.5) * 10) / 10},
               {"y", std::round(uniform(rng, -0.5, config.apartment.height + 0.5) * 10) / 10}};
        break;
      case 8:
        msg = {{"type", "get_snapshot"}};
        break;
      default:
        msg = coin(rng) ? json{{"type", "bogus"}} : json{{"type", "chat"}};
        break;
    }
    out.push_back({t, msg});
  }
  return out;
}

const std::vector<Defect>& seeded_defects() {
  static const std::vector<Defect> defects{
      {"version", [](json& j) { j["version"] = 2; }},
      {"duplicate sensor id", [](json& j) { j["sensors"][1]["id"] = j["sensors"][0]["id"]; }},
      {"empty icon", [](json& j) { j["sensors"][2]["icon"] = ""; }},
      {"unknown extractor key", [](json& j) { j["sensors"][3]["extractor"]["key"] = "no_such_key"; }},
      {"intent without patterns", [](json& j) { j["intents"][3]["patterns"] = json::array(); }},
      {"example not understood", [](json& j) { j["intents"][4]["example"] = "xyzzy plugh"; }},
      {"wall outside bounds", [](json& j) { j["apartment"]["walls"][0] = {9.0, 7.0, 5.0, 5.0}; }},
      {"robot start outside", [](json& j) { j["apartment"]["robot_start"] = {50.0, 50.0}; }},
      {"zero radius", [](json& j) { j["apartment"]["perception_radius"] = 0.0; }},
      {"zero speed", [](json& j) { j["apartment"]["speed"] = 0.0; }},
      {"negative tau", [](json& j) { j["apartment"]["tau"] = -1.0; }},
      {"negative time limit", [](json& j) { j["apartment"]["time_limit_s"] = -5.0; }},
      {"negative priority", [](json& j) { j["protocols"][0]["priority"] = -1; }},
      {"unknown predecessor", [](json& j) { j["protocols"][0]["behaviors"][1]["predecessors"] = {"b9"}; }},
      {"second entry", [](json& j) { j["protocols"][0]["behaviors"][2]["entry"] = true; }},
      {"unknown precondition sensor", [](json& j) { j["protocols"][0]["behaviors"][0]["preconditions"][0]["sensor"] = "nope"; }},
      {"unknown action", [](json& j) { j["protocols"][0]["behaviors"][2]["action"]["name"] = "dance"; }},
      {"no exit", [](json& j) { j["protocols"][1]["behaviors"][0]["exit"] = false; }},
      {"predecessor cycle", [](json& j) { j["protocols"][0]["behaviors"][0]["predecessors"] = {"confirm"}; }},
  };
  return defects;
}

int count_executing(const GuidanceEngine& engine) {
  int n = 0;
  for (const auto& ip : engine.protocols())
    for (const auto& b : ip.behaviors)
      if (b.status == BehaviorStatus::Executing) ++n;
  return n;
}

}  // namespace familiar::testing
