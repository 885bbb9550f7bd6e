#pragma once

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "familiar/config.hpp"
#include "familiar/guidance.hpp"
#include "familiar/nlu.hpp"
#include "familiar/perception.hpp"
#include "familiar/scenario.hpp"

namespace familiar {

enum class Phase { Running, TimedOut, Succeeded };
const char* to_string(Phase phase);

/// Interaction-level judgement of a chat command.
enum class CommandClass { Needed, Wrong, Unrecognized };
const char* to_string(CommandClass c);

struct Metrics {
  bool success = false;
  int regions_taught = 0;
  int wrong_commands = 0;
  int unrecognized_commands = 0;
  int out_of_sight_events = 0;
  double duration_s = 0.0;
  bool operator==(const Metrics&) const = default;
};
nlohmann::json to_json(const Metrics& m);

/// One timestamped record. kind is client | server | engine | sim | world.
struct LogRecord {
  Tick tick = 0;
  std::string kind;
  nlohmann::json body;
  bool operator==(const LogRecord&) const = default;
};

class SessionLog {
 public:
  void append(Tick tick, std::string kind, nlohmann::json body);
  const std::vector<LogRecord>& records() const { return records_; }
  LogRecord& at(std::size_t i) { return records_.at(i); }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// One compact JSON object per line.
  std::string export_ndjson() const;
  static SessionLog parse_ndjson(std::string_view text);

 private:
  std::vector<LogRecord> records_;
};

struct SessionOptions {
  bool dynamic_viz = true;
  bool visual_programming = true;
};

class TruncatedLog : public std::runtime_error {
 public:
  TruncatedLog() : std::runtime_error("log does not end with session_ended") {}
};

/// A live interaction: guidance engine, simulation and percept memory driven
/// by a fixed 10 Hz simulated clock. Every input and every state change is
/// appended to the log, stamped with the simulation tick.
class Session {
 public:
  static constexpr double kTickSeconds = 0.1;
  static constexpr double kTicksPerSecond = 10.0;

  explicit Session(Config config, SessionOptions options = {});

  /// Handles one client message (already parsed). Returns the replies.
  std::vector<nlohmann::json> handle_message(const nlohmann::json& msg);
  /// Parses one line of the wire protocol, then handles it.
  std::vector<nlohmann::json> handle_line(std::string_view line);

  /// Advances one tick: sim step, percepts, sensors, preconditions,
  /// selection, completion, goal check.
  std::vector<nlohmann::json> tick();

  /// Writes percepts directly into the world state (operator/test hook, e.g.
  /// battery_low). Logged like any other world change.
  void inject_percepts(std::span<const Percept> percepts);

  CommandClass classify_command(const ParseResult& parse) const;

  const Config& config() const { return config_; }
  const GuidanceEngine& engine() const { return engine_; }
  const Simulation& sim() const { return sim_; }
  const WorldState& world() const { return world_; }
  const SessionLog& log() const { return log_; }
  const SessionOptions& options() const { return options_; }
  Phase phase() const { return phase_; }
  Tick current_tick() const { return sim_.tick(); }
  double elapsed_s() const { return static_cast<double>(sim_.tick()) / kTicksPerSecond; }
  const std::vector<std::string>& goal() const { return goal_; }
  std::set<std::string> goal_labels_taught() const;

  /// Live counters; equal to compute_metrics over the log once it ends.
  Metrics metrics() const;

  /// Full state for clients (includes the config structure and flags).
  nlohmann::json snapshot() const;
  /// The state subset that the log alone can reconstruct.
  nlohmann::json state() const;

 private:
  void initialize();
  nlohmann::json make(std::string type, nlohmann::json fields = nlohmann::json::object());
  void emit(std::vector<nlohmann::json>& out, nlohmann::json msg);
  void record_world_diff(const std::map<std::string, WorldState::Entry>& before);
  void forward_engine_events(const std::vector<EngineEvent>& events, std::vector<nlohmann::json>& out);
  /// Logs and forwards sim events; returns true if one was ActionCompleted.
  bool forward_sim_events(const std::vector<SimEvent>& events, std::vector<nlohmann::json>& out);
  void publish_percepts(std::vector<nlohmann::json>& out);
  void refresh_sensors(std::vector<nlohmann::json>& out);
  void try_begin(std::vector<nlohmann::json>& out);
  void release_open_action();
  void end_session(Phase phase, std::vector<nlohmann::json>& out);

  std::vector<nlohmann::json> on_chat(const nlohmann::json& msg, nlohmann::json& meta);
  std::vector<nlohmann::json> on_move(const nlohmann::json& msg, nlohmann::json& meta);
  std::vector<nlohmann::json> on_define(const nlohmann::json& msg, nlohmann::json& meta);

  Config config_;
  SessionOptions options_;
  GuidanceEngine engine_;
  Simulation sim_;
  WorldState world_;
  SensorSnapshot sensors_;
  SessionLog log_;
  Phase phase_ = Phase::Running;
  std::vector<std::string> goal_;
  std::int64_t seq_ = 0;
  std::optional<std::string> last_failure_;
  bool quiet_ = false;  // during (re)initialization nothing is sent

  int wrong_commands_ = 0;
  int unrecognized_commands_ = 0;
  int out_of_sight_events_ = 0;
};

Metrics compute_metrics(const SessionLog& log, const Config& config);

/// Rebuilds `Session::state()` from the log and the config the session started with.
nlohmann::json reconstruct_state(const SessionLog& log, const Config& config);

struct ScriptEntry {
  Tick tick = 0;
  nlohmann::json msg;
};

/// NDJSON lines of {"tick": N, "msg": {...}}; ticks must be non-decreasing.
std::vector<ScriptEntry> parse_script(std::string_view text);

struct ReplayResult {
  nlohmann::json final_state;
  Metrics metrics;
  SessionLog log;
};

/// Runs the tick loop on simulated time only, injecting each message before
/// the tick whose index equals its timestamp. Stops when the session ends.
ReplayResult replay(std::span<const ScriptEntry> script, const Config& config, SessionOptions options = {});

}  // namespace familiar
