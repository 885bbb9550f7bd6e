#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "familiar/perception.hpp"
#include "familiar/sensor_value.hpp"

namespace familiar {

enum class PreconditionStatus { Unknown, Satisfied, Unsatisfied };
enum class BehaviorStatus { Idle, Executable, Executing, Finished };
enum class ProtocolStatus { Inactive, Active, Suspended, Completed };

const char* to_string(PreconditionStatus s);
const char* to_string(BehaviorStatus s);
const char* to_string(ProtocolStatus s);
bool parse_status(std::string_view s, PreconditionStatus& out);
bool parse_status(std::string_view s, BehaviorStatus& out);
bool parse_status(std::string_view s, ProtocolStatus& out);

struct Precondition {
  std::string sensor_id;
  bool negated = false;  // false: equals, true: not_equals
  SensorValue expected;
  PreconditionStatus status = PreconditionStatus::Unknown;

  bool holds(const SensorValue& observed) const { return (observed == expected) != negated; }
  bool operator==(const Precondition&) const = default;
};

struct ParamBinding {
  enum class Kind { Static, FromWorldState };
  Kind kind = Kind::Static;
  SensorValue value;      // Static
  std::string world_key;  // FromWorldState

  static ParamBinding fixed(SensorValue v) { return {Kind::Static, std::move(v), {}}; }
  static ParamBinding from_world(std::string key) { return {Kind::FromWorldState, {}, std::move(key)}; }
  bool operator==(const ParamBinding&) const = default;
};

struct ActionSpec {
  std::string name;
  std::map<std::string, ParamBinding> params;
  bool operator==(const ActionSpec&) const = default;
};

/// An action with every parameter bound to a concrete value.
struct ConcreteAction {
  std::string name;
  std::map<std::string, SensorValue> params;

  const SensorValue& param(const std::string& key) const;
  bool operator==(const ConcreteAction&) const = default;
};

struct Behavior {
  std::string id;
  std::string title;
  bool is_entry = false;
  bool is_exit = false;
  std::vector<Precondition> preconditions;
  std::vector<std::string> predecessors;
  ActionSpec action;
  BehaviorStatus status = BehaviorStatus::Idle;
  std::size_t def_index = 0;

  bool operator==(const Behavior&) const = default;
};

struct InteractionProtocol {
  std::string id;
  std::string name;
  int priority = 0;
  std::vector<Behavior> behaviors;
  ProtocolStatus status = ProtocolStatus::Inactive;
  std::optional<std::string> last_finished;

  const Behavior* find(const std::string& behavior_id) const;
  Behavior* find(const std::string& behavior_id);
  bool operator==(const InteractionProtocol&) const = default;
};

struct Selection {
  std::string protocol_id;
  std::string behavior_id;
  bool operator==(const Selection&) const = default;
};

namespace events {
struct PreconditionChanged {
  std::string behavior_id;
  std::size_t index = 0;
  PreconditionStatus status{};
  bool operator==(const PreconditionChanged&) const = default;
};
struct BehaviorStatusChanged {
  std::string behavior_id;
  BehaviorStatus status{};
  bool operator==(const BehaviorStatusChanged&) const = default;
};
struct ProtocolStatusChanged {
  std::string protocol_id;
  ProtocolStatus status{};
  bool operator==(const ProtocolStatusChanged&) const = default;
};
struct ActionDispatched {
  std::string behavior_id;
  ConcreteAction action;
  bool operator==(const ActionDispatched&) const = default;
};
}  // namespace events

using EngineEvent = std::variant<events::PreconditionChanged, events::BehaviorStatusChanged,
                                 events::ProtocolStatusChanged, events::ActionDispatched>;

class GuidanceError : public std::runtime_error {
 public:
  enum class Code { ExecutorBusy, StaleSelection, NotExecuting, MissingWorldKey, UnknownProtocol };

  GuidanceError(Code code, std::string detail);
  Code code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Code code_;
  std::string detail_;
};

/// World key that carries the most recent recognized intent. Cleared when a
/// behavior guarded on it starts executing, so one utterance triggers once.
inline constexpr const char* kLastIntentKey = "last_intent";

/// Behavior Guidance: holds the interaction protocols, tracks their lifecycle
/// and decides which single behavior runs next.
///
/// All mutation goes through the operations below; each returns the events
/// describing the state changes it made, in the order they happened.
/// `apply_event` replays such a stream onto another engine.
class GuidanceEngine {
 public:
  GuidanceEngine() = default;
  explicit GuidanceEngine(std::vector<InteractionProtocol> protocols);

  const std::vector<InteractionProtocol>& protocols() const { return protocols_; }
  const std::optional<Selection>& executing() const { return executing_; }
  const std::vector<std::string>& suspended_stack() const { return suspended_stack_; }

  const InteractionProtocol* find_protocol(const std::string& id) const;
  const InteractionProtocol* active_protocol() const;

  /// Recomputes precondition and Idle/Executable statuses from `snapshot`.
  /// Behaviors of Active and Suspended protocols are evaluated, plus the entry
  /// behavior of each Inactive protocol; everything else reads Unknown.
  std::vector<EngineEvent> update_preconditions(const SensorSnapshot& snapshot);

  /// Executable behaviors in (protocol config order, definition order).
  std::vector<Selection> executable_set() const;

  /// Pure. Picks the protocol (active unless a strictly higher-priority one
  /// has work), then the behavior within it.
  std::optional<Selection> select_next() const;

  std::vector<EngineEvent> begin_execution(const Selection& sel, WorldState& world);
  std::vector<EngineEvent> complete_execution(const std::string& behavior_id);

  void apply_event(const EngineEvent& event);

  /// Appends a behavior defined at runtime; it starts Idle.
  void append_behavior(const std::string& protocol_id, Behavior behavior);

  bool operator==(const GuidanceEngine&) const = default;

 private:
  InteractionProtocol* find_protocol_mut(const std::string& id);
  InteractionProtocol* owner_of(const std::string& behavior_id);
  void set_protocol_status(InteractionProtocol& ip, ProtocolStatus status,
                           std::vector<EngineEvent>& out);

  std::vector<InteractionProtocol> protocols_;
  std::optional<Selection> executing_;
  std::vector<std::string> suspended_stack_;
};

/// Binds every action parameter: static values verbatim, dynamic ones read
/// from the current world state. Throws MissingWorldKey for absent keys.
ConcreteAction resolve_action_params(const Behavior& behavior, const WorldState& world);

}  // namespace familiar
