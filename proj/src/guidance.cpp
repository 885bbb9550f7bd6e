#include "familiar/guidance.hpp"

#include <algorithm>
#include <tuple>

namespace familiar {

const char* to_string(PreconditionStatus s) {
  switch (s) {
    case PreconditionStatus::Unknown: return "unknown";
    case PreconditionStatus::Satisfied: return "satisfied";
    case PreconditionStatus::Unsatisfied: return "unsatisfied";
  }
  return "unknown";
}

const char* to_string(BehaviorStatus s) {
  switch (s) {
    case BehaviorStatus::Idle: return "idle";
    case BehaviorStatus::Executable: return "executable";
    case BehaviorStatus::Executing: return "executing";
    case BehaviorStatus::Finished: return "finished";
  }
  return "idle";
}

const char* to_string(ProtocolStatus s) {
  switch (s) {
    case ProtocolStatus::Inactive: return "inactive";
    case ProtocolStatus::Active: return "active";
    case ProtocolStatus::Suspended: return "suspended";
    case ProtocolStatus::Completed: return "completed";
  }
  return "inactive";
}

bool parse_status(std::string_view s, PreconditionStatus& out) {
  for (auto v : {PreconditionStatus::Unknown, PreconditionStatus::Satisfied,
                 PreconditionStatus::Unsatisfied}) {
    if (s == to_string(v)) {
      out = v;
      return true;
    }
  }
  return false;
}

bool parse_status(std::string_view s, BehaviorStatus& out) {
  for (auto v : {BehaviorStatus::Idle, BehaviorStatus::Executable, BehaviorStatus::Executing,
                 BehaviorStatus::Finished}) {
    if (s == to_string(v)) {
      out = v;
      return true;
    }
  }
  return false;
}

bool parse_status(std::string_view s, ProtocolStatus& out) {
  for (auto v : {ProtocolStatus::Inactive, ProtocolStatus::Active, ProtocolStatus::Suspended,
                 ProtocolStatus::Completed}) {
    if (s == to_string(v)) {
      out = v;
      return true;
    }
  }
  return false;
}

const SensorValue& ConcreteAction::param(const std::string& key) const {
  static const SensorValue kNone{};
  auto it = params.find(key);
  return it == params.end() ? kNone : it->second;
}

const Behavior* InteractionProtocol::find(const std::string& behavior_id) const {
  for (const auto& b : behaviors)
    if (b.id == behavior_id) return &b;
  return nullptr;
}

Behavior* InteractionProtocol::find(const std::string& behavior_id) {
  for (auto& b : behaviors)
    if (b.id == behavior_id) return &b;
  return nullptr;
}

GuidanceError::GuidanceError(Code code, std::string detail)
    : std::runtime_error([&] {
        switch (code) {
          case Code::ExecutorBusy: return "executor busy: " + detail;
          case Code::StaleSelection: return "stale selection: " + detail;
          case Code::NotExecuting: return "not executing: " + detail;
          case Code::MissingWorldKey: return "missing world key: " + detail;
          case Code::UnknownProtocol: return "unknown protocol: " + detail;
        }
        return detail;
      }()),
      code_(code),
      detail_(std::move(detail)) {}

GuidanceEngine::GuidanceEngine(std::vector<InteractionProtocol> protocols)
    : protocols_(std::move(protocols)) {
  for (auto& ip : protocols_) {
    for (std::size_t i = 0; i < ip.behaviors.size(); ++i) ip.behaviors[i].def_index = i;
  }
}

const InteractionProtocol* GuidanceEngine::find_protocol(const std::string& id) const {
  for (const auto& ip : protocols_)
    if (ip.id == id) return &ip;
  return nullptr;
}

InteractionProtocol* GuidanceEngine::find_protocol_mut(const std::string& id) {
  return const_cast<InteractionProtocol*>(std::as_const(*this).find_protocol(id));
}

const InteractionProtocol* GuidanceEngine::active_protocol() const {
  for (const auto& ip : protocols_)
    if (ip.status == ProtocolStatus::Active) return &ip;
  return nullptr;
}

InteractionProtocol* GuidanceEngine::owner_of(const std::string& behavior_id) {
  for (auto& ip : protocols_)
    if (ip.find(behavior_id)) return &ip;
  return nullptr;
}

namespace {

bool in_evaluation_scope(const InteractionProtocol& ip, const Behavior& b) {
  switch (ip.status) {
    case ProtocolStatus::Active:
    case ProtocolStatus::Suspended: return true;
    case ProtocolStatus::Inactive: return b.is_entry;
    case ProtocolStatus::Completed: return false;
  }
  return false;
}

bool predecessors_finished(const InteractionProtocol& ip, const Behavior& b) {
  return std::all_of(b.predecessors.begin(), b.predecessors.end(), [&](const std::string& id) {
    const Behavior* pred = ip.find(id);
    return pred && pred->status == BehaviorStatus::Finished;
  });
}

}  // namespace

std::vector<EngineEvent> GuidanceEngine::update_preconditions(const SensorSnapshot& snapshot) {
  std::vector<EngineEvent> out;
  for (auto& ip : protocols_) {
    for (auto& b : ip.behaviors) {
      const bool scoped = in_evaluation_scope(ip, b);
      bool all_satisfied = true;
      for (std::size_t i = 0; i < b.preconditions.size(); ++i) {
        auto& pc = b.preconditions[i];
        PreconditionStatus next = PreconditionStatus::Unknown;
        if (scoped) {
          next = pc.holds(snapshot.get(pc.sensor_id)) ? PreconditionStatus::Satisfied
                                                      : PreconditionStatus::Unsatisfied;
        }
        if (next != PreconditionStatus::Satisfied) all_satisfied = false;
        if (next != pc.status) {
          pc.status = next;
          out.emplace_back(events::PreconditionChanged{b.id, i, next});
        }
      }
      if (b.status != BehaviorStatus::Idle && b.status != BehaviorStatus::Executable) continue;
      const bool ready = scoped && all_satisfied && predecessors_finished(ip, b);
      const auto next = ready ? BehaviorStatus::Executable : BehaviorStatus::Idle;
      if (next != b.status) {
        b.status = next;
        out.emplace_back(events::BehaviorStatusChanged{b.id, next});
      }
    }
  }
  return out;
}

std::vector<Selection> GuidanceEngine::executable_set() const {
  std::vector<Selection> out;
  for (const auto& ip : protocols_) {
    // Behaviors are kept in definition order, so iteration order is def_index order.
    for (const auto& b : ip.behaviors)
      if (b.status == BehaviorStatus::Executable) out.push_back({ip.id, b.id});
  }
  return out;
}

std::optional<Selection> GuidanceEngine::select_next() const {
  auto has_executable = [](const InteractionProtocol& ip) {
    return std::any_of(ip.behaviors.begin(), ip.behaviors.end(),
                       [](const Behavior& b) { return b.status == BehaviorStatus::Executable; });
  };

  const InteractionProtocol* chosen = nullptr;
  const InteractionProtocol* active = active_protocol();
  if (active && has_executable(*active)) {
    const bool outranked = std::any_of(protocols_.begin(), protocols_.end(), [&](const auto& ip) {
      return &ip != active && ip.priority > active->priority && has_executable(ip);
    });
    if (!outranked) chosen = active;
  }
  if (!chosen) {
    // Highest priority; Suspended before Inactive; then config order (first wins).
    auto rank = [](const InteractionProtocol& ip) {
      return std::make_tuple(ip.priority, ip.status == ProtocolStatus::Suspended ? 1 : 0);
    };
    for (const auto& ip : protocols_) {
      if (!has_executable(ip)) continue;
      if (!chosen || rank(ip) > rank(*chosen)) chosen = &ip;
    }
  }
  if (!chosen) return std::nullopt;

  if (chosen->status == ProtocolStatus::Inactive) {
    for (const auto& b : chosen->behaviors)
      if (b.is_entry && b.status == BehaviorStatus::Executable) return Selection{chosen->id, b.id};
    return std::nullopt;
  }

  const Behavior* first = nullptr;
  for (const auto& b : chosen->behaviors) {
    if (b.status != BehaviorStatus::Executable) continue;
    if (chosen->last_finished &&
        std::find(b.predecessors.begin(), b.predecessors.end(), *chosen->last_finished) !=
            b.predecessors.end()) {
      return Selection{chosen->id, b.id};
    }
    if (!first) first = &b;
  }
  return Selection{chosen->id, first->id};
}

void GuidanceEngine::set_protocol_status(InteractionProtocol& ip, ProtocolStatus status,
                                         std::vector<EngineEvent>& out) {
  if (ip.status == status) return;
  ip.status = status;
  out.emplace_back(events::ProtocolStatusChanged{ip.id, status});
}

std::vector<EngineEvent> GuidanceEngine::begin_execution(const Selection& sel, WorldState& world) {
  if (executing_) throw GuidanceError(GuidanceError::Code::ExecutorBusy, executing_->behavior_id);

  InteractionProtocol* ip = find_protocol_mut(sel.protocol_id);
  Behavior* b = ip ? ip->find(sel.behavior_id) : nullptr;
  if (!b || b->status != BehaviorStatus::Executable)
    throw GuidanceError(GuidanceError::Code::StaleSelection, sel.behavior_id);

  // Resolve first so a missing key leaves the engine untouched.
  ConcreteAction action = resolve_action_params(*b, world);

  std::vector<EngineEvent> out;
  if (ip->status != ProtocolStatus::Active) {
    for (auto& other : protocols_) {
      if (other.status == ProtocolStatus::Active) {
        set_protocol_status(other, ProtocolStatus::Suspended, out);
        suspended_stack_.push_back(other.id);
      }
    }
    std::erase(suspended_stack_, ip->id);
    set_protocol_status(*ip, ProtocolStatus::Active, out);
  }

  b->status = BehaviorStatus::Executing;
  executing_ = sel;
  out.emplace_back(events::BehaviorStatusChanged{b->id, BehaviorStatus::Executing});
  out.emplace_back(events::ActionDispatched{b->id, std::move(action)});

  const bool consumes_intent =
      std::any_of(b->preconditions.begin(), b->preconditions.end(),
                  [](const Precondition& pc) { return pc.sensor_id == kLastIntentKey; });
  if (consumes_intent) {
    const std::string key = kLastIntentKey;
    world.clear_keys(std::span(&key, 1));
  }
  return out;
}

std::vector<EngineEvent> GuidanceEngine::complete_execution(const std::string& behavior_id) {
  if (!executing_ || executing_->behavior_id != behavior_id)
    throw GuidanceError(GuidanceError::Code::NotExecuting, behavior_id);

  InteractionProtocol* ip = find_protocol_mut(executing_->protocol_id);
  Behavior* b = ip->find(behavior_id);

  std::vector<EngineEvent> out;
  b->status = BehaviorStatus::Finished;
  ip->last_finished = b->id;
  executing_.reset();
  out.emplace_back(events::BehaviorStatusChanged{b->id, BehaviorStatus::Finished});

  if (!b->is_exit) return out;

  set_protocol_status(*ip, ProtocolStatus::Completed, out);
  for (auto& member : ip->behaviors) {
    for (std::size_t i = 0; i < member.preconditions.size(); ++i) {
      auto& pc = member.preconditions[i];
      if (pc.status != PreconditionStatus::Unknown) {
        pc.status = PreconditionStatus::Unknown;
        out.emplace_back(events::PreconditionChanged{member.id, i, pc.status});
      }
    }
    if (member.status != BehaviorStatus::Idle) {
      member.status = BehaviorStatus::Idle;
      out.emplace_back(events::BehaviorStatusChanged{member.id, BehaviorStatus::Idle});
    }
  }
  ip->last_finished.reset();
  set_protocol_status(*ip, ProtocolStatus::Inactive, out);

  if (!suspended_stack_.empty()) {
    InteractionProtocol* resumed = find_protocol_mut(suspended_stack_.back());
    suspended_stack_.pop_back();
    set_protocol_status(*resumed, ProtocolStatus::Active, out);
  }
  return out;
}

void GuidanceEngine::apply_event(const EngineEvent& event) {
  if (const auto* e = std::get_if<events::PreconditionChanged>(&event)) {
    if (auto* ip = owner_of(e->behavior_id)) {
      auto& pcs = ip->find(e->behavior_id)->preconditions;
      if (e->index < pcs.size()) pcs[e->index].status = e->status;
    }
  } else if (const auto* e = std::get_if<events::BehaviorStatusChanged>(&event)) {
    auto* ip = owner_of(e->behavior_id);
    if (!ip) return;
    ip->find(e->behavior_id)->status = e->status;
    if (e->status == BehaviorStatus::Executing) {
      executing_ = Selection{ip->id, e->behavior_id};
    } else if (e->status == BehaviorStatus::Finished) {
      if (executing_ && executing_->behavior_id == e->behavior_id) executing_.reset();
      ip->last_finished = e->behavior_id;
    }
  } else if (const auto* e = std::get_if<events::ProtocolStatusChanged>(&event)) {
    auto* ip = find_protocol_mut(e->protocol_id);
    if (!ip) return;
    ip->status = e->status;
    if (e->status == ProtocolStatus::Suspended) {
      suspended_stack_.push_back(ip->id);
    } else if (e->status == ProtocolStatus::Active) {
      std::erase(suspended_stack_, ip->id);
    } else if (e->status == ProtocolStatus::Inactive) {
      ip->last_finished.reset();
    }
  }
  // ActionDispatched carries no engine state.
}

void GuidanceEngine::append_behavior(const std::string& protocol_id, Behavior behavior) {
  InteractionProtocol* ip = find_protocol_mut(protocol_id);
  if (!ip) throw GuidanceError(GuidanceError::Code::UnknownProtocol, protocol_id);
  behavior.def_index = ip->behaviors.size();
  behavior.status = BehaviorStatus::Idle;
  for (auto& pc : behavior.preconditions) pc.status = PreconditionStatus::Unknown;
  ip->behaviors.push_back(std::move(behavior));
}

ConcreteAction resolve_action_params(const Behavior& behavior, const WorldState& world) {
  ConcreteAction action{behavior.action.name, {}};
  for (const auto& [name, binding] : behavior.action.params) {
    if (binding.kind == ParamBinding::Kind::Static) {
      action.params[name] = binding.value;
      continue;
    }
    const auto& v = world.get(binding.world_key);
    if (v.is_none()) throw GuidanceError(GuidanceError::Code::MissingWorldKey, binding.world_key);
    action.params[name] = v;
  }
  return action;
}

}  // namespace familiar
