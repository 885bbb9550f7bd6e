#include "familiar/scenario.hpp"

#include <cmath>

namespace familiar {

const char* to_string(MoveRejection r) {
  switch (r) {
    case MoveRejection::OutOfBounds: return "OutOfBounds";
    case MoveRejection::InsideWall: return "InsideWall";
    case MoveRejection::TooCloseToRobot: return "TooCloseToRobot";
  }
  return "OutOfBounds";
}

const Room* Apartment::find_room(const std::string& name) const {
  for (const auto& r : rooms)
    if (r.name == name) return &r;
  return nullptr;
}

Simulation::Simulation(Apartment apartment, SimParams params, Point robot_start, Point avatar_start)
    : apartment_(std::move(apartment)),
      params_(params),
      robot_{robot_start.x, robot_start.y, 0.0},
      avatar_{avatar_start.x, avatar_start.y, 0.0},
      learner_(params.tau),
      planner_(apartment_.width, apartment_.height, apartment_.walls) {
  sighted_ = in_sight();
}

MoveResult Simulation::check_avatar_target(Point target) const {
  MoveResult res;
  if (!apartment_.bounds().contains(target)) {
    res.reason = MoveRejection::OutOfBounds;
    return res;
  }
  for (const auto& w : apartment_.walls) {
    if (w.distance_to(target) < kAvatarRadius) {
      res.reason = MoveRejection::InsideWall;
      return res;
    }
  }
  if (distance(target, robot_.point()) < kMinAvatarRobotGap) {
    res.reason = MoveRejection::TooCloseToRobot;
    return res;
  }
  res.accepted = Pose{target.x, target.y, avatar_.heading};
  return res;
}

MoveResult Simulation::move_avatar(Point target) {
  auto res = check_avatar_target(target);
  if (res.ok()) avatar_ = *res.accepted;
  return res;
}

bool Simulation::in_sight() const {
  const double dx = robot_.x - avatar_.x;
  const double dy = robot_.y - avatar_.y;
  return std::sqrt(dx * dx + dy * dy) <= params_.perception_radius;
}

void Simulation::replan(Point goal) {
  path_ = planner_.plan(robot_.point(), goal);
  path_goal_ = goal;
}

bool Simulation::advance_along_path(double budget, double standoff, std::vector<SimEvent>& out) {
  if (path_.size() < 2) return false;
  double travel = std::min(budget, path_length(path_) - standoff);
  if (travel <= 1e-12) return false;

  Point pos = path_[0];
  std::size_t seg = 1;
  double heading = robot_.heading;
  while (seg < path_.size() && travel > 0.0) {
    const Point target = path_[seg];
    const double len = distance(pos, target);
    if (len > 0.0) heading = std::atan2(target.y - pos.y, target.x - pos.x);
    if (len <= travel) {
      travel -= len;
      pos = target;
      ++seg;
    } else {
      const double t = travel / len;
      pos = {pos.x + (target.x - pos.x) * t, pos.y + (target.y - pos.y) * t};
      travel = 0.0;
    }
  }
  path_.erase(path_.begin(), path_.begin() + static_cast<std::ptrdiff_t>(seg - 1));
  path_[0] = pos;

  robot_ = {pos.x, pos.y, heading};
  out.emplace_back(sim_events::RobotMoved{robot_});
  return true;
}

std::vector<SimEvent> Simulation::step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  ++tick_;
  std::vector<SimEvent> out;

  auto complete = [&] {
    out.emplace_back(sim_events::ActionCompleted{active_->action.name});
    active_.reset();
    finishing_ = false;
    path_.clear();
    path_goal_.reset();
  };

  if (active_) {
    switch (active_->kind) {
      case ActionKind::Follow:
        if (finishing_) {
          complete();
        } else if (in_sight()) {
          if (path_goal_ != avatar_.point() || path_.empty()) replan(avatar_.point());
          advance_along_path(params_.speed * dt, kFollowStandoff, out);
        }
        break;
      case ActionKind::Navigate:
        if (finishing_) {
          complete();
          break;
        }
        if (path_goal_ != active_->goal || path_.empty()) replan(active_->goal);
        advance_along_path(params_.speed * dt, 0.0, out);
        if (distance(robot_.point(), active_->goal) <= kArrivalTolerance) complete();
        break;
      case ActionKind::Say:
        out.emplace_back(sim_events::RobotSaid{active_->action.param("text").to_display()});
        complete();
        break;
      case ActionKind::Learn:
        complete();
        break;
    }
  }

  const bool now = in_sight();
  if (now != sighted_) {
    if (now) out.emplace_back(sim_events::AvatarSighted{});
    else out.emplace_back(sim_events::AvatarLost{});
    sighted_ = now;
  }
  return out;
}

RegionSample Simulation::teach_region(const std::string& label) {
  if (label.empty()) throw SimError(SimError::Code::EmptyLabel, "empty region label");
  return learner_.add(robot_.x, robot_.y, label);
}

std::vector<SimEvent> Simulation::dispatch_action(const ConcreteAction& action) {
  if (active_) throw SimError(SimError::Code::ExecutorBusy, active_->action.name);

  ActiveAction next;
  next.action = action;
  std::vector<SimEvent> immediate;
  if (action.name == "follow") {
    next.kind = ActionKind::Follow;
  } else if (action.name == "navigate") {
    next.kind = ActionKind::Navigate;
    const auto& goal = action.param("goal");
    const Room* room = goal.is_label() ? apartment_.find_room(goal.label_token()) : nullptr;
    if (!room) throw SimError(SimError::Code::BadParam, "navigate goal must name a room");
    next.goal = room->rect.center();
  } else if (action.name == "say") {
    next.kind = ActionKind::Say;
  } else if (action.name == "learn") {
    next.kind = ActionKind::Learn;
    const auto& label = action.param("label");
    if (label.is_label()) next.label = label.label_token();
    else if (label.is_text()) next.label = label.text_value();
    if (next.label.empty()) throw SimError(SimError::Code::BadParam, "learn needs a non-empty label");
    immediate.emplace_back(sim_events::RegionTaught{teach_region(next.label)});
  } else {
    throw SimError(SimError::Code::UnknownAction, action.name);
  }
  active_ = std::move(next);
  finishing_ = false;
  path_.clear();
  path_goal_.reset();
  return immediate;
}

void Simulation::finish_action() {
  if (active_ && (active_->kind == ActionKind::Follow || active_->kind == ActionKind::Navigate))
    finishing_ = true;
}

}  // namespace familiar
