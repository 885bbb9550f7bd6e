#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "familiar/geometry.hpp"
#include "familiar/grid_planner.hpp"
#include "familiar/guidance.hpp"
#include "familiar/region_learner.hpp"

namespace familiar {

struct Room {
  std::string name;
  Rect rect;
  bool operator==(const Room&) const = default;
};

struct Apartment {
  double width = 10.0;
  double height = 8.0;
  std::vector<Rect> walls;
  std::vector<Room> rooms;  // display metadata only

  Rect bounds() const { return {0.0, 0.0, width, height}; }
  const Room* find_room(const std::string& name) const;
  bool operator==(const Apartment&) const = default;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Point point() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

struct SimParams {
  double perception_radius = 5.0;
  double speed = 1.0;
  double tau = 3.0;
  bool operator==(const SimParams&) const = default;
};

inline constexpr double kAvatarRadius = 0.25;
inline constexpr double kMinAvatarRobotGap = 0.5;
inline constexpr double kFollowStandoff = 1.0;
inline constexpr double kArrivalTolerance = 0.1;

enum class MoveRejection { OutOfBounds, InsideWall, TooCloseToRobot };
const char* to_string(MoveRejection r);

struct MoveResult {
  std::optional<Pose> accepted;
  MoveRejection reason = MoveRejection::OutOfBounds;  // meaningful when !accepted
  bool ok() const { return accepted.has_value(); }
};

namespace sim_events {
struct RobotMoved {
  Pose pose;
  bool operator==(const RobotMoved&) const = default;
};
struct ActionCompleted {
  std::string action;
  bool operator==(const ActionCompleted&) const = default;
};
struct AvatarSighted {
  bool operator==(const AvatarSighted&) const = default;
};
struct AvatarLost {
  bool operator==(const AvatarLost&) const = default;
};
struct RobotSaid {
  std::string text;
  bool operator==(const RobotSaid&) const = default;
};
struct RegionTaught {
  RegionSample sample;
  bool operator==(const RegionTaught&) const = default;
};
}  // namespace sim_events

using SimEvent = std::variant<sim_events::RobotMoved, sim_events::ActionCompleted,
                              sim_events::AvatarSighted, sim_events::AvatarLost,
                              sim_events::RobotSaid, sim_events::RegionTaught>;

class SimError : public std::runtime_error {
 public:
  enum class Code { ExecutorBusy, UnknownAction, BadParam, EmptyLabel };
  SimError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Execution side of the scenario: apartment, robot, avatar, the region
/// learner, and the single low-level action currently running.
class Simulation {
 public:
  enum class ActionKind { Follow, Navigate, Say, Learn };

  struct ActiveAction {
    ActionKind kind = ActionKind::Say;
    ConcreteAction action;
    Point goal;         // Navigate
    std::string label;  // Learn
    bool operator==(const ActiveAction&) const = default;
  };

  Simulation(Apartment apartment, SimParams params, Point robot_start, Point avatar_start);

  const Apartment& apartment() const { return apartment_; }
  const SimParams& params() const { return params_; }
  const Pose& robot() const { return robot_; }
  const Pose& avatar() const { return avatar_; }
  const RegionLearner& learner() const { return learner_; }
  const std::optional<ActiveAction>& active_action() const { return active_; }
  Tick tick() const { return tick_; }
  /// Follow is running and has not been asked to stop.
  bool following() const { return active_ && active_->kind == ActionKind::Follow && !finishing_; }

  /// Teleports the avatar when the target is inside the bounds, clear of
  /// walls by the avatar radius, and not too close to the robot.
  MoveResult move_avatar(Point target);
  /// Checks a target without moving.
  MoveResult check_avatar_target(Point target) const;

  /// Pure Euclidean test; walls do not occlude. Boundary is inclusive.
  bool in_sight() const;

  std::vector<SimEvent> step(double dt);

  RegionSample teach_region(const std::string& label);

  /// Installs an action. follow/navigate/say/learn are known. learn stores
  /// the sample right away; the returned RegionTaught reports it.
  std::vector<SimEvent> dispatch_action(const ConcreteAction& action);

  /// Stops an open-ended action (follow); it reports ActionCompleted on the
  /// next step.
  void finish_action();

  /// Continues the clock of a previous simulation (session reset).
  void set_tick(Tick t) { tick_ = t; }

  bool operator==(const Simulation& o) const {
    return apartment_ == o.apartment_ && params_ == o.params_ && robot_ == o.robot_ &&
           avatar_ == o.avatar_ && learner_ == o.learner_ && active_ == o.active_ &&
           tick_ == o.tick_;
  }

 private:
  bool advance_along_path(double budget, double standoff, std::vector<SimEvent>& out);
  void replan(Point goal);

  Apartment apartment_;
  SimParams params_;
  Pose robot_;
  Pose avatar_;
  RegionLearner learner_;
  GridPlanner planner_;
  std::optional<ActiveAction> active_;
  bool finishing_ = false;
  bool sighted_ = false;
  Tick tick_ = 0;

  std::vector<Point> path_;  // remaining waypoints, path_[0] is the robot
  std::optional<Point> path_goal_;
};

}  // namespace familiar
