#pragma once

// Deterministic continuous navigation benchmark: a point agent with a heading
// moves through a unit-square world with rectangular obstacles. Three discrete
// actions (forward, rotate left, rotate right); crashing stops movement and is
// penalized, entering the goal circle ends the episode.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "softlspi/rng.hpp"

namespace softlspi {

inline constexpr int kNumActions = 3;

enum class Action : int { Forward = 0, RotateLeft = 1, RotateRight = 2 };

inline constexpr std::array<Action, kNumActions> kAllActions{Action::Forward, Action::RotateLeft,
                                                             Action::RotateRight};

inline int index_of(Action a) { return static_cast<int>(a); }
/// Throws ContractError for ids outside [0, kNumActions).
Action action_from_index(int id);

/// Reduces an angle into [0, 2*pi).
double wrap_angle(double theta);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Segment {
  Point a;
  Point b;
};

/// Axis-aligned closed rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< heading in [0, 2*pi)

  Point position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

/// True iff the closed segments p1-p2 and q1-q2 share at least one point.
bool segments_intersect(Point p1, Point p2, Point q1, Point q2);

/// Immutable world geometry and reward constants.
class WorldSpec {
 public:
  WorldSpec(std::string name, std::vector<Rect> obstacles, Point goal_center, double goal_radius,
            double step_length, double goal_reward, double crash_penalty);

  const std::string& name() const { return name_; }
  const std::vector<Rect>& obstacles() const { return obstacles_; }
  /// Boundary walls of the unit square followed by the edges of every obstacle.
  const std::vector<Segment>& walls() const { return walls_; }
  Point goal_center() const { return goal_center_; }
  double goal_radius() const { return goal_radius_; }
  double step_length() const { return step_length_; }
  double rotation() const { return rotation_; }
  double goal_reward() const { return goal_reward_; }
  double crash_penalty() const { return crash_penalty_; }

  /// Strictly inside the unit square and outside every (closed) obstacle.
  bool is_free(Point p) const;
  bool in_goal(Point p) const;

 private:
  std::string name_;
  std::vector<Rect> obstacles_;
  std::vector<Segment> walls_;
  Point goal_center_;
  double goal_radius_;
  double step_length_;
  double rotation_;
  double goal_reward_;
  double crash_penalty_;
};

inline constexpr double kStepLength = 0.045;

/// "U" or "S" (case-insensitive); anything else is a ConfigError.
WorldSpec make_world(std::string_view name);

struct StepResult {
  Pose next_pose;
  double reward = 0.0;
  bool terminal = false;
  bool crashed = false;
};

StepResult step(const WorldSpec& world, const Pose& pose, Action action);

/// Uniform position over free space outside the goal circle, uniform heading.
/// Throws GeometryError after 10000 rejected position draws.
Pose sample_start(const WorldSpec& world, Rng& rng);

inline constexpr int kMaxStartAttempts = 10000;

struct Transition {
  Pose pose;
  Action action = Action::Forward;
  double reward = 0.0;
  Pose next_pose;
  bool terminal = false;
};

/// Temporally ordered experience. Transition t+1 continues from transition t
/// except after the indices listed in episode_boundaries (a reset followed).
struct Batch {
  std::string world;
  std::uint64_t seed = 0;
  double step_length = kStepLength;
  std::vector<Transition> transitions;
  std::vector<std::size_t> episode_boundaries;

  std::size_t size() const { return transitions.size(); }
  bool is_boundary(std::size_t t) const;
};

/// Uniform random actions from sample_start, resetting after each goal entry.
/// Deterministic in (world, n, seed).
Batch collect_random_walk(const WorldSpec& world, std::size_t n, std::uint64_t seed);

/// CSV with a '# world=.. seed=.. step_length=..' line, a column header and one
/// row per transition. Doubles are written with 17 significant digits.
void write_batch(const Batch& batch, std::ostream& out);
void write_batch(const Batch& batch, const std::filesystem::path& path);
Batch read_batch(std::istream& in);
Batch read_batch(const std::filesystem::path& path);

}  // namespace softlspi
