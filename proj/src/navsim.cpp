#include "softlspi/navsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <istream>

#include "softlspi/errors.hpp"
#include "text_util.hpp"

namespace softlspi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point p, Point q, Point r) {
  // r collinear with p-q; is it within the bounding box?
  return r.x >= std::min(p.x, q.x) && r.x <= std::max(p.x, q.x) && r.y >= std::min(p.y, q.y) &&
         r.y <= std::max(p.y, q.y);
}

std::vector<Segment> rect_edges(const Rect& r) {
  const Point a{r.x_min, r.y_min}, b{r.x_max, r.y_min}, c{r.x_max, r.y_max}, d{r.x_min, r.y_max};
  return {{a, b}, {b, c}, {c, d}, {d, a}};
}

}  // namespace

Action action_from_index(int id) {
  if (id < 0 || id >= kNumActions) throw ContractError("action id out of range: " + std::to_string(id));
  return static_cast<Action>(id);
}

double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

WorldSpec::WorldSpec(std::string name, std::vector<Rect> obstacles, Point goal_center,
                     double goal_radius, double step_length, double goal_reward,
                     double crash_penalty)
    : name_(std::move(name)),
      obstacles_(std::move(obstacles)),
      goal_center_(goal_center),
      goal_radius_(goal_radius),
      step_length_(step_length),
      rotation_(std::numbers::pi / 4.0),
      goal_reward_(goal_reward),
      crash_penalty_(crash_penalty) {
  if (!(step_length_ > 0.0)) throw ConfigError("step_length must be positive");
  if (!(goal_radius_ > 0.0)) throw ConfigError("goal_radius must be positive");
  walls_ = rect_edges(Rect{0.0, 1.0, 0.0, 1.0});
  for (const Rect& r : obstacles_) {
    if (!(r.x_min <= r.x_max && r.y_min <= r.y_max)) throw ConfigError("obstacle with inverted extent");
    const auto edges = rect_edges(r);
    walls_.insert(walls_.end(), edges.begin(), edges.end());
  }
}

bool WorldSpec::is_free(Point p) const {
  if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) return false;
  return std::none_of(obstacles_.begin(), obstacles_.end(),
                      [p](const Rect& r) { return r.contains(p); });
}

bool WorldSpec::in_goal(Point p) const {
  return std::hypot(p.x - goal_center_.x, p.y - goal_center_.y) <= goal_radius_;
}

WorldSpec make_world(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });
  if (key == "U") {
    return WorldSpec("U", {Rect{0.3, 0.7, 0.0, 0.6}}, Point{0.85, 0.15}, 0.1, kStepLength, 1.0, -1.0);
  }
  if (key == "S") {
    return WorldSpec("S", {Rect{0.3, 0.45, 0.0, 0.65}, Rect{0.6, 0.75, 0.35, 1.0}}, Point{0.9, 0.1},
                     0.1, kStepLength, 1.0, -10.0);
  }
  throw ConfigError("unknown world '" + std::string(name) + "' (expected U or S)");
}

StepResult step(const WorldSpec& world, const Pose& pose, Action action) {
  StepResult result{pose, 0.0, false, false};
  switch (action) {
    case Action::RotateLeft:
      result.next_pose.theta = wrap_angle(pose.theta + world.rotation());
      return result;
    case Action::RotateRight:
      result.next_pose.theta = wrap_angle(pose.theta - world.rotation());
      return result;
    case Action::Forward:
      break;
  }
  const Point from = pose.position();
  const Point to{from.x + world.step_length() * std::cos(pose.theta),
                 from.y + world.step_length() * std::sin(pose.theta)};
  bool blocked = !world.is_free(to);
  for (const Segment& wall : world.walls()) {
    if (blocked) break;
    blocked = segments_intersect(from, to, wall.a, wall.b);
  }
  if (blocked) {
    result.reward = world.crash_penalty();
    result.crashed = true;
    return result;
  }
  result.next_pose.x = to.x;
  result.next_pose.y = to.y;
  if (world.in_goal(to)) {
    result.reward = world.goal_reward();
    result.terminal = true;
  }
  return result;
}

Pose sample_start(const WorldSpec& world, Rng& rng) {
  for (int attempt = 0; attempt < kMaxStartAttempts; ++attempt) {
    const Point p{uniform01(rng), uniform01(rng)};
    if (world.is_free(p) && !world.in_goal(p)) {
      return Pose{p.x, p.y, uniform(rng, 0.0, kTwoPi)};
    }
  }
  throw GeometryError("world '" + world.name() + "': no free start position after " +
                      std::to_string(kMaxStartAttempts) + " attempts");
}

bool Batch::is_boundary(std::size_t t) const {
  return std::binary_search(episode_boundaries.begin(), episode_boundaries.end(), t);
}

Batch collect_random_walk(const WorldSpec& world, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractError("collect_random_walk: n must be >= 1");
  Rng rng(seed);
  Batch batch;
  batch.world = world.name();
  batch.seed = seed;
  batch.step_length = world.step_length();
  batch.transitions.reserve(n);
  Pose pose = sample_start(world, rng);
  for (std::size_t t = 0; t < n; ++t) {
    const Action action = action_from_index(static_cast<int>(uniform_index(rng, kNumActions)));
    const StepResult r = step(world, pose, action);
    batch.transitions.push_back({pose, action, r.reward, r.next_pose, r.terminal});
    if (r.terminal) {
      batch.episode_boundaries.push_back(t);
      pose = sample_start(world, rng);
    } else {
      pose = r.next_pose;
    }
  }
  return batch;
}

void write_batch(const Batch& batch, std::ostream& out) {
  using detail::format_double;
  out << "# world=" << batch.world << " seed=" << batch.seed
      << " step_length=" << format_double(batch.step_length) << '\n';
  out << "x,y,theta,action,reward,x_next,y_next,theta_next,terminal\n";
  for (const Transition& tr : batch.transitions) {
    out << format_double(tr.pose.x) << ',' << format_double(tr.pose.y) << ','
        << format_double(tr.pose.theta) << ',' << index_of(tr.action) << ','
        << format_double(tr.reward) << ',' << format_double(tr.next_pose.x) << ','
        << format_double(tr.next_pose.y) << ',' << format_double(tr.next_pose.theta) << ','
        << (tr.terminal ? 1 : 0) << '\n';
  }
}

void write_batch(const Batch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_batch(batch, out);
  if (!out) throw DataError("write failed: '" + path.string() + "'");
}

Batch read_batch(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty batch file");
  const auto meta = detail::parse_meta_line(line);
  Batch batch;
  batch.world = detail::require_meta(meta, "world");
  batch.seed = detail::parse_int<std::uint64_t>(detail::require_meta(meta, "seed"));
  batch.step_length = detail::parse_double(detail::require_meta(meta, "step_length"));
  if (!std::getline(in, line)) throw DataError("batch file missing column header");
  std::size_t t = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 9) throw DataError("batch row " + std::to_string(t) + ": expected 9 fields");
    Transition tr;
    tr.pose = {detail::parse_double(f[0]), detail::parse_double(f[1]), detail::parse_double(f[2])};
    const int action_id = detail::parse_int<int>(f[3]);
    if (action_id < 0 || action_id >= kNumActions)
      throw DataError("batch row " + std::to_string(t) + ": bad action id");
    tr.action = static_cast<Action>(action_id);
    tr.reward = detail::parse_double(f[4]);
    tr.next_pose = {detail::parse_double(f[5]), detail::parse_double(f[6]), detail::parse_double(f[7])};
    tr.terminal = detail::parse_int<int>(f[8]) != 0;
    if (tr.terminal) batch.episode_boundaries.push_back(t);
    batch.transitions.push_back(tr);
    ++t;
  }
  return batch;
}

Batch read_batch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open batch file '" + path.string() + "'");
  return read_batch(in);
}

}  // namespace softlspi
