#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "racelab/learn/transition.hpp"
#include "racelab/plan/planners.hpp"
#include "racelab/reward/reward.hpp"
#include "racelab/sim/obstacles.hpp"
#include "racelab/sim/sensors.hpp"
#include "racelab/sim/vehicle.hpp"
#include "racelab/track/track.hpp"
#include "racelab/util/numfmt.hpp"

namespace racelab::sim {

struct EnvConfig {
  VehicleParams vehicle;
  LidarConfig lidar;
  double dt = 0.01;
  int planner_period = 10;  // physics steps per planner decision
  double timeout = 60.0;    // s
  double footprint = 0.15;  // collision disc radius, m
  bool obstacles = false;
  SpawnRules spawn;

  void validate() const {
    vehicle.validate();
    if (!(dt > 0.0) || planner_period < 1 || !(timeout > 0.0) || !(footprint > 0.0)) {
      throw ParameterError("env: dt, planner_period, timeout and footprint must be > 0");
    }
    if (lidar.beams != static_cast<int>(plan::kScanBeams)) throw ParameterError("env: lidar must have 10 beams");
  }
};

/// What a planner returns for one decision. Learned planners also report the
/// observation they acted on and their raw action so the episode can log a
/// transition.
struct Decision {
  ActionCommand cmd;
  std::optional<plan::Observation> obs;
  plan::PolicyAction action;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual void reset() {}
  virtual Decision decide(const VehicleState& s, const std::vector<double>& scan) = 0;
  /// Observation of a state without acting on it; used for the final transition.
  virtual std::optional<plan::Observation> observe(const VehicleState&, const std::vector<double>&) const {
    return std::nullopt;
  }
};

enum class Terminal { Crash, LapComplete, Timeout };

inline std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::Crash: return "crash";
    case Terminal::LapComplete: return "complete";
    case Terminal::Timeout: return "timeout";
  }
  return "?";
}

struct EpisodeOutcome {
  Terminal terminal = Terminal::Timeout;
  double lap_time = 0.0;               // physics steps * dt; meaningful for completed laps
  std::vector<VehicleState> trajectory;  // every physics step, starting with the spawn state
  std::size_t step_count = 0;            // physics steps
};

struct LogRow {
  VehicleState state;
  double reward = 0.0;
};

struct EpisodeResult {
  EpisodeOutcome outcome;
  std::vector<learn::Transition> transitions;
  std::vector<LogRow> log;  // one row per planner step, state after the step
  std::vector<Obstacle> obstacles;
  double cumulative_reward = 0.0;
  std::size_t decisions = 0;
  double max_cross_track = 0.0;  // against the reward reference line, over all physics steps
};

using TransitionCallback = std::function<void(const learn::Transition&)>;

inline VehicleState spawn_state(const track::Centerline& c) {
  const Vec2 d = c.points[1] - c.points[0];
  VehicleState s;
  s.x = c.points[0].x;
  s.y = c.points[0].y;
  s.psi = std::atan2(d.y, d.x);
  return s;
}

namespace detail {

/// Start line: the centerline normal at point 0, spanning the local widths.
struct StartLine {
  Vec2 origin, tangent, normal;
  double w_left = 0.0, w_right = 0.0;

  explicit StartLine(const track::Centerline& c)
      : origin(c.points[0]),
        tangent(normalized(c.points[1] - c.points.back())),
        normal(left_of(tangent)),
        w_left(c.w_left[0]),
        w_right(c.w_right[0]) {}

  bool crossed_forward(Vec2 a, Vec2 b) const {
    const double da = dot(a - origin, tangent), db = dot(b - origin, tangent);
    if (!(da < 0.0 && db >= 0.0)) return false;
    const Vec2 hit = a + (b - a) * (da / (da - db));
    const double lat = dot(hit - origin, normal);
    return lat <= w_left && lat >= -w_right;
  }
};

inline double width_near(const track::Centerline& c, Vec2 p, const track::Projection& on_center) {
  const std::size_t i = on_center.segment, j = (i + 1) % c.size();
  return distance(p, c.points[i]) <= distance(p, c.points[j]) ? c.width(i) : c.width(j);
}

}  // namespace detail

/// Runs one lap attempt. Physics advances at dt; the planner is asked every
/// planner_period steps and a reward is computed per decision.
template <class Rng>
EpisodeResult run_episode(const track::Track& track, Planner& planner, const reward::RewardConfig& rcfg,
                          const EnvConfig& cfg, Rng& rng, const TransitionCallback& on_transition = {}) {
  cfg.validate();
  EpisodeResult res;
  if (cfg.obstacles) res.obstacles = spawn_obstacles(rng, track.center, cfg.spawn);
  planner.reset();

  const auto& ref = rcfg.reference == reward::Reference::CenterLine ? track.center_line : track.min_curve_line;
  const auto& center = track.center_line;
  const detail::StartLine start(track.center);
  const auto max_steps = static_cast<std::size_t>(std::llround(cfg.timeout / cfg.dt));

  VehicleState s = spawn_state(track.center);
  res.outcome.trajectory.push_back(s);
  double progress = 0.0;  // accumulated along the centerline
  double s_center = track::project(s.position(), center).s;
  std::vector<double> scan = scan_lidar(s, track.grid, res.obstacles, cfg.lidar);
  std::optional<learn::Transition> pending;

  while (true) {
    const auto rel_prev = track::line_relation(s.position(), s.psi, ref);
    Decision dec = planner.decide(s, scan);
    const ActionCommand cmd = clamp_command(dec.cmd, cfg.vehicle);
    if (pending && dec.obs) {
      pending->next_obs = *dec.obs;
      if (on_transition) on_transition(*pending);
      res.transitions.push_back(*pending);
      pending.reset();
    }

    std::optional<Terminal> term;
    for (int k = 0; k < cfg.planner_period && !term; ++k) {
      const VehicleState prev = s;
      s = step_dynamics(s, cmd, cfg.vehicle, cfg.dt);
      ++res.outcome.step_count;
      res.outcome.trajectory.push_back(s);
      const auto on_center = track::project(s.position(), center);
      progress += track::wrap_progress(on_center.s - s_center, center.s_total);
      s_center = on_center.s;
      res.max_cross_track = std::max(res.max_cross_track, track::project(s.position(), ref).distance);
      if (check_collision(s, track.grid, res.obstacles, cfg.footprint)) {
        term = Terminal::Crash;
      } else if (progress >= 0.5 * center.s_total && start.crossed_forward(prev.position(), s.position())) {
        term = Terminal::LapComplete;
      } else if (res.outcome.step_count >= max_steps) {
        term = Terminal::Timeout;
      }
    }
    ++res.decisions;

    reward::StepContext ctx;
    ctx.prev_relation = rel_prev;
    ctx.next_relation = track::line_relation(s.position(), s.psi, ref);
    ctx.speed = s.v;
    ctx.delta_ref = cmd.delta_ref;
    ctx.s_total = ref.s_total;
    ctx.track_width = detail::width_near(track.center, s.position(), track::project(s.position(), center));
    ctx.max_speed = cfg.vehicle.max_speed;
    ctx.max_steer = cfg.vehicle.max_steer;
    if (term == Terminal::Crash) ctx.terminal = reward::Terminal::Crash;
    if (term == Terminal::LapComplete) ctx.terminal = reward::Terminal::LapComplete;
    const double r = reward::compute_reward(ctx, rcfg);
    res.cumulative_reward += r;
    res.log.push_back({s, r});

    scan = scan_lidar(s, track.grid, res.obstacles, cfg.lidar);
    if (dec.obs) {
      // a timeout cuts the lap short without the state being terminal, so it keeps bootstrapping
      pending = learn::Transition{*dec.obs, dec.action, r, {}, term == Terminal::Crash || term == Terminal::LapComplete};
    }
    if (term) {
      if (pending) {
        pending->next_obs = planner.observe(s, scan).value_or(pending->obs);
        if (on_transition) on_transition(*pending);
        res.transitions.push_back(*pending);
      }
      res.outcome.terminal = *term;
      res.outcome.lap_time = static_cast<double>(res.outcome.step_count) * cfg.dt;
      return res;
    }
  }
}

inline std::string format_trajectory_csv(const EpisodeResult& r) {
  std::string out = "t,x,y,psi,v,delta,reward\n";
  for (const auto& row : r.log) {
    const auto& s = row.state;
    out += util::shortest(s.t) + ',' + util::shortest(s.x) + ',' + util::shortest(s.y) + ',' +
           util::shortest(s.psi) + ',' + util::shortest(s.v) + ',' + util::shortest(s.delta) + ',' +
           util::shortest(row.reward) + '\n';
  }
  return out;
}

}  // namespace racelab::sim
