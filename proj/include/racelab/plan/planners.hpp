#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/sim/sensors.hpp"
#include "racelab/sim/vehicle.hpp"
#include "racelab/track/line_geometry.hpp"
#include "racelab/track/raceline.hpp"

namespace racelab::plan {

using sim::ActionCommand;
using sim::VehicleParams;
using sim::VehicleState;

inline constexpr std::size_t kScanBeams = 10;
inline constexpr std::size_t kObsSize = 4 + kScanBeams;

/// [v, delta, v_pf, delta_pf, scan 0..9], each scaled into [-1, 1].
using Observation = std::array<double, kObsSize>;

struct PolicyAction {
  double a_nn = 0.0;
};

// ---- pure pursuit --------------------------------------------------------

inline ActionCommand pure_pursuit(const VehicleState& s, const track::RaceLine& line, double lookahead,
                                  const VehicleParams& p) {
  if (line.empty()) throw ParameterError("pure pursuit: empty line");
  if (!(lookahead > 0.0)) throw ParameterError("pure pursuit: lookahead must be > 0");
  const auto here = track::project(s.position(), line);
  const auto [target, seg] = track::point_at(line, here.s + lookahead);
  const Vec2 d = target - s.position();
  const double alpha = wrap_angle(std::atan2(d.y, d.x) - s.psi);
  const double delta = std::atan(2.0 * p.wheelbase * std::sin(alpha) / lookahead);
  return {std::clamp(line.speeds[seg], 0.0, p.max_speed), std::clamp(delta, -p.max_steer, p.max_steer)};
}

// ---- follow the gap ------------------------------------------------------

struct FgmConfig {
  enum class Target { Center, Farthest };
  // Defaults were tuned on the bundled tracks with obstacles (see README).
  double bubble_radius = 0.4;     // m, converted to an angular window at the nearest range
  double max_speed = 5.0;         // speed straight ahead; 0 uses the vehicle limit
  double min_speed = 1.0;         // speed floor at full lock
  double free_threshold = 1.5;    // beams at or below this range are also treated as blocked
  Target target = Target::Center;
  double steer_gain = 1.0;        // steering per radian of target bearing
  double clearance_gain = 1.5;    // 1/s; caps speed at gain * free range ahead (0 disables)
  double front_half_angle = 0.2;  // rad, beams counted as "ahead"
  sim::LidarConfig lidar;
};

struct Gap {
  int first = 0;
  int last = -1;  // empty when last < first
  int width() const { return last - first + 1; }
  double center(const sim::LidarConfig& l) const {
    return 0.5 * (sim::beam_angle(first, l) + sim::beam_angle(last, l));
  }
};

namespace detail {

inline Gap widest_run(const std::vector<double>& r, const sim::LidarConfig& lidar) {
  const int n = static_cast<int>(r.size());
  Gap best;
  for (int k = 0; k < n;) {
    if (r[k] <= 0.0) {
      ++k;
      continue;
    }
    Gap g{k, k};
    while (g.last + 1 < n && r[g.last + 1] > 0.0) ++g.last;
    k = g.last + 1;
    if (best.width() <= 0 || g.width() > best.width()) {
      best = g;
    } else if (g.width() == best.width() && std::abs(g.center(lidar)) <= std::abs(best.center(lidar))) {
      best = g;  // equal width: nearer straight ahead, then the left one (later beams)
    }
  }
  return best;
}

}  // namespace detail

/// Masks a bubble around the nearest return, drops beams that are not clear
/// beyond the threshold and picks the widest run of what is left.
inline Gap find_gap(std::span<const double> scan, const FgmConfig& cfg) {
  const int n = static_cast<int>(scan.size());
  if (n < 2) throw ParameterError("follow the gap: scan needs >= 2 beams");
  sim::LidarConfig lidar = cfg.lidar;
  lidar.beams = n;

  std::vector<double> r(scan.begin(), scan.end());
  const double r_min = *std::min_element(r.begin(), r.end());
  if (r_min < lidar.max_range) {
    const double half = r_min > 0.0 ? std::atan(cfg.bubble_radius / r_min) : std::numbers::pi;
    for (int m = 0; m < n; ++m) {
      if (scan[m] != r_min) continue;
      for (int k = 0; k < n; ++k) {
        if (std::abs(sim::beam_angle(k, lidar) - sim::beam_angle(m, lidar)) <= half + 1e-12) r[k] = 0.0;
      }
    }
  }
  for (auto& x : r) {
    if (x <= cfg.free_threshold) x = 0.0;
  }
  return detail::widest_run(r, lidar);
}

inline ActionCommand follow_the_gap(std::span<const double> scan, const VehicleParams& p, const FgmConfig& cfg) {
  const Gap gap = find_gap(scan, cfg);
  if (gap.width() <= 0) return {0.0, 0.0};
  sim::LidarConfig lidar = cfg.lidar;
  lidar.beams = static_cast<int>(scan.size());

  double angle = gap.center(lidar);
  if (cfg.target == FgmConfig::Target::Farthest) {
    int best = gap.first;
    for (int k = gap.first; k <= gap.last; ++k) {
      if (scan[k] > scan[best]) best = k;
    }
    angle = sim::beam_angle(best, lidar);
  }
  const double delta = std::clamp(cfg.steer_gain * angle, -p.max_steer, p.max_steer);
  const double top = cfg.max_speed > 0.0 ? std::min(cfg.max_speed, p.max_speed) : p.max_speed;
  double v = top - (top - cfg.min_speed) * std::abs(delta) / p.max_steer;
  if (cfg.clearance_gain > 0.0) {
    double ahead = lidar.max_range;
    for (int k = 0; k < lidar.beams; ++k) {
      if (std::abs(sim::beam_angle(k, lidar)) <= cfg.front_half_angle) ahead = std::min(ahead, scan[k]);
    }
    v = std::min(v, std::max(cfg.min_speed, cfg.clearance_gain * ahead));
  }
  return {std::clamp(v, 0.0, p.max_speed), delta};
}

// ---- modification planner -----------------------------------------------

inline ActionCommand modification_plan(const ActionCommand& pf, PolicyAction a, const VehicleParams& p) {
  return {pf.v_ref, std::clamp(pf.delta_ref + a.a_nn * p.max_steer, -p.max_steer, p.max_steer)};
}

inline Observation build_observation(const VehicleState& s, const ActionCommand& pf, std::span<const double> scan,
                                     const VehicleParams& p, double max_range) {
  if (scan.size() != kScanBeams) throw ParameterError("observation expects a 10-beam scan");
  auto unit = [](double x) { return std::clamp(x, -1.0, 1.0); };
  Observation o{};
  o[0] = unit(s.v / p.max_speed);
  o[1] = unit(s.delta / p.max_steer);
  o[2] = unit(pf.v_ref / p.max_speed);
  o[3] = unit(pf.delta_ref / p.max_steer);
  for (std::size_t k = 0; k < kScanBeams; ++k) o[4 + k] = unit(scan[k] / max_range);
  return o;
}

}  // namespace racelab::plan
