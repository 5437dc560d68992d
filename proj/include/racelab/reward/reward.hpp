#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "racelab/error.hpp"
#include "racelab/track/line_geometry.hpp"

namespace racelab::reward {

enum class Variant { None, Distance, CTH, MinSteer };
enum class Reference { CenterLine, MinCurvature };
enum class Terminal { Crash, LapComplete };

struct RewardConfig {
  Variant variant = Variant::None;
  double beta_distance = 0.5;
  double beta_heading = 0.04;
  double beta_cross_track = 0.004;
  double beta_steering = 0.01;
  Reference reference = Reference::CenterLine;

  void validate() const {
    if (!(beta_distance >= 0 && beta_heading >= 0 && beta_cross_track >= 0 && beta_steering >= 0)) {
      throw ParameterError("reward weights must be >= 0");
    }
  }
};

/// Everything a reward needs about one planner step. Both relations are
/// taken against the line named by RewardConfig::reference.
struct StepContext {
  track::LineRelation prev_relation;
  track::LineRelation next_relation;
  double speed = 0.0;      // actual speed after the step
  double delta_ref = 0.0;  // commanded steering for the step
  std::optional<Terminal> terminal;
  double s_total = 1.0;      // closed length of the reference line
  double track_width = 1.0;  // w_left + w_right at the nearest centerline point
  double max_speed = 1.0;
  double max_steer = 1.0;
};

inline double terminal_reward(Terminal t) { return t == Terminal::Crash ? -1.0 : 1.0; }

inline double distance_reward(const StepContext& c, const RewardConfig& cfg) {
  return cfg.beta_distance * track::wrap_progress(c.next_relation.s - c.prev_relation.s, c.s_total) / c.s_total;
}

inline double cth_reward(const StepContext& c, const RewardConfig& cfg) {
  const auto& r = c.next_relation;
  return cfg.beta_heading * (c.speed / c.max_speed) * std::cos(r.theta) -
         cfg.beta_cross_track * (r.d_c / c.track_width);
}

inline double steering_reward(const StepContext& c, const RewardConfig& cfg) {
  return -cfg.beta_steering * std::abs(c.delta_ref) / c.max_steer;
}

inline double compute_reward(const StepContext& c, const RewardConfig& cfg) {
  if (c.terminal) return terminal_reward(*c.terminal);
  switch (cfg.variant) {
    case Variant::None: return 0.0;
    case Variant::Distance: return distance_reward(c, cfg);
    case Variant::CTH: return cth_reward(c, cfg);
    case Variant::MinSteer: return steering_reward(c, cfg);
  }
  return 0.0;
}

/// Magnitude bound on the non-terminal reward of one step. For the distance
/// variant it assumes progress along the line never outruns the distance
/// driven, which only holds while the car stays on the outside of the line.
inline double racing_bound(const RewardConfig& cfg, double step_seconds, double max_speed, double s_total) {
  switch (cfg.variant) {
    case Variant::None: return 0.0;
    case Variant::Distance: return cfg.beta_distance * step_seconds * max_speed / s_total;
    case Variant::CTH: return cfg.beta_heading + cfg.beta_cross_track;
    case Variant::MinSteer: return cfg.beta_steering;
  }
  return 0.0;
}

inline Variant parse_variant(std::string_view s) {
  if (s == "none") return Variant::None;
  if (s == "distance") return Variant::Distance;
  if (s == "cth") return Variant::CTH;
  if (s == "steer" || s == "steering") return Variant::MinSteer;
  throw ParameterError("unknown reward '" + std::string(s) + "' (none|distance|cth|steer)");
}

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::None: return "none";
    case Variant::Distance: return "distance";
    case Variant::CTH: return "cth";
    case Variant::MinSteer: return "steer";
  }
  return "?";
}

inline Reference parse_reference(std::string_view s) {
  if (s == "center") return Reference::CenterLine;
  if (s == "mincurve") return Reference::MinCurvature;
  throw ParameterError("unknown reference '" + std::string(s) + "' (center|mincurve)");
}

inline std::string_view to_string(Reference r) { return r == Reference::CenterLine ? "center" : "mincurve"; }

}  // namespace racelab::reward
