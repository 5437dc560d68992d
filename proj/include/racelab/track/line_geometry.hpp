#pragma once

#include <cmath>
#include <limits>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/track/raceline.hpp"

namespace racelab::track {

/// Position of a point relative to a reference line.
struct LineRelation {
  double s = 0.0;      // progress along the line, [0, s_total)
  double d_c = 0.0;    // unsigned cross-track distance
  double theta = 0.0;  // heading error, (-pi, pi]
  std::size_t segment_index = 0;
};

struct Projection {
  double s = 0.0;
  double distance = 0.0;
  Vec2 point;
  std::size_t segment = 0;  // segment from waypoint i to i+1 (last one closes the loop)
};

/// Maps a progress difference into (-s_total/2, s_total/2].
inline double wrap_progress(double ds, double s_total) {
  const double half = 0.5 * s_total;
  ds = std::fmod(ds, s_total);
  if (ds > half) ds -= s_total;
  if (ds <= -half) ds += s_total;
  return ds;
}

/// Orthogonal projection onto the nearest segment. Equidistant segments
/// resolve to the one with smaller s.
inline Projection project(Vec2 pos, const RaceLine& line) {
  const std::size_t n = line.size();
  if (n == 0) throw ParameterError("projection onto an empty line");
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (n == 1) {
    best.point = line.waypoints[0];
    best.distance = distance(pos, best.point);
    return best;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = line.waypoints[i];
    const Vec2 b = line.waypoints[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(pos - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double d = distance(pos, q);
    if (d < best.distance) {
      best.distance = d;
      best.point = q;
      best.segment = i;
      best.s = line.s[i] + t * std::sqrt(len2);
    }
  }
  if (best.s >= line.s_total) best.s -= line.s_total;
  return best;
}

inline double project_progress(Vec2 pos, const RaceLine& line) { return project(pos, line).s; }

inline double segment_heading(const RaceLine& line, std::size_t i) {
  const Vec2 d = line.waypoints[(i + 1) % line.size()] - line.waypoints[i];
  return std::atan2(d.y, d.x);
}

inline LineRelation line_relation(Vec2 pos, double heading, const RaceLine& line) {
  const auto p = project(pos, line);
  LineRelation rel;
  rel.s = p.s;
  rel.d_c = p.distance;
  rel.segment_index = p.segment;
  rel.theta = line.size() > 1 ? wrap_angle(heading - segment_heading(line, p.segment)) : 0.0;
  return rel;
}

/// Point on the line at progress s (taken modulo s_total) and the index of its segment.
inline std::pair<Vec2, std::size_t> point_at(const RaceLine& line, double s) {
  const std::size_t n = line.size();
  if (n == 0) throw ParameterError("point_at on an empty line");
  s = std::fmod(s, line.s_total);
  if (s < 0.0) s += line.s_total;
  auto it = std::upper_bound(line.s.begin(), line.s.end(), s);
  const std::size_t i = static_cast<std::size_t>(std::distance(line.s.begin(), it)) - 1;
  const Vec2 a = line.waypoints[i];
  const Vec2 b = line.waypoints[(i + 1) % n];
  const double len = distance(a, b);
  const double t = len > 0.0 ? (s - line.s[i]) / len : 0.0;
  return {a + (b - a) * t, i};
}

}  // namespace racelab::track
