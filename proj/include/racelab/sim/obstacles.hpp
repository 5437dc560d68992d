#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/track/centerline.hpp"
#include "racelab/track/grid.hpp"
#include "racelab/track/line_geometry.hpp"

namespace racelab::sim {

/// Axis-aligned square obstacle.
struct Obstacle {
  Vec2 center;
  double side = 0.6;

  bool contains(Vec2 p) const {
    const double h = 0.5 * side;
    return std::abs(p.x - center.x) <= h && std::abs(p.y - center.y) <= h;
  }

  /// Euclidean distance from p to the square (0 inside).
  double distance_to(Vec2 p) const {
    const double h = 0.5 * side;
    const double dx = std::max(std::abs(p.x - center.x) - h, 0.0);
    const double dy = std::max(std::abs(p.y - center.y) - h, 0.0);
    return std::hypot(dx, dy);
  }

  /// Entry distance of a ray into the square (slab test), or +inf when missed.
  double ray_hit(Vec2 from, double angle) const {
    if (contains(from)) return 0.0;
    const double h = 0.5 * side;
    const double d[2] = {std::cos(angle), std::sin(angle)};
    const double o[2] = {from.x, from.y};
    const double lo[2] = {center.x - h, center.y - h};
    const double hi[2] = {center.x + h, center.y + h};
    double t_in = 0.0;
    double t_out = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) {
      if (d[k] == 0.0) {
        if (o[k] < lo[k] || o[k] > hi[k]) return std::numeric_limits<double>::infinity();
        continue;
      }
      double t0 = (lo[k] - o[k]) / d[k];
      double t1 = (hi[k] - o[k]) / d[k];
      if (t0 > t1) std::swap(t0, t1);
      t_in = std::max(t_in, t0);
      t_out = std::min(t_out, t1);
    }
    return t_in <= t_out ? t_in : std::numeric_limits<double>::infinity();
  }

  bool operator==(const Obstacle&) const = default;
};

struct SpawnRules {
  int min_count = 3;
  int max_count = 4;
  double side = 0.6;
  double min_separation = 2.0;   // arc length between obstacles, m
  double start_clearance = 1.0;  // arc length from the start line, m
  double min_gap = 0.5;          // free lateral gap left on at least one side, m
  int max_attempts = 1000;
};

/// Places obstacles along the centerline. The count is uniform over
/// [min_count, max_count]; each obstacle sits at a uniformly drawn arc
/// position, shifted sideways by a uniform fraction of the local width.
template <class Rng>
std::vector<Obstacle> spawn_obstacles(Rng& rng, const track::Centerline& center, const SpawnRules& rules) {
  const double length = center.length();
  if (center.size() < 3 || !(length > 0.0)) throw ParameterError("spawn: invalid centerline");
  std::uniform_int_distribution<int> count_dist(rules.min_count, rules.max_count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int count = count_dist(rng);

  std::vector<Obstacle> out;
  std::vector<double> placed_s;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > rules.max_attempts) {
      throw SpawnError("spawn: constraints unsatisfiable after " + std::to_string(rules.max_attempts) + " attempts");
    }
    const auto i = static_cast<std::size_t>(unit(rng) * static_cast<double>(center.size())) % center.size();
    const double s = center.s[i];
    const double lateral = unit(rng);  // fraction of the width, measured from the right edge
    const double offset = -center.w_right[i] + lateral * center.width(i);

    if (std::min(s, length - s) < rules.start_clearance) continue;
    const bool crowded = std::any_of(placed_s.begin(), placed_s.end(), [&](double o) {
      return std::abs(track::wrap_progress(s - o, length)) < rules.min_separation;
    });
    if (crowded) continue;
    const Vec2 n = center.normals[i];
    const double half_extent = 0.5 * rules.side * (std::abs(n.x) + std::abs(n.y));
    const double gap_left = center.w_left[i] - (offset + half_extent);
    const double gap_right = center.w_right[i] - (half_extent - offset);
    if (std::max(gap_left, gap_right) < rules.min_gap) continue;

    out.push_back({center.points[i] + n * offset, rules.side});
    placed_s.push_back(s);
  }
  return out;
}

/// Range to the first occupied cell or obstacle face along a ray, capped at max_range.
inline double ray_range(const track::OccupancyGrid& grid, const std::vector<Obstacle>& obstacles, Vec2 from,
                        double angle, double max_range) {
  double r = track::cast_ray(grid, from, angle, max_range);
  for (const auto& o : obstacles) r = std::min(r, o.ray_hit(from, angle));
  return r;
}

}  // namespace racelab::sim
