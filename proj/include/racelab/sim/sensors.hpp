#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/sim/obstacles.hpp"
#include "racelab/sim/vehicle.hpp"
#include "racelab/track/grid.hpp"

namespace racelab::sim {

struct LidarConfig {
  int beams = 10;
  double fov = std::numbers::pi;
  double max_range = 4.0;
};

inline double beam_angle(int k, const LidarConfig& cfg) {
  return -0.5 * cfg.fov + k * cfg.fov / (cfg.beams - 1);
}

/// Beams are equally spaced across the field of view, right to left.
inline std::vector<double> scan_lidar(const VehicleState& s, const track::OccupancyGrid& grid,
                                      const std::vector<Obstacle>& obstacles, const LidarConfig& cfg) {
  if (cfg.beams < 2 || !(cfg.max_range > 0.0)) throw ParameterError("lidar: need >= 2 beams and max_range > 0");
  std::vector<double> ranges(static_cast<std::size_t>(cfg.beams));
  for (int k = 0; k < cfg.beams; ++k) {
    ranges[k] = ray_range(grid, obstacles, s.position(), s.psi + beam_angle(k, cfg), cfg.max_range);
  }
  return ranges;
}

/// Disc footprint against occupied cells (the outside of the grid counts as
/// occupied) and obstacle squares.
inline bool check_collision(Vec2 p, double radius, const track::OccupancyGrid& grid,
                            const std::vector<Obstacle>& obstacles) {
  for (const auto& o : obstacles) {
    if (o.distance_to(p) < radius) return true;
  }
  const int c0 = grid.col_of(p.x - radius), c1 = grid.col_of(p.x + radius);
  const int r0 = grid.row_of(p.y - radius), r1 = grid.row_of(p.y + radius);
  const double h = 0.5 * grid.resolution;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!grid.occupied(c, r)) continue;
      const Vec2 q = grid.cell_center(c, r);
      const double dx = std::max(std::abs(p.x - q.x) - h, 0.0);
      const double dy = std::max(std::abs(p.y - q.y) - h, 0.0);
      if (std::hypot(dx, dy) < radius) return true;
    }
  }
  return false;
}

inline bool check_collision(const VehicleState& s, const track::OccupancyGrid& grid,
                            const std::vector<Obstacle>& obstacles, double radius = 0.15) {
  return check_collision(s.position(), radius, grid, obstacles);
}

}  // namespace racelab::sim
