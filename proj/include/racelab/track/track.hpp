#pragma once

#include <filesystem>

#include "racelab/track/centerline.hpp"
#include "racelab/track/grid.hpp"
#include "racelab/track/line_geometry.hpp"
#include "racelab/track/raceline.hpp"

namespace racelab::track {

struct TrackOptions {
  CenterlineOptions centerline;
  double margin = 0.35;  // raceline clearance from the track edge, meters
  SpeedLimits limits;
};

/// Everything derived from one grid: the centerline, the centerline as a
/// reference line, and the minimum-curvature raceline.
struct Track {
  OccupancyGrid grid;
  Centerline center;
  RaceLine center_line;
  RaceLine min_curve_line;
};

inline Track build_track(OccupancyGrid grid, const TrackOptions& opt = {}) {
  Track t;
  t.center = extract_centerline(grid, opt.centerline);
  t.center_line = centerline_reference(t.center, opt.limits);
  t.min_curve_line = build_raceline(t.center, opt.margin, opt.limits);
  t.grid = std::move(grid);
  return t;
}

inline Track load_track(const std::filesystem::path& grid_path, const TrackOptions& opt = {}) {
  return build_track(load_grid(grid_path), opt);
}

}  // namespace racelab::track
