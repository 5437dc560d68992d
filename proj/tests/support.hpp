#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "racelab/track/grid.hpp"

namespace racelab::testing {

inline std::string asset(const std::string& name) { return std::string(RACELAB_ASSET_DIR) + "/" + name; }

struct TrackMeta {
  double design_length = 0.0;
  std::size_t free_cells = 0;
  double width = 0.0;
};

/// Numbers recorded by tools/gen_tracks.py when the assets were generated.
inline TrackMeta track_meta(const std::string& name) {
  std::ifstream in(asset("tracks.meta"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string n;
    TrackMeta m;
    ls >> n >> m.design_length >> m.free_cells >> m.width;
    if (n == name) return m;
  }
  throw std::runtime_error("no meta for " + name);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Free ring r_in <= |p - center| <= r_out, everything else occupied.
inline track::OccupancyGrid annulus_grid(double r_in, double r_out, double res, Vec2 center = {0.0, 0.0}) {
  const double half = r_out + 0.5;
  const int n = static_cast<int>(std::ceil(2.0 * half / res));
  track::OccupancyGrid g(n, n, res, {center.x - half, center.y - half}, true);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d = distance(g.cell_center(c, r), center);
      if (d >= r_in && d <= r_out) g.set(c, r, false);
    }
  }
  return g;
}

/// The same grid turned a quarter turn counter-clockwise about the world origin.
inline track::OccupancyGrid rotate_quarter(const track::OccupancyGrid& g) {
  track::OccupancyGrid out(g.height, g.width, g.resolution,
                           {-g.origin.y - g.height * g.resolution, g.origin.x});
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) out.set(g.height - 1 - r, c, g.occupied(c, r));
  return out;
}

/// Exact rotation by a multiple of 90 degrees (positive is counter-clockwise).
inline Vec2 rotated_point(Vec2 p, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  for (int i = 0; i < k; ++i) p = {-p.y, p.x};
  return p;
}

}  // namespace racelab::testing
