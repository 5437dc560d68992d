#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/util/numfmt.hpp"

namespace racelab::track {

/// Binary occupancy map. Row 0 is the row at origin.y; columns grow along +x.
/// Anything outside the grid counts as occupied.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Vec2 origin;
  std::vector<std::uint8_t> cells;  // row-major, 1 = occupied

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, double res, Vec2 org, bool fill_occupied = false)
      : width(w), height(h), resolution(res), origin(org),
        cells(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill_occupied ? 1 : 0) {
    if (w < 1 || h < 1) throw ParameterError("grid dimensions must be >= 1");
    if (!(res > 0.0)) throw ParameterError("grid resolution must be > 0");
  }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width && row < height; }

  bool occupied(int col, int row) const {
    if (!in_bounds(col, row)) return true;
    return cells[static_cast<std::size_t>(row) * width + col] != 0;
  }

  void set(int col, int row, bool occ) {
    if (!in_bounds(col, row)) throw ParameterError("cell out of bounds");
    cells[static_cast<std::size_t>(row) * width + col] = occ ? 1 : 0;
  }

  int col_of(double x) const { return static_cast<int>(std::floor((x - origin.x) / resolution)); }
  int row_of(double y) const { return static_cast<int>(std::floor((y - origin.y) / resolution)); }

  bool occupied_at(Vec2 p) const {
    const double cx = (p.x - origin.x) / resolution;
    const double cy = (p.y - origin.y) / resolution;
    // guards the int conversion for points far outside
    if (!(cx >= 0.0 && cy >= 0.0 && cx < width && cy < height)) return true;
    return occupied(static_cast<int>(cx), static_cast<int>(cy));
  }

  Vec2 cell_center(int col, int row) const {
    return {origin.x + (col + 0.5) * resolution, origin.y + (row + 0.5) * resolution};
  }

  std::size_t free_count() const {
    std::size_t n = 0;
    for (auto c : cells) n += (c == 0);
    return n;
  }

  bool operator==(const OccupancyGrid&) const = default;
};

/// Distance along a ray until it enters an occupied cell, capped at max_range.
/// Exact grid traversal (Amanatides & Woo). Starting inside an occupied cell gives 0.
inline double cast_ray(const OccupancyGrid& grid, Vec2 from, double angle, double max_range) {
  const double res = grid.resolution;
  const double gx = (from.x - grid.origin.x) / res;
  const double gy = (from.y - grid.origin.y) / res;
  int col = static_cast<int>(std::floor(gx));
  int row = static_cast<int>(std::floor(gy));
  if (grid.occupied(col, row)) return 0.0;

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_c = dx > 0 ? 1 : -1;
  const int step_r = dy > 0 ? 1 : -1;
  // distances in meters to the next vertical / horizontal cell boundary
  double t_max_c = dx != 0.0 ? ((step_c > 0 ? col + 1 - gx : gx - col) * res) / std::abs(dx) : inf;
  double t_max_r = dy != 0.0 ? ((step_r > 0 ? row + 1 - gy : gy - row) * res) / std::abs(dy) : inf;
  const double t_delta_c = dx != 0.0 ? res / std::abs(dx) : inf;
  const double t_delta_r = dy != 0.0 ? res / std::abs(dy) : inf;

  while (true) {
    double t = 0.0;
    if (t_max_c < t_max_r) {
      t = t_max_c;
      col += step_c;
      t_max_c += t_delta_c;
    } else {
      t = t_max_r;
      row += step_r;
      t_max_r += t_delta_r;
    }
    if (t >= max_range) return max_range;
    if (grid.occupied(col, row)) return t;
  }
}

// Grid file format:
//   RLGRID 1
//   width <int>
//   height <int>
//   resolution <float>
//   origin_x <float>
//   origin_y <float>
//   <height lines of width chars, '#' occupied, '.' free; first line is row 0>

inline OccupancyGrid parse_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || util::trim(line) != "RLGRID 1") {
    throw FormatError("grid: missing 'RLGRID 1' magic line");
  }
  std::map<std::string, std::string> header;
  const char* keys[] = {"width", "height", "resolution", "origin_x", "origin_y"};
  for (int i = 0; i < 5; ++i) {
    if (!std::getline(in, line)) throw FormatError("grid: header ends early");
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key >> value) || (ls >> extra)) throw FormatError("grid: bad header line '" + line + "'");
    if (header.count(key)) throw FormatError("grid: duplicate key " + key);
    header[key] = value;
  }
  for (const char* k : keys) {
    if (!header.count(k)) throw FormatError(std::string("grid: missing header key ") + k);
  }
  const auto w = util::parse_int(header["width"], "width");
  const auto h = util::parse_int(header["height"], "height");
  const double res = util::parse_double(header["resolution"], "resolution");
  if (w < 1 || h < 1) throw FormatError("grid: width and height must be >= 1");
  if (!(res > 0.0)) throw FormatError("grid: resolution must be > 0");
  OccupancyGrid grid(static_cast<int>(w), static_cast<int>(h), res,
                     {util::parse_double(header["origin_x"], "origin_x"),
                      util::parse_double(header["origin_y"], "origin_y")});

  std::size_t filled = 0;
  for (int row = 0; row < grid.height; ++row) {
    if (!std::getline(in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > static_cast<std::size_t>(grid.width)) {
      throw FormatError("grid: row " + std::to_string(row) + " longer than width");
    }
    for (std::size_t col = 0; col < line.size(); ++col) {
      const char c = line[col];
      if (c != '#' && c != '.') throw FormatError(std::string("grid: bad cell character '") + c + "'");
      grid.cells[static_cast<std::size_t>(row) * grid.width + col] = (c == '#');
    }
    filled += line.size();
    if (line.size() < static_cast<std::size_t>(grid.width)) break;
  }
  if (filled < grid.cells.size()) {
    throw TruncationError("grid: expected " + std::to_string(grid.cells.size()) + " cells, found " +
                          std::to_string(filled));
  }
  while (std::getline(in, line)) {
    if (!util::trim(line).empty()) throw FormatError("grid: trailing data after payload");
  }
  return grid;
}

inline OccupancyGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file " + path.string());
  return parse_grid(in);
}

inline std::string format_grid(const OccupancyGrid& grid) {
  std::string out = "RLGRID 1\n";
  out += "width " + std::to_string(grid.width) + "\n";
  out += "height " + std::to_string(grid.height) + "\n";
  out += "resolution " + util::shortest(grid.resolution) + "\n";
  out += "origin_x " + util::shortest(grid.origin.x) + "\n";
  out += "origin_y " + util::shortest(grid.origin.y) + "\n";
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) out += grid.occupied(col, row) ? '#' : '.';
    out += '\n';
  }
  return out;
}

inline void save_grid(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write grid file " + path.string());
  out << format_grid(grid);
}

}  // namespace racelab::track
