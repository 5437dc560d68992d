#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/track/grid.hpp"

namespace racelab::track {

/// Closed, counter-clockwise track centerline. Points are not repeated: the
/// closing segment runs from the last point back to the first.
struct Centerline {
  std::vector<Vec2> points;
  std::vector<Vec2> normals;  // unit, pointing left of travel (inward for a CCW loop)
  std::vector<double> w_left;
  std::vector<double> w_right;
  std::vector<double> s;  // cumulative arc length, s[0] = 0
  bool closed = true;

  std::size_t size() const { return points.size(); }
  double length() const {
    if (points.empty()) return 0.0;
    return closed ? s.back() + distance(points.back(), points.front()) : s.back();
  }
  double width(std::size_t i) const { return w_left[i] + w_right[i]; }
};

struct CenterlineOptions {
  double spacing = 0.2;    // resampling step, meters
  double smoothing = 0.25; // half window of the moving average on the traced skeleton, meters
  int centering_passes = 2;
};

namespace detail {

/// Binary image with a one-pixel zero border so neighbour lookups never leave it.
class Mask {
 public:
  Mask(int w, int h) : w_(w + 2), h_(h + 2), px_(static_cast<std::size_t>(w_) * h_, 0) {}
  std::uint8_t& at(int c, int r) { return px_[static_cast<std::size_t>(r + 1) * w_ + (c + 1)]; }
  std::uint8_t at(int c, int r) const { return px_[static_cast<std::size_t>(r + 1) * w_ + (c + 1)]; }
  int width() const { return w_ - 2; }
  int height() const { return h_ - 2; }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

// Neighbours P2..P9, clockwise starting north (row + 1 is north).
constexpr std::array<std::array<int, 2>, 8> kRing{{{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};

inline int neighbour_count(const Mask& m, int c, int r) {
  int n = 0;
  for (auto [dc, dr] : kRing) n += m.at(c + dc, r + dr);
  return n;
}

/// Zhang-Suen thinning, in place.
inline void thin(Mask& m) {
  std::vector<std::pair<int, int>> to_clear;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      to_clear.clear();
      for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) {
          if (!m.at(c, r)) continue;
          std::array<int, 8> p{};
          for (int k = 0; k < 8; ++k) p[k] = m.at(c + kRing[k][0], r + kRing[k][1]);
          const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
          if (b < 2 || b > 6) continue;
          int a = 0;
          for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1);
          if (a != 1) continue;
          // p[0]=N p[2]=E p[4]=S p[6]=W
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
          }
          to_clear.emplace_back(c, r);
        }
      }
      for (auto [c, r] : to_clear) m.at(c, r) = 0;
      changed = changed || !to_clear.empty();
    }
  }
}

/// Repeatedly strips end points so that only cycles survive.
inline void prune_spurs(Mask& m) {
  std::vector<std::pair<int, int>> ends;
  do {
    ends.clear();
    for (int r = 0; r < m.height(); ++r)
      for (int c = 0; c < m.width(); ++c)
        if (m.at(c, r) && neighbour_count(m, c, r) <= 1) ends.emplace_back(c, r);
    for (auto [c, r] : ends) m.at(c, r) = 0;
  } while (!ends.empty());
}

inline int count_components(const Mask& m, std::size_t& pixels) {
  Mask seen(m.width(), m.height());
  int components = 0;
  pixels = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (!m.at(c, r) || seen.at(c, r)) continue;
      ++components;
      stack.emplace_back(c, r);
      seen.at(c, r) = 1;
      while (!stack.empty()) {
        auto [cc, rr] = stack.back();
        stack.pop_back();
        ++pixels;
        for (auto [dc, dr] : kRing) {
          if (m.at(cc + dc, rr + dr) && !seen.at(cc + dc, rr + dr)) {
            seen.at(cc + dc, rr + dr) = 1;
            stack.emplace_back(cc + dc, rr + dr);
          }
        }
      }
    }
  }
  return components;
}

/// Walks the skeleton loop from its first pixel in raster order, preferring
/// edge neighbours over diagonal ones.
inline std::vector<std::pair<int, int>> trace_loop(const Mask& m) {
  int sc = -1, sr = -1;
  for (int r = 0; r < m.height() && sc < 0; ++r)
    for (int c = 0; c < m.width(); ++c)
      if (m.at(c, r)) {
        sc = c;
        sr = r;
        break;
      }
  Mask visited(m.width(), m.height());
  std::vector<std::pair<int, int>> path{{sc, sr}};
  visited.at(sc, sr) = 1;
  constexpr std::array<int, 8> order{0, 2, 4, 6, 1, 3, 5, 7};  // edges first
  int c = sc, r = sr;
  while (true) {
    bool moved = false;
    for (int k : order) {
      const int nc = c + kRing[k][0];
      const int nr = r + kRing[k][1];
      if (m.at(nc, nr) && !visited.at(nc, nr)) {
        c = nc;
        r = nr;
        visited.at(c, r) = 1;
        path.emplace_back(c, r);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const auto [lc, lr] = path.back();
  if (path.size() < 3 || std::max(std::abs(lc - sc), std::abs(lr - sr)) > 1) {
    throw TopologyError("centerline: skeleton does not close into a loop");
  }
  return path;
}

inline std::vector<Vec2> smooth_closed(const std::vector<Vec2>& pts, int half_window) {
  const int n = static_cast<int>(pts.size());
  if (half_window <= 0 || n < 2 * half_window + 1) return pts;
  std::vector<Vec2> out(pts.size());
  for (int i = 0; i < n; ++i) {
    Vec2 acc;
    for (int k = -half_window; k <= half_window; ++k) acc += pts[((i + k) % n + n) % n];
    out[i] = acc / (2.0 * half_window + 1.0);
  }
  return out;
}

inline std::vector<Vec2> resample_closed(const std::vector<Vec2>& pts, double spacing) {
  const std::size_t n = pts.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + distance(pts[i], pts[(i + 1) % n]);
  const double total = cum[n];
  const auto count = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(total / spacing)));
  const double step = total / static_cast<double>(count);
  std::vector<Vec2> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = step * static_cast<double>(k);
    while (seg + 1 < n && cum[seg + 1] <= target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    out.push_back(pts[seg] + (pts[(seg + 1) % n] - pts[seg]) * t);
  }
  return out;
}

inline double signed_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

}  // namespace detail

/// Fills normals, cumulative arc length and free widths for closed centerline points.
inline Centerline make_centerline(std::vector<Vec2> points, const OccupancyGrid& grid) {
  Centerline cl;
  const std::size_t n = points.size();
  if (n < 3) throw ParameterError("centerline needs at least 3 points");
  cl.points = std::move(points);
  cl.normals.resize(n);
  cl.w_left.resize(n);
  cl.w_right.resize(n);
  cl.s.resize(n);
  const double probe = 4.0 * (grid.width + grid.height) * grid.resolution;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 tangent = normalized(cl.points[(i + 1) % n] - cl.points[(i + n - 1) % n]);
    cl.normals[i] = left_of(tangent);
    const double a = std::atan2(cl.normals[i].y, cl.normals[i].x);
    // back off slightly so the boundary point itself tests free
    cl.w_left[i] = std::max(0.0, cast_ray(grid, cl.points[i], a, probe) - 1e-6);
    cl.w_right[i] = std::max(0.0, cast_ray(grid, cl.points[i], a + std::numbers::pi, probe) - 1e-6);
    cl.s[i] = i == 0 ? 0.0 : cl.s[i - 1] + distance(cl.points[i - 1], cl.points[i]);
  }
  return cl;
}

/// Extracts the single drivable loop of a grid: skeletonize the free space,
/// strip spurs, trace the remaining cycle, smooth and resample it by arc length.
/// The result runs counter-clockwise and starts at its lowest point (leftmost on ties).
inline Centerline extract_centerline(const OccupancyGrid& grid, const CenterlineOptions& opt = {}) {
  if (!(opt.spacing > 0.0)) throw ParameterError("centerline spacing must be > 0");
  detail::Mask mask(grid.width, grid.height);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) mask.at(c, r) = grid.occupied(c, r) ? 0 : 1;

  detail::thin(mask);
  detail::prune_spurs(mask);

  std::size_t pixels = 0;
  const int components = detail::count_components(mask, pixels);
  if (components == 0) throw TopologyError("centerline: no closed loop in grid");
  if (components > 1) throw TopologyError("centerline: more than one loop in grid");

  const auto path = detail::trace_loop(mask);
  // a theta-shaped skeleton (island in the track) leaves a branch untraced
  if (static_cast<double>(path.size()) < 0.9 * static_cast<double>(pixels)) {
    throw TopologyError("centerline: skeleton has more than one cycle");
  }

  std::vector<Vec2> pts;
  pts.reserve(path.size());
  for (auto [c, r] : path) pts.push_back(grid.cell_center(c, r));
  const int half = static_cast<int>(std::lround(opt.smoothing / grid.resolution));
  pts = detail::smooth_closed(pts, half);
  pts = detail::resample_closed(pts, opt.spacing);
  if (detail::signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());

  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dy = pts[i].y - pts[start].y;
    if (dy < -1e-9 || (std::abs(dy) <= 1e-9 && pts[i].x < pts[start].x)) start = i;
  }
  std::rotate(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(start), pts.end());

  auto cl = make_centerline(std::move(pts), grid);
  // thinning leaves the skeleton a pixel or two off the medial axis on curved
  // bands; move every point to the midpoint between the walls and resample
  for (int pass = 0; pass < opt.centering_passes; ++pass) {
    std::vector<Vec2> centered(cl.size());
    for (std::size_t i = 0; i < cl.size(); ++i) {
      centered[i] = cl.points[i] + cl.normals[i] * (0.5 * (cl.w_left[i] - cl.w_right[i]));
    }
    centered = detail::resample_closed(centered, opt.spacing);
    cl = make_centerline(std::move(centered), grid);
  }
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (grid.occupied_at(cl.points[i])) throw TopologyError("centerline: point falls outside free space");
  }
  return cl;
}

}  // namespace racelab::track
