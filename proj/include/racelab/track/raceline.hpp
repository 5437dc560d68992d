#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/geometry.hpp"
#include "racelab/track/centerline.hpp"
#include "racelab/util/numfmt.hpp"

namespace racelab::track {

/// Closed reference line with a speed per waypoint.
struct RaceLine {
  std::vector<Vec2> waypoints;
  std::vector<double> speeds;
  std::vector<double> s;
  double s_total = 0.0;

  std::size_t size() const { return waypoints.size(); }
  bool empty() const { return waypoints.empty(); }
};

/// Recomputes s and s_total from the waypoints.
inline void update_arc_length(RaceLine& line) {
  const std::size_t n = line.size();
  line.s.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) line.s[i] = line.s[i - 1] + distance(line.waypoints[i - 1], line.waypoints[i]);
  line.s_total = n == 0 ? 0.0 : line.s.back() + distance(line.waypoints.back(), line.waypoints.front());
}

// ---------------------------------------------------------------------------
// Minimum curvature

/// Curvature of the offset path p_i = c_i + alpha_i * n_i, linearized around
/// the centerline: the tangent is frozen to the centerline's central
/// difference t_i, and kappa_i = cross(t_i, p_{i-1} - 2 p_i + p_{i+1}) / |t_i|^3.
/// kappa = A * alpha + b with A banded (three entries per row).
class LinearizedCurvature {
 public:
  explicit LinearizedCurvature(const Centerline& c) : n_(c.size()), closed_(c.closed) {
    if (n_ < 3) throw ParameterError("min curvature: need at least 3 points");
    const auto& p = c.points;
    const auto& nv = c.normals;
    const std::size_t first = closed_ ? 0 : 1;
    const std::size_t last = closed_ ? n_ : n_ - 1;
    for (std::size_t i = first; i < last; ++i) {
      const std::size_t im = (i + n_ - 1) % n_;
      const std::size_t ip = (i + 1) % n_;
      const Vec2 t = (p[ip] - p[im]) * 0.5;
      const double tn = norm(t);
      const double scale = 1.0 / (tn * tn * tn);
      rows_.push_back({im, i, ip, scale * cross(t, nv[im]), -2.0 * scale * cross(t, nv[i]),
                       scale * cross(t, nv[ip]), scale * cross(t, p[im] - p[i] * 2.0 + p[ip])});
    }
  }

  std::size_t size() const { return n_; }

  std::vector<double> curvature(const std::vector<double>& alpha) const {
    std::vector<double> k(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      k[r] = row.b + row.a_prev * alpha[row.prev] + row.a_mid * alpha[row.mid] + row.a_next * alpha[row.next];
    }
    return k;
  }

  double objective(const std::vector<double>& alpha) const {
    double j = 0.0;
    for (double k : curvature(alpha)) j += k * k;
    return j;
  }

  /// Gradient of objective(): 2 A^T (A alpha + b).
  std::vector<double> gradient(const std::vector<double>& alpha) const {
    const auto k = curvature(alpha);
    std::vector<double> g(n_, 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      g[row.prev] += 2.0 * row.a_prev * k[r];
      g[row.mid] += 2.0 * row.a_mid * k[r];
      g[row.next] += 2.0 * row.a_next * k[r];
    }
    return g;
  }

  /// Upper bound on the gradient's Lipschitz constant, by power iteration on A^T A.
  double lipschitz() const {
    std::vector<double> v(n_);
    for (std::size_t i = 0; i < n_; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      double nv = 0.0;
      for (double x : v) nv += x * x;
      nv = std::sqrt(nv);
      for (double& x : v) x /= nv;
      std::vector<double> av(rows_.size());
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const auto& row = rows_[r];
        av[r] = row.a_prev * v[row.prev] + row.a_mid * v[row.mid] + row.a_next * v[row.next];
      }
      std::vector<double> atav(n_, 0.0);
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const auto& row = rows_[r];
        atav[row.prev] += row.a_prev * av[r];
        atav[row.mid] += row.a_mid * av[r];
        atav[row.next] += row.a_next * av[r];
      }
      lambda = 0.0;
      for (std::size_t i = 0; i < n_; ++i) lambda += v[i] * atav[i];
      v = std::move(atav);
    }
    return 2.0 * lambda * 1.05;
  }

 private:
  struct Row {
    std::size_t prev, mid, next;
    double a_prev, a_mid, a_next, b;
  };
  std::size_t n_;
  bool closed_;
  std::vector<Row> rows_;
};

/// Summed squared linearized curvature of the path offset by alpha. This is
/// the quantity the optimizer minimizes.
inline double curvature_objective(const Centerline& c, const std::vector<double>& alpha) {
  return LinearizedCurvature(c).objective(alpha);
}

/// Summed squared Menger curvature of a polyline.
inline double menger_objective(const std::vector<Vec2>& pts, bool closed = true) {
  const std::size_t n = pts.size();
  double j = 0.0;
  for (std::size_t i = closed ? 0 : 1; i < (closed ? n : n - 1); ++i) {
    const double k = menger_curvature(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
    j += k * k;
  }
  return j;
}

inline std::vector<Vec2> offset_path(const Centerline& c, const std::vector<double>& alpha) {
  std::vector<Vec2> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c.points[i] + c.normals[i] * alpha[i];
  return out;
}

struct MinCurvatureOptions {
  double tolerance = 1e-8;       // stop when the objective changes less than this
  std::size_t max_iterations = 500000;
};

struct MinCurvatureResult {
  std::vector<double> alpha;  // lateral offsets along the centerline normals
  double objective = 0.0;
  double centerline_objective = 0.0;
  std::size_t iterations = 0;
};

/// Lateral offsets minimizing summed squared curvature within
/// [-w_right + margin, w_left - margin] at every point. Accelerated projected
/// gradient with adaptive restart.
inline MinCurvatureResult optimize_min_curvature(const Centerline& c, double margin,
                                                 const MinCurvatureOptions& opt = {}) {
  const std::size_t n = c.size();
  if (!(margin >= 0.0)) throw ParameterError("min curvature: margin must be >= 0");
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -c.w_right[i] + margin;
    hi[i] = c.w_left[i] - margin;
    if (lo[i] > hi[i]) {
      throw InfeasibleError("min curvature: track narrower than 2*margin at point " + std::to_string(i));
    }
  }
  if (!c.closed) lo.front() = hi.front() = lo.back() = hi.back() = 0.0;  // open ends stay put

  const LinearizedCurvature model(c);
  double step = 1.0 / model.lipschitz();
  auto project = [&](std::vector<double>& a) {
    for (std::size_t i = 0; i < n; ++i) a[i] = std::clamp(a[i], lo[i], hi[i]);
  };

  MinCurvatureResult res;
  res.centerline_objective = model.objective(std::vector<double>(n, 0.0));
  std::vector<double> x(n, 0.0);
  project(x);
  double fx = model.objective(x);
  std::vector<double> y = x;
  double t = 1.0;
  int quiet = 0;
  bool at_restart = false;
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    const auto g = model.gradient(y);
    std::vector<double> xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = y[i] - step * g[i];
    project(xn);
    const double fn = model.objective(xn);
    if (fn > fx) {
      // momentum overshot: restart from the last accepted point. A plain
      // projected step that still ascends means the Lipschitz estimate was low.
      if (at_restart) step *= 0.5;
      y = x;
      t = 1.0;
      at_restart = true;
      continue;
    }
    at_restart = false;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) y[i] = xn[i] + ((t - 1.0) / tn) * (xn[i] - x[i]);
    t = tn;
    const double change = fx - fn;
    x = std::move(xn);
    fx = fn;
    quiet = change < opt.tolerance ? quiet + 1 : 0;
    if (quiet >= 20) break;
  }
  res.alpha = std::move(x);
  res.objective = fx;
  res.iterations = it;
  return res;
}

// ---------------------------------------------------------------------------
// Speed profile

struct SpeedLimits {
  double v_max = 7.0;
  double a_lat_max = 8.0;
  double a_long_max = 6.0;
};

/// Fastest closed-loop profile with v <= v_max, v^2 * kappa <= a_lat_max and
/// |v_{i+1}^2 - v_i^2| <= 2 a_long_max ds. Forward and backward passes repeat
/// until nothing changes.
inline std::vector<double> speed_profile(const std::vector<Vec2>& pts, const SpeedLimits& lim) {
  if (!(lim.v_max > 0.0 && lim.a_lat_max > 0.0 && lim.a_long_max > 0.0)) {
    throw ParameterError("speed profile: limits must be > 0");
  }
  const std::size_t n = pts.size();
  if (n < 3) throw ParameterError("speed profile: need at least 3 points");
  std::vector<double> v(n), ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = menger_curvature(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
    v[i] = k > 0.0 ? std::min(lim.v_max, std::sqrt(lim.a_lat_max / k)) : lim.v_max;
    ds[i] = distance(pts[i], pts[(i + 1) % n]);
  }
  for (std::size_t sweep = 0; sweep < 4 * n + 8; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const double reach = std::sqrt(v[i] * v[i] + 2.0 * lim.a_long_max * ds[i]);
      if (reach < v[j]) {
        v[j] = reach;
        changed = true;
      }
    }
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t j = (k + 1) % n;
      const double reach = std::sqrt(v[j] * v[j] + 2.0 * lim.a_long_max * ds[k]);
      if (reach < v[k]) {
        v[k] = reach;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return v;
}

inline RaceLine make_raceline(std::vector<Vec2> pts, const SpeedLimits& lim) {
  RaceLine line;
  line.speeds = speed_profile(pts, lim);
  line.waypoints = std::move(pts);
  update_arc_length(line);
  return line;
}

/// Minimum-curvature raceline with its speed profile.
inline RaceLine build_raceline(const Centerline& c, double margin, const SpeedLimits& lim,
                               MinCurvatureResult* details = nullptr) {
  auto res = optimize_min_curvature(c, margin);
  auto line = make_raceline(offset_path(c, res.alpha), lim);
  if (details) *details = std::move(res);
  return line;
}

/// The centerline itself as a reference line.
inline RaceLine centerline_reference(const Centerline& c, const SpeedLimits& lim) {
  return make_raceline(c.points, lim);
}

// ---------------------------------------------------------------------------
// RaceLine CSV: header "x,y,speed,s", 9 significant digits

inline std::string format_raceline_csv(const RaceLine& line) {
  std::string out = "x,y,speed,s\n";
  for (std::size_t i = 0; i < line.size(); ++i) {
    out += util::sig(line.waypoints[i].x, 9) + "," + util::sig(line.waypoints[i].y, 9) + "," +
           util::sig(line.speeds[i], 9) + "," + util::sig(line.s[i], 9) + "\n";
  }
  return out;
}

inline void save_raceline(const RaceLine& line, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write raceline " + path.string());
  out << format_raceline_csv(line);
}

/// s_total is recomputed from the loaded waypoints.
inline RaceLine parse_raceline_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || util::trim(line) != "x,y,speed,s") throw FormatError("raceline: bad header");
  RaceLine rl;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) throw FormatError("raceline: expected 4 columns in '" + line + "'");
    rl.waypoints.push_back({util::parse_double(f[0], "x"), util::parse_double(f[1], "y")});
    rl.speeds.push_back(util::parse_double(f[2], "speed"));
    rl.s.push_back(util::parse_double(f[3], "s"));
  }
  if (rl.size() < 3) throw FormatError("raceline: need at least 3 rows");
  rl.s_total = rl.s.back() + distance(rl.waypoints.back(), rl.waypoints.front());
  return rl;
}

inline RaceLine load_raceline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raceline " + path.string());
  return parse_raceline_csv(in);
}

}  // namespace racelab::track
