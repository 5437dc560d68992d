#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/sim/obstacles.hpp"
#include "racelab/track/track.hpp"
#include "racelab/util/numfmt.hpp"

namespace racelab::harness {

/// SVG of the track surface, the reference line (green, dashed), obstacles and
/// the driven path (red). Output depends only on the inputs.
inline std::string render_svg(const track::Track& t, const track::RaceLine& reference, const std::vector<Vec2>& path,
                              const std::vector<sim::Obstacle>& obstacles) {
  constexpr double px = 40.0;  // per meter
  const auto& g = t.grid;
  const double w = g.width * g.resolution, h = g.height * g.resolution;
  auto X = [&](double x) { return util::fixed((x - g.origin.x) * px, 2); };
  auto Y = [&](double y) { return util::fixed((g.origin.y + h - y) * px, 2); };
  auto polyline = [&](const std::vector<Vec2>& pts, bool close) {
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) d += (i ? " L" : "M") + X(pts[i].x) + ' ' + Y(pts[i].y);
    if (close && !pts.empty()) d += " Z";
    return d;
  };

  std::vector<Vec2> left, right;
  const auto& c = t.center;
  for (std::size_t i = 0; i < c.size(); ++i) {
    left.push_back(c.points[i] + c.normals[i] * c.w_left[i]);
    right.push_back(c.points[i] - c.normals[i] * c.w_right[i]);
  }

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + util::fixed(w * px, 0) + "\" height=\"" +
                    util::fixed(h * px, 0) + "\" viewBox=\"0 0 " + util::fixed(w * px, 2) + ' ' +
                    util::fixed(h * px, 2) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<path d=\"" + polyline(left, true) + ' ' + polyline(right, true) +
         "\" fill=\"#c8c8c8\" fill-rule=\"evenodd\" stroke=\"#707070\" stroke-width=\"1\"/>\n";
  out += "<path d=\"" + polyline(reference.waypoints, true) +
         "\" fill=\"none\" stroke=\"#1a9a1a\" stroke-width=\"2\" stroke-dasharray=\"8 6\"/>\n";
  for (const auto& o : obstacles) {
    const double s = o.side * px;
    out += "<rect x=\"" + X(o.center.x - 0.5 * o.side) + "\" y=\"" + Y(o.center.y + 0.5 * o.side) + "\" width=\"" +
           util::fixed(s, 2) + "\" height=\"" + util::fixed(s, 2) + "\" fill=\"#202020\"/>\n";
  }
  if (!path.empty()) {
    out += "<path d=\"" + polyline(path, false) + "\" fill=\"none\" stroke=\"#d01c1c\" stroke-width=\"2\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

/// Positions from a trajectory CSV (any file with x and y columns).
inline std::vector<Vec2> parse_trajectory_xy(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trajectory: empty file");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) head.emplace_back(util::trim(cell));
  }
  const auto xi = std::find(head.begin(), head.end(), "x") - head.begin();
  const auto yi = std::find(head.begin(), head.end(), "y") - head.begin();
  if (xi == static_cast<long>(head.size()) || yi == static_cast<long>(head.size())) {
    throw FormatError("trajectory: header needs x and y columns");
  }
  std::vector<Vec2> pts;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != head.size()) throw FormatError("trajectory: row has " + std::to_string(f.size()) + " columns");
    pts.push_back({util::parse_double(f[xi], "x"), util::parse_double(f[yi], "y")});
  }
  return pts;
}

inline double path_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

}  // namespace racelab::harness
