// racelab command line: track tools, training, benchmarks and plots.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "racelab/harness/benchmark.hpp"
#include "racelab/harness/plot.hpp"

namespace fs = std::filesystem;
using namespace racelab;

namespace {

std::string centerline_csv(const track::Centerline& c) {
  std::string out = "x,y,w_right,w_left\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += util::sig(c.points[i].x, 9) + ',' + util::sig(c.points[i].y, 9) + ',' + util::sig(c.w_right[i], 9) + ',' +
           util::sig(c.w_left[i], 9) + '\n';
  }
  return out;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    harness::write_text(out, text);
    std::cerr << "wrote " << out << '\n';
  }
}

std::string file_safe(std::string s) {
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

int cmd_track_build(const std::string& grid, const std::string& out) {
  const auto c = track::extract_centerline(track::load_grid(grid));
  std::cerr << "centerline: " << c.size() << " points, length " << util::fixed(c.length(), 2) << " m\n";
  emit(centerline_csv(c), out);
  return 0;
}

int cmd_raceline(const std::string& grid, const std::string& out, double margin) {
  track::TrackOptions opt;
  opt.margin = margin;
  const auto t = track::load_track(grid, opt);
  const auto& c = t.center;
  std::vector<Vec2> center_pts(c.points);
  std::cerr << "summed squared curvature: centerline " << util::sig(track::menger_objective(center_pts), 6)
            << ", raceline " << util::sig(track::menger_objective(t.min_curve_line.waypoints), 6) << '\n';
  emit(track::format_raceline_csv(t.min_curve_line), out);
  return 0;
}

int cmd_train(const std::string& config_path, std::vector<std::uint64_t> seeds, const std::string& root) {
  const auto cfg = harness::load_config(config_path);
  const auto t = track::load_track(cfg.resolved_track(), cfg.track);
  const fs::path dir = harness::run_dir(root, cfg);
  fs::create_directories(dir);
  harness::write_text(dir / "config.ini", harness::canonical(cfg));
  if (seeds.empty()) seeds = cfg.seeds;
  for (std::uint64_t seed : seeds) {
    std::cerr << "training seed " << seed << " for " << cfg.td3.total_steps << " steps\n";
    const auto res = learn::train(t, cfg.train_options(), seed, [](const learn::CurveRow& r) {
      if (r.episode % 50 == 0) {
        std::cerr << "  episode " << r.episode << "  steps " << r.steps << "  reward "
                  << util::fixed(r.cumulative_reward, 3) << "  " << sim::to_string(r.outcome) << '\n';
      }
    });
    const fs::path sd = harness::actor_path(dir, seed).parent_path();
    fs::create_directories(sd);
    learn::save_mlp(res.actor, harness::actor_path(dir, seed));
    harness::write_text(sd / "curve.csv", learn::format_curve_csv(res.curve));
    std::cout << "seed " << seed << ": " << res.curve.size() << " episodes, " << res.env_steps << " env steps, "
              << res.updates << " updates, actor " << harness::actor_digest(res.actor) << '\n';
  }
  std::cout << "run directory " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& config_path, int benchmark, const std::string& root) {
  const auto cfg = harness::load_config(config_path);
  const auto t = track::load_track(cfg.resolved_track(), cfg.track);
  const fs::path dir = harness::run_dir(root, cfg);
  auto agents = harness::make_agents(cfg, t, dir);
  const fs::path bd = dir / ("benchmark" + std::to_string(benchmark));
  fs::create_directories(bd);
  harness::write_text(dir / "config.ini", harness::canonical(cfg));

  const auto& reference = cfg.reward.reference == reward::Reference::CenterLine ? t.center_line : t.min_curve_line;
  const auto report = harness::run_benchmark(
      benchmark, cfg, t, agents, [&](const harness::Agent& a, int lap, const sim::EpisodeResult& res) {
        if (lap != 0) return;
        const std::string stem = "traj_" + file_safe(a.name);
        harness::write_text(bd / (stem + ".csv"), sim::format_trajectory_csv(res));
        std::vector<Vec2> path;
        for (const auto& s : res.outcome.trajectory) path.push_back(s.position());
        harness::write_text(bd / (stem + ".svg"), harness::render_svg(t, reference, path, res.obstacles));
      });
  harness::write_text(bd / "report.txt", harness::format_report_txt(report));
  harness::write_text(bd / "report.csv", harness::format_report_csv(report));
  std::cout << harness::format_report_txt(report) << "\nwritten to " << bd.string() << '\n';
  return 0;
}

int cmd_plot(const std::string& log, const std::string& grid, std::string out, const std::string& reference) {
  const auto t = track::load_track(grid);
  std::ifstream in(log);
  if (!in) throw IoError("cannot open " + log);
  const auto path = harness::parse_trajectory_xy(in);
  const auto& ref = reward::parse_reference(reference) == reward::Reference::CenterLine ? t.center_line
                                                                                        : t.min_curve_line;
  if (out.empty()) out = fs::path(log).replace_extension(".svg").string();
  harness::write_text(out, harness::render_svg(t, ref, path, {}));
  std::cerr << "wrote " << out << " (" << path.size() << " points, " << util::fixed(harness::path_length(path), 2)
            << " m)\n";
  return 0;
}

struct CurveSummary {
  int episodes = 0;
  long long steps = 0;
  int tail_completed = 0, tail = 0;
  double tail_lap_time = 0.0;
  double first_quartile = 0.0, last_quartile = 0.0;
};

CurveSummary summarize_curve(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> reward, lap;
  std::vector<bool> done;
  CurveSummary s;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw FormatError("curve: bad row '" + line + "'");
    s.steps = util::parse_int(f[1], "steps");
    reward.push_back(util::parse_double(f[2], "cumulative_reward"));
    lap.push_back(util::parse_double(f[3], "lap_time"));
    done.push_back(util::trim(f[4]) == "complete");
  }
  s.episodes = static_cast<int>(reward.size());
  const int q = s.episodes / 4;
  for (int i = 0; i < q; ++i) {
    s.first_quartile += reward[i] / q;
    s.last_quartile += reward[s.episodes - 1 - i] / q;
  }
  for (int i = std::max(0, s.episodes - 50); i < s.episodes; ++i) {
    ++s.tail;
    if (done[i]) {
      ++s.tail_completed;
      s.tail_lap_time += lap[i];
    }
  }
  if (s.tail_completed) s.tail_lap_time /= s.tail_completed;
  return s;
}

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  bool any = false;
  for (const auto& p : entries) {
    const auto name = p.filename().string();
    if (name.rfind("seed_", 0) == 0 && fs::exists(p / "curve.csv")) {
      const auto s = summarize_curve(p / "curve.csv");
      std::cout << name << ": " << s.episodes << " episodes, " << s.steps << " steps; last " << s.tail
                << " episodes " << s.tail_completed << " completed";
      if (s.tail_completed) std::cout << ", mean lap " << util::fixed(s.tail_lap_time, 2) << " s";
      std::cout << "; mean reward first quarter " << util::fixed(s.first_quartile, 3) << ", last quarter "
                << util::fixed(s.last_quartile, 3) << '\n';
      any = true;
    }
  }
  for (const auto& p : entries) {
    if (fs::exists(p / "report.txt")) {
      std::ifstream in(p / "report.txt");
      std::cout << '\n' << in.rdbuf();
      any = true;
    }
  }
  if (!any) throw IoError("nothing to report in " + dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"racelab: reward signals for learned racing planners"};
  app.require_subcommand(1);

  auto* track_cmd = app.add_subcommand("track", "track utilities");
  track_cmd->require_subcommand(1);
  auto* build = track_cmd->add_subcommand("build", "extract the centerline and widths from a grid");
  std::string grid, out;
  build->add_option("grid", grid, "occupancy grid file")->required()->check(CLI::ExistingFile);
  build->add_option("--out,-o", out, "output CSV (default stdout)");

  auto* raceline = app.add_subcommand("raceline", "raceline tools");
  raceline->require_subcommand(1);
  auto* optimize = raceline->add_subcommand("optimize", "minimum-curvature raceline with speed profile");
  double margin = track::TrackOptions{}.margin;
  optimize->add_option("track", grid, "occupancy grid file")->required()->check(CLI::ExistingFile);
  optimize->add_option("--out,-o", out, "output CSV (default stdout)");
  optimize->add_option("--margin", margin, "clearance from the track edge [m]")->capture_default_str();

  std::string config, root = "runs";
  auto* train = app.add_subcommand("train", "train the modification planner");
  std::vector<std::uint64_t> seeds;
  train->add_option("--config,-c", config, "experiment config")->required()->check(CLI::ExistingFile);
  train->add_option("--seed,-s", seeds, "training seed(s); default: the config's seeds");
  train->add_option("--runs", root, "root of the run directories")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "run a benchmark");
  int benchmark = 0;
  eval->add_option("--benchmark,-b", benchmark, "1: no obstacles, 2: random obstacles")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  eval->add_option("--config,-c", config, "experiment config")->required()->check(CLI::ExistingFile);
  eval->add_option("--runs", root, "root of the run directories")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "draw a trajectory CSV over its track");
  std::string log, reference = "mincurve";
  plot->add_option("log", log, "trajectory CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("track", grid, "occupancy grid file")->required()->check(CLI::ExistingFile);
  plot->add_option("--out,-o", out, "SVG path (default: next to the log)");
  plot->add_option("--reference", reference, "center | mincurve")->capture_default_str();

  auto* report = app.add_subcommand("report", "summarize a run directory");
  std::string dir;
  report->add_option("dir", dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*build) return cmd_track_build(grid, out);
    if (*optimize) return cmd_raceline(grid, out, margin);
    if (*train) return cmd_train(config, seeds, root);
    if (*eval) return cmd_eval(config, benchmark, root);
    if (*plot) return cmd_plot(log, grid, out, reference);
    if (*report) return cmd_report(dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
