#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "racelab/harness/config.hpp"
#include "racelab/learn/mlp.hpp"
#include "racelab/learn/train.hpp"
#include "racelab/plan/agents.hpp"
#include "racelab/sim/episode.hpp"

namespace racelab::harness {

struct AgentRow {
  std::string name;
  int laps = 0;
  int completed = 0;
  int crashes = 0;
  int timeouts = 0;
  double avg_lap_time = 0.0;  // over completed laps only
  double std_lap_time = 0.0;  // sample standard deviation, 0 with fewer than two laps
  std::string actor_digest;   // empty for classical planners

  double completion_rate() const { return laps > 0 ? 100.0 * completed / laps : 0.0; }
};

struct BenchmarkReport {
  int benchmark = 1;
  std::string config_digest;
  std::uint64_t eval_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<AgentRow> rows;
};

/// A named planner ready to drive. Modification agents own their actor.
struct Agent {
  std::string name;
  std::shared_ptr<const learn::Mlp> actor;
  std::unique_ptr<sim::Planner> planner;
};

inline std::filesystem::path run_dir(const std::filesystem::path& root, const ExperimentConfig& c) {
  return root / util::hex64(config_digest(c));
}

inline std::filesystem::path actor_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / ("seed_" + std::to_string(seed)) / "actor.txt";
}

inline std::string actor_digest(const learn::Mlp& actor) { return util::hex64(util::fnv1a(learn::format_mlp(actor))); }

/// Builds the agents named in the config. Modification agents need a trained
/// actor for every seed in `dir`.
inline std::vector<Agent> make_agents(const ExperimentConfig& c, const track::Track& t,
                                      const std::filesystem::path& dir) {
  std::vector<Agent> out;
  for (AgentKind kind : c.agents) {
    switch (kind) {
      case AgentKind::PurePursuit:
        out.push_back({"pure_pursuit", nullptr,
                       std::make_unique<plan::PurePursuitPlanner>(t.min_curve_line, c.lookahead, c.env.vehicle)});
        break;
      case AgentKind::Fgm:
        out.push_back({"fgm", nullptr, std::make_unique<plan::FgmPlanner>(c.env.vehicle, c.fgm)});
        break;
      case AgentKind::Modification:
        for (std::uint64_t seed : c.seeds) {
          const auto path = actor_path(dir, seed);
          if (!std::filesystem::exists(path)) {
            throw LoadError("no trained actor at " + path.string() + " (run train with this config first)");
          }
          auto actor = std::make_shared<const learn::Mlp>(learn::load_mlp(path));
          Agent a;
          a.name = "modification/" + std::string(reward::to_string(c.reward.variant)) + '/' +
                   std::string(reward::to_string(c.reward.reference)) + "/seed" + std::to_string(seed);
          a.actor = actor;
          a.planner = std::make_unique<plan::ModificationPlanner>(t.min_curve_line, c.lookahead, c.env.vehicle,
                                                                   c.env.lidar.max_range, learn::greedy(*actor));
          out.push_back(std::move(a));
        }
        break;
    }
  }
  return out;
}

using LapCallback = std::function<void(const Agent&, int lap, const sim::EpisodeResult&)>;

/// Benchmark 1 drives an empty track; benchmark 2 spawns fresh obstacles every
/// lap. Lap i uses the seed derived from (eval_seed, i) for every agent, so all
/// agents meet the same obstacle layouts.
inline BenchmarkReport run_benchmark(int benchmark, const ExperimentConfig& c, const track::Track& t,
                                     std::vector<Agent>& agents, const LapCallback& on_lap = {}) {
  if (benchmark != 1 && benchmark != 2) throw ParameterError("benchmark must be 1 or 2");
  BenchmarkReport rep;
  rep.benchmark = benchmark;
  rep.config_digest = util::hex64(config_digest(c));
  rep.eval_seed = c.eval_seed;
  rep.seeds = c.seeds;

  sim::EnvConfig env = c.env;
  env.obstacles = benchmark == 2;
  const int laps = benchmark == 1 ? c.laps_benchmark1 : c.laps_benchmark2;
  const reward::RewardConfig rcfg = c.reward;  // rewards are logged, not used by the planners

  for (auto& agent : agents) {
    AgentRow row;
    row.name = agent.name;
    if (agent.actor) row.actor_digest = actor_digest(*agent.actor);
    std::vector<double> times;
    for (int lap = 0; lap < laps; ++lap) {
      std::mt19937_64 rng(util::derive_seed(c.eval_seed, static_cast<std::uint64_t>(lap)));
      const auto res = sim::run_episode(t, *agent.planner, rcfg, env, rng);
      ++row.laps;
      switch (res.outcome.terminal) {
        case sim::Terminal::LapComplete:
          ++row.completed;
          times.push_back(res.outcome.lap_time);
          break;
        case sim::Terminal::Crash: ++row.crashes; break;
        case sim::Terminal::Timeout: ++row.timeouts; break;
      }
      if (on_lap) on_lap(agent, lap, res);
    }
    if (!times.empty()) {
      double sum = 0.0;
      for (double x : times) sum += x;
      row.avg_lap_time = sum / static_cast<double>(times.size());
      if (times.size() > 1) {
        double ss = 0.0;
        for (double x : times) ss += (x - row.avg_lap_time) * (x - row.avg_lap_time);
        row.std_lap_time = std::sqrt(ss / static_cast<double>(times.size() - 1));
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

inline std::string format_report_csv(const BenchmarkReport& r) {
  std::string out =
      "benchmark,agent,laps,completed,crashes,timeouts,completion_rate,avg_lap_time,std_lap_time,actor_digest,"
      "config_digest\n";
  for (const auto& row : r.rows) {
    out += std::to_string(r.benchmark) + ',' + row.name + ',' + std::to_string(row.laps) + ',' +
           std::to_string(row.completed) + ',' + std::to_string(row.crashes) + ',' + std::to_string(row.timeouts) +
           ',' + util::shortest(row.completion_rate()) + ',' + util::shortest(row.avg_lap_time) + ',' +
           util::shortest(row.std_lap_time) + ',' + row.actor_digest + ',' + r.config_digest + '\n';
  }
  return out;
}

inline std::string format_report_txt(const BenchmarkReport& r) {
  std::string out = r.benchmark == 1 ? "Benchmark 1: lap time without obstacles\n"
                                     : "Benchmark 2: random obstacles\n";
  out += "config digest  " + r.config_digest + '\n';
  out += "eval seed      " + std::to_string(r.eval_seed) + '\n';
  out += "train seeds   ";
  for (auto s : r.seeds) out += ' ' + std::to_string(s);
  out += "\n\n";

  std::size_t w = 5;
  for (const auto& row : r.rows) w = std::max(w, row.name.size());
  auto pad = [](std::string s, std::size_t n, bool right) {
    if (s.size() >= n) return s;
    return right ? std::string(n - s.size(), ' ') + s : s + std::string(n - s.size(), ' ');
  };
  out += pad("agent", w, false) + "  " + pad("time [s]", 9, true) + "  " + pad("std", 6, true) + "  " +
         pad("done", 7, true) + "  " + pad("crashes", 7, true) + "  " + pad("laps", 5, true) + "  actor\n";
  for (const auto& row : r.rows) {
    const std::string time = row.completed ? util::fixed(row.avg_lap_time, 2) : "-";
    out += pad(row.name, w, false) + "  " + pad(time, 9, true) + "  " + pad(util::fixed(row.std_lap_time, 2), 6, true) +
           "  " + pad(util::fixed(row.completion_rate(), 1) + "%", 7, true) + "  " +
           pad(std::to_string(row.crashes), 7, true) + "  " + pad(std::to_string(row.laps), 5, true) + "  " +
           (row.actor_digest.empty() ? "-" : row.actor_digest) + '\n';
  }
  return out;
}

}  // namespace racelab::harness
