#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "racelab/learn/td3.hpp"
#include "racelab/plan/agents.hpp"
#include "racelab/sim/episode.hpp"
#include "racelab/util/seed.hpp"

namespace racelab::learn {

struct TrainOptions {
  Td3Config td3;
  sim::EnvConfig env;  // obstacles on: every training lap gets a fresh spawn
  reward::RewardConfig reward;
  double lookahead = 1.2;  // path follower, m
};

struct CurveRow {
  int episode = 0;
  long long steps = 0;  // environment steps at the end of the episode
  double cumulative_reward = 0.0;
  double lap_time = 0.0;  // only meaningful when completed
  sim::Terminal outcome = sim::Terminal::Timeout;
};

struct TrainResult {
  Mlp actor;
  std::vector<CurveRow> curve;
  long long env_steps = 0;
  long long updates = 0;
};

inline std::string format_curve_csv(const std::vector<CurveRow>& curve) {
  std::string out = "episode,steps,cumulative_reward,lap_time,outcome\n";
  for (const auto& r : curve) {
    out += std::to_string(r.episode) + ',' + std::to_string(r.steps) + ',' + util::shortest(r.cumulative_reward) +
           ',' + util::shortest(r.lap_time) + ',' + std::string(sim::to_string(r.outcome)) + '\n';
  }
  return out;
}

// Independent random streams under one training seed.
enum class Stream : std::uint64_t { Init = 1, Env = 2, Explore = 3, Update = 4 };

inline std::mt19937_64 stream(std::uint64_t seed, Stream s) {
  return std::mt19937_64(util::derive_seed(seed, static_cast<std::uint64_t>(s)));
}

/// Trains the modification planner's network on one track. An environment step
/// is one planner decision; after the warmup each step is followed by one TD3
/// update. The episode that crosses total_steps is run to its end, but no
/// updates happen past the budget.
inline TrainResult train(const track::Track& track, const TrainOptions& opt, std::uint64_t seed,
                         const std::function<void(const CurveRow&)>& on_episode = {}) {
  opt.td3.validate();
  opt.env.validate();
  opt.reward.validate();

  auto init_rng = stream(seed, Stream::Init);
  auto env_rng = stream(seed, Stream::Env);
  auto explore_rng = stream(seed, Stream::Explore);
  auto update_rng = stream(seed, Stream::Update);

  Td3 agent(opt.td3, init_rng);
  ReplayBuffer buffer(opt.td3.replay_capacity);
  TrainResult res;

  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, opt.td3.exploration_noise);
  auto policy = [&](const plan::Observation& o) {
    if (res.env_steps < opt.td3.warmup) return uniform(explore_rng);
    return std::clamp(agent.act(o) + noise(explore_rng), -1.0, 1.0);
  };
  plan::ModificationPlanner planner(track.min_curve_line, opt.lookahead, opt.env.vehicle, opt.env.lidar.max_range,
                                    policy);

  auto on_transition = [&](const Transition& t) {
    buffer.push(t);
    ++res.env_steps;
    if (res.env_steps > opt.td3.warmup && res.env_steps <= opt.td3.total_steps) {
      if (agent.update(buffer, update_rng).updated) ++res.updates;
    }
  };

  while (res.env_steps < opt.td3.total_steps) {
    const auto ep = sim::run_episode(track, planner, opt.reward, opt.env, env_rng, on_transition);
    CurveRow row;
    row.episode = static_cast<int>(res.curve.size());
    row.steps = res.env_steps;
    row.cumulative_reward = ep.cumulative_reward;
    row.outcome = ep.outcome.terminal;
    row.lap_time = row.outcome == sim::Terminal::LapComplete ? ep.outcome.lap_time : 0.0;
    res.curve.push_back(row);
    if (on_episode) on_episode(row);
  }
  res.actor = agent.actor();
  return res;
}

/// Deterministic policy from a trained actor.
inline plan::Policy greedy(const Mlp& actor) {
  if (actor.input_size() != static_cast<int>(plan::kObsSize) || actor.output_size() != 1) {
    throw LoadError("actor must map 14 inputs to 1 output");
  }
  return [&actor](const plan::Observation& o) {
    Matrix x(static_cast<Eigen::Index>(plan::kObsSize), 1);
    for (std::size_t k = 0; k < plan::kObsSize; ++k) x(static_cast<Eigen::Index>(k), 0) = o[k];
    return actor.forward(x)(0, 0);
  };
}

}  // namespace racelab::learn
