#include <gtest/gtest.h>

#include <random>

#include "racelab/learn/train.hpp"
#include "support.hpp"

namespace racelab {
namespace {

using testing::asset;

const track::Track& oval() {
  static const track::Track t = track::load_track(asset("oval.grid"));
  return t;
}

class FullLeft : public sim::Planner {
 public:
  sim::Decision decide(const sim::VehicleState&, const std::vector<double>&) override {
    return {{1.0, 0.5}, std::nullopt, {}};
  }
};

TEST(Episode, PurePursuitCompletesTheOval) {
  const auto& t = oval();
  plan::PurePursuitPlanner pp(t.min_curve_line, 1.2, {});
  reward::RewardConfig rcfg;
  rcfg.reference = reward::Reference::MinCurvature;  // cross-track error against the followed line
  std::mt19937_64 rng(1);
  const auto res = sim::run_episode(t, pp, rcfg, {}, rng);
  ASSERT_EQ(res.outcome.terminal, sim::Terminal::LapComplete);
  EXPECT_DOUBLE_EQ(res.outcome.lap_time, static_cast<double>(res.outcome.step_count) * 0.01);
  EXPECT_EQ(res.outcome.trajectory.size(), res.outcome.step_count + 1);
  EXPECT_LT(res.max_cross_track, 0.3);
  EXPECT_DOUBLE_EQ(res.log.back().reward, 1.0);
  EXPECT_TRUE(res.transitions.empty());
}

TEST(Episode, SteeringHardLeftCrashes) {
  FullLeft planner;
  std::mt19937_64 rng(1);
  const auto res = sim::run_episode(oval(), planner, {}, {}, rng);
  EXPECT_EQ(res.outcome.terminal, sim::Terminal::Crash);
  EXPECT_EQ(res.log.back().reward, -1.0);
  EXPECT_EQ(res.log.size(), res.decisions);
}

TEST(Episode, CumulativeRewardIsTheSumOfLoggedRewards) {
  const auto& t = oval();
  plan::PurePursuitPlanner pp(t.min_curve_line, 1.2, {});
  std::mt19937_64 rng(3);
  const auto res = sim::run_episode(t, pp, {}, {}, rng);
  double sum = 0.0;
  for (const auto& row : res.log) sum += row.reward;
  EXPECT_NEAR(res.cumulative_reward, sum, 1e-12);
}

TEST(Episode, TransitionsChainAndTerminate) {
  const auto& t = oval();
  // a constant right-hand correction drives the car into the outer wall
  plan::ModificationPlanner planner(t.min_curve_line, 1.2, {}, 10.0, [](const plan::Observation&) { return -1.0; });
  std::mt19937_64 rng(1);
  std::size_t seen = 0;
  const auto res = sim::run_episode(t, planner, {}, {}, rng, [&](const learn::Transition&) { ++seen; });
  ASSERT_EQ(res.outcome.terminal, sim::Terminal::Crash);
  ASSERT_EQ(res.transitions.size(), res.decisions);
  EXPECT_EQ(seen, res.decisions);
  for (std::size_t i = 0; i + 1 < res.transitions.size(); ++i) {
    EXPECT_EQ(res.transitions[i].next_obs, res.transitions[i + 1].obs);
    EXPECT_FALSE(res.transitions[i].done);
    EXPECT_EQ(res.transitions[i].reward, res.log[i].reward);
  }
  EXPECT_TRUE(res.transitions.back().done);
  EXPECT_EQ(res.transitions.back().reward, -1.0);
}

TEST(Episode, SameSeedSameRun) {
  const auto& t = oval();
  sim::EnvConfig env;
  env.obstacles = true;
  plan::FgmPlanner fgm({}, {});
  std::mt19937_64 a(11), b(11);
  const auto ra = sim::run_episode(t, fgm, {}, env, a);
  const auto rb = sim::run_episode(t, fgm, {}, env, b);
  EXPECT_EQ(sim::format_trajectory_csv(ra), sim::format_trajectory_csv(rb));
  EXPECT_EQ(ra.obstacles.size(), rb.obstacles.size());
  EXPECT_FALSE(ra.obstacles.empty());
}

TEST(Episode, TimeoutIsReported) {
  const auto& t = oval();
  sim::EnvConfig env;
  env.timeout = 0.5;
  plan::PurePursuitPlanner pp(t.min_curve_line, 1.2, {});
  std::mt19937_64 rng(1);
  const auto res = sim::run_episode(t, pp, {}, env, rng);
  EXPECT_EQ(res.outcome.terminal, sim::Terminal::Timeout);
  EXPECT_EQ(res.outcome.step_count, 50u);
}

learn::TrainOptions tiny() {
  learn::TrainOptions o;
  o.td3.hidden = 16;
  o.td3.batch = 16;
  o.td3.warmup = 100;
  o.td3.total_steps = 400;
  o.env.obstacles = true;
  return o;
}

TEST(Training, SameSeedIdenticalCurveAndActor) {
  const auto a = learn::train(oval(), tiny(), 5);
  const auto b = learn::train(oval(), tiny(), 5);
  EXPECT_EQ(learn::format_curve_csv(a.curve), learn::format_curve_csv(b.curve));
  EXPECT_EQ(learn::format_mlp(a.actor), learn::format_mlp(b.actor));
  const auto c = learn::train(oval(), tiny(), 6);
  EXPECT_NE(learn::format_mlp(a.actor), learn::format_mlp(c.actor));
}

TEST(Training, StepBudgetAndUpdateCount) {
  const auto opt = tiny();
  const auto r = learn::train(oval(), opt, 2);
  EXPECT_GE(r.env_steps, opt.td3.total_steps);
  EXPECT_EQ(r.updates, opt.td3.total_steps - opt.td3.warmup);
  EXPECT_EQ(r.curve.back().steps, r.env_steps);
  for (std::size_t i = 0; i < r.curve.size(); ++i) EXPECT_EQ(r.curve[i].episode, static_cast<int>(i));
}

TEST(Training, ZeroBudgetReturnsTheInitialActor) {
  auto opt = tiny();
  opt.td3.total_steps = 0;
  const auto r = learn::train(oval(), opt, 9);
  EXPECT_TRUE(r.curve.empty());
  auto init = learn::stream(9, learn::Stream::Init);
  const learn::Td3 fresh(opt.td3, init);
  EXPECT_EQ(learn::format_mlp(r.actor), learn::format_mlp(fresh.actor()));
}

TEST(Training, GreedyPolicyChecksShape) {
  const learn::Mlp wrong({3, 4, 1}, learn::OutputActivation::Tanh);
  EXPECT_THROW(learn::greedy(wrong), LoadError);
}

}  // namespace
}  // namespace racelab
