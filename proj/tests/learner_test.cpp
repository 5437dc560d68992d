#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "racelab/learn/td3.hpp"

namespace racelab::learn {
namespace {

/// The same check the slow way: perturb the stored parameter and run forward.
double worst_relative_error_full(Mlp net, const Matrix& X, const Matrix& dY) {
  Mlp::Cache c;
  net.forward(X, c);
  const Params g = net.backward(c, dY);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double& w, double analytic) {
    const double keep = w;
    w = keep + h;
    const double up = loss(net, X, dY);
    w = keep - h;
    const double down = loss(net, X, dY);
    w = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd) + std::abs(analytic)));
  };
  auto& p = net.params();
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    for (Eigen::Index i = 0; i < p.W[l].size(); ++i) check(p.W[l].data()[i], g.W[l].data()[i]);
    for (Eigen::Index i = 0; i < p.b[l].size(); ++i) check(p.b[l](i), g.b[l](i));
  }
  return worst;
}

TEST(Mlp, ZeroNetworkOutputsZero) {
  const Mlp net({14, 200, 200, 1}, OutputActivation::Tanh);
  const Matrix y = net.forward(Matrix::Ones(14, 3));
  EXPECT_TRUE((y.array() == 0.0).all());
}

TEST(Mlp, SingleWeightClosedForm) {
  Mlp net({1, 1}, OutputActivation::Tanh);
  net.params().W[0](0, 0) = 0.7;
  Matrix x(1, 1);
  x(0, 0) = 1.3;
  EXPECT_DOUBLE_EQ(net.forward(x)(0, 0), std::tanh(0.7 * 1.3));
}

TEST(Mlp, EqualColumnsGiveEqualOutputs) {
  std::mt19937_64 rng(4);
  Mlp net({15, 20, 20, 1}, OutputActivation::Identity);
  net.init(rng);
  const Matrix col = random_matrix(rng, 15, 1);
  const Matrix X = col.replicate(1, 5);
  const Matrix y = net.forward(X);
  for (int j = 1; j < 5; ++j) EXPECT_EQ(y(0, j), y(0, 0));
}

TEST(Mlp, RejectsWrongInputSize) {
  const Mlp net({14, 4, 1}, OutputActivation::Tanh);
  EXPECT_THROW(net.forward(Matrix::Zero(13, 1)), ParameterError);
  Mlp::Cache c;
  net.forward(Matrix::Zero(14, 2), c);
  EXPECT_THROW(net.backward(c, Matrix::Zero(1, 3)), ParameterError);
  EXPECT_THROW(Mlp({3}, OutputActivation::Tanh), ParameterError);
}

TEST(Mlp, GradientsMatchFiniteDifferencesOnFullSizeNets) {
  for (const auto& [sizes, act] : {std::pair{std::vector<int>{14, 200, 200, 1}, OutputActivation::Tanh},
                                   std::pair{std::vector<int>{15, 200, 200, 1}, OutputActivation::Identity}}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      Mlp net(sizes, act);
      net.init(rng);
      const Matrix X = random_matrix(rng, sizes.front(), 3);
      const Matrix dY = random_matrix(rng, 1, 3);
      EXPECT_LT(worst_relative_error(net, X, dY), 1e-4) << "seed " << seed << " in " << sizes.front();
    }
  }
}

TEST(Mlp, GradientsMatchFiniteDifferencesOnRandomShapes) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> width(1, 9), depth(1, 3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> sizes{width(rng)};
    for (int d = depth(rng); d > 0; --d) sizes.push_back(width(rng));
    sizes.push_back(width(rng));
    Mlp net(sizes, trial % 2 ? OutputActivation::Tanh : OutputActivation::Identity);
    net.init(rng);
    const Matrix X = random_matrix(rng, sizes.front(), 4, 2.0);
    const Matrix dY = random_matrix(rng, sizes.back(), 4);
    EXPECT_LT(worst_relative_error(net, X, dY), 1e-4) << "trial " << trial;
    EXPECT_LT(worst_relative_error_full(net, X, dY), 1e-4) << "trial " << trial;
  }
}

TEST(Mlp, IncrementalCheckCatchesAWrongGradient) {
  // guard for the shortcut above: a corrupted network must still be caught
  std::mt19937_64 rng(13);
  Mlp net({5, 7, 7, 1}, OutputActivation::Tanh);
  net.init(rng);
  const Matrix X = random_matrix(rng, 5, 3), dY = random_matrix(rng, 1, 3);
  Mlp::Cache c;
  net.forward(X, c);
  const FiniteDifference fd(net, X, dY);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    Params g = net.backward(c, dY);
    EXPECT_LT(fd.worst_relative_error(g), 1e-4);
    g.W[l](0, 0) += 1e-3;
    EXPECT_GT(fd.worst_relative_error(g), 1e-4) << "layer " << l;
    g.W[l](0, 0) -= 1e-3;
    g.b[l](0) -= 1e-3;
    EXPECT_GT(fd.worst_relative_error(g), 1e-4) << "layer " << l;
  }
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  Mlp net({15, 30, 30, 1}, OutputActivation::Identity);
  net.init(rng);
  Matrix X = random_matrix(rng, 15, 2);
  const Matrix dY = random_matrix(rng, 1, 2);
  Mlp::Cache c;
  net.forward(X, c);
  Matrix dX;
  net.backward(c, dY, &dX);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double keep = X.data()[i];
    X.data()[i] = keep + 1e-5;
    const double up = loss(net, X, dY);
    X.data()[i] = keep - 1e-5;
    const double down = loss(net, X, dY);
    X.data()[i] = keep;
    EXPECT_NEAR(dX.data()[i], (up - down) / 2e-5, 1e-6);
  }
}

TEST(Mlp, ZeroOutputGradientGivesZeroGradients) {
  std::mt19937_64 rng(6);
  Mlp net({14, 20, 20, 1}, OutputActivation::Tanh);
  net.init(rng);
  Mlp::Cache c;
  net.forward(random_matrix(rng, 14, 5), c);
  const Params g = net.backward(c, Matrix::Zero(1, 5));
  for (std::size_t l = 0; l < g.W.size(); ++l) {
    EXPECT_TRUE((g.W[l].array() == 0.0).all());
    EXPECT_TRUE((g.b[l].array() == 0.0).all());
  }
}

TEST(Mlp, BatchGradientIsSumOfSampleGradients) {
  std::mt19937_64 rng(7);
  Mlp net({6, 12, 12, 1}, OutputActivation::Tanh);
  net.init(rng);
  const Matrix X = random_matrix(rng, 6, 4), dY = random_matrix(rng, 1, 4);
  Mlp::Cache c;
  net.forward(X, c);
  const Params whole = net.backward(c, dY);
  Params sum = net.params().zeros_like();
  for (int j = 0; j < 4; ++j) {
    Mlp::Cache cj;
    net.forward(X.col(j), cj);
    sum += net.backward(cj, dY.col(j));
  }
  for (std::size_t l = 0; l < sum.W.size(); ++l) {
    EXPECT_LT((whole.W[l] - sum.W[l]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((whole.b[l] - sum.b[l]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mlp, ActorOutputStaysInUnitIntervalForHugeWeights) {
  std::mt19937_64 rng(8);
  Mlp net({14, 16, 16, 1}, OutputActivation::Tanh);
  net.init(rng);
  for (auto& w : net.params().W) w *= 1e3;
  const Matrix y = net.forward(random_matrix(rng, 14, 200));
  EXPECT_LE(y.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Adam, ZeroGradientIsAFixedPoint) {
  std::mt19937_64 rng(1);
  Mlp net({3, 4, 1}, OutputActivation::Identity);
  net.init(rng);
  AdamState s(net.params());
  const Params before = net.params();
  adam_step(net.params(), net.params().zeros_like(), s, {});
  EXPECT_EQ(net.params().W[0], before.W[0]);
  EXPECT_EQ(net.params().b[1], before.b[1]);
}

TEST(Adam, ZeroGradientDecaysMoments) {
  Mlp net({1, 1}, OutputActivation::Identity);
  AdamState s(net.params());
  Params g = net.params().zeros_like();
  g.W[0](0, 0) = 2.0;
  adam_step(net.params(), g, s, {});
  const double m = s.m.W[0](0, 0), v = s.v.W[0](0, 0);
  adam_step(net.params(), net.params().zeros_like(), s, {});
  EXPECT_EQ(s.m.W[0](0, 0), 0.9 * m);
  EXPECT_EQ(s.v.W[0](0, 0), 0.999 * v);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  Mlp net({1, 1}, OutputActivation::Identity);
  AdamState s(net.params());
  Params g = net.params().zeros_like();
  g.W[0](0, 0) = 3.7;
  g.b[0](0) = -0.02;
  const AdamConfig c{0.01};
  double step = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const double before = net.params().W[0](0, 0);
    adam_step(net.params(), g, s, c);
    step = before - net.params().W[0](0, 0);
  }
  EXPECT_NEAR(step, c.lr, 1e-8);
  EXPECT_GT(net.params().b[0](0), 0.0);
}

TEST(Adam, SeededRunsAreBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(3);
    Mlp net({5, 8, 1}, OutputActivation::Tanh);
    net.init(rng);
    AdamState s(net.params());
    for (int i = 0; i < 50; ++i) {
      Mlp::Cache c;
      net.forward(random_matrix(rng, 5, 4), c);
      adam_step(net.params(), net.backward(c, random_matrix(rng, 1, 4)), s, {});
    }
    return format_mlp(net);
  };
  EXPECT_EQ(run(), run());
}

Transition tagged(double tag) {
  Transition t;
  t.obs.fill(tag);
  t.next_obs.fill(tag);
  t.reward = tag;
  return t;
}

TEST(Replay, RingKeepsOnlyTheNewest) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 12; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 5u);
  std::mt19937_64 rng(2);
  for (std::size_t i : buf.sample_indices(rng, 1000)) EXPECT_GE(buf[i].reward, 7.0);
  EXPECT_THROW(ReplayBuffer(0), ParameterError);
  EXPECT_THROW(ReplayBuffer(3).sample_indices(rng, 1), ParameterError);
}

TEST(Replay, SamplingIsUniform) {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.push(tagged(i));
  std::mt19937_64 rng(11);
  std::vector<int> count(100, 0);
  for (std::size_t i : buf.sample_indices(rng, 100'000)) ++count[static_cast<std::size_t>(buf[i].reward)];
  double chi2 = 0.0;
  for (int c : count) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  // 99 degrees of freedom: the 0.999 quantile is about 148.2
  EXPECT_LT(chi2, 148.2);
}

Td3Config small_config() {
  Td3Config c;
  c.hidden = 32;
  c.batch = 8;
  return c;
}

ReplayBuffer filled(std::mt19937_64& rng, int n, bool done) {
  ReplayBuffer buf;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < n; ++i) {
    Transition t;
    for (auto& x : t.obs) x = u(rng);
    for (auto& x : t.next_obs) x = u(rng);
    t.action.a_nn = u(rng);
    t.reward = u(rng);
    t.done = done;
    buf.push(t);
  }
  return buf;
}

TEST(Td3, TooSmallBufferIsANoOp) {
  std::mt19937_64 rng(1);
  Td3 agent(small_config(), rng);
  const std::string before = format_mlp(agent.actor());
  auto buf = filled(rng, 7, false);
  const auto st = agent.update(buf, rng);
  EXPECT_FALSE(st.updated);
  EXPECT_FALSE(st.note.empty());
  EXPECT_EQ(format_mlp(agent.actor()), before);
  EXPECT_EQ(agent.updates(), 0);
}

TEST(Td3, DoneTransitionsDoNotBootstrap) {
  std::mt19937_64 rng(2);
  Td3 agent(small_config(), rng);
  auto buf = filled(rng, 20, true);
  std::vector<std::size_t> idx(20);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Batch b = make_batch(buf, idx);
  EXPECT_EQ(agent.target_q(b, rng), b.reward);
}

TEST(Td3, FullBlendCopiesOnlineNetworks) {
  std::mt19937_64 rng(3);
  Td3Config c = small_config();
  c.tau = 1.0;
  c.policy_delay = 1;
  Td3 agent(c, rng);
  auto buf = filled(rng, 50, false);
  agent.update(buf, rng);
  EXPECT_EQ(format_mlp(agent.actor_target()), format_mlp(agent.actor()));
  EXPECT_EQ(format_mlp(agent.critic1_target()), format_mlp(agent.critic1()));
  EXPECT_EQ(format_mlp(agent.critic2_target()), format_mlp(agent.critic2()));
}

TEST(Td3, SoftUpdateIsAConvexBlend) {
  std::mt19937_64 rng(4);
  Mlp a({4, 6, 1}, OutputActivation::Identity), b({4, 6, 1}, OutputActivation::Identity);
  a.init(rng);
  b.init(rng);
  Params t = a.params();
  soft_update(t, b.params(), 0.3);
  for (std::size_t l = 0; l < t.W.size(); ++l) {
    const auto lo = a.params().W[l].cwiseMin(b.params().W[l]).array();
    const auto hi = a.params().W[l].cwiseMax(b.params().W[l]).array();
    EXPECT_TRUE((t.W[l].array() >= lo).all() && (t.W[l].array() <= hi).all());
  }
}

TEST(Td3, DelayedActorUpdates) {
  std::mt19937_64 rng(5);
  Td3 agent(small_config(), rng);
  auto buf = filled(rng, 50, false);
  EXPECT_FALSE(agent.update(buf, rng).actor_updated);
  EXPECT_TRUE(agent.update(buf, rng).actor_updated);
  EXPECT_FALSE(agent.update(buf, rng).actor_updated);
}

TEST(Td3, OverfitsASingleTransition) {
  std::mt19937_64 rng(6);
  Td3Config c = small_config();
  c.batch = 1;
  Td3 agent(c, rng);
  auto buf = filled(rng, 1, false);
  const double first = agent.update(buf, rng).critic_loss;
  double last = first;
  for (int i = 0; i < 100; ++i) last = agent.update(buf, rng).critic_loss;
  EXPECT_LT(last, first);
  EXPECT_TRUE(agent.actor().params().all_finite());
}

TEST(Td3, ActorStepRaisesCriticValue) {
  // with the critics frozen by a tiny critic rate, one actor step must not lower Q1(s, pi(s))
  std::mt19937_64 rng(7);
  Td3Config c = small_config();
  c.policy_delay = 1;
  c.critic_lr = 1e-12;
  c.batch = 32;
  Td3 agent(c, rng);
  auto buf = filled(rng, 32, false);
  std::vector<std::size_t> idx(32);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Batch b = make_batch(buf, idx);
  auto value = [&] { return agent.critic1().forward(stack(b.obs, agent.actor().forward(b.obs))).sum(); };
  const double before = value();
  agent.update_on(b, rng);
  EXPECT_GT(value(), before);
}

TEST(Td3, RejectsBadConfig) {
  std::mt19937_64 rng(1);
  Td3Config c;
  c.gamma = 1.0;
  EXPECT_THROW(Td3(c, rng), ParameterError);
  c = {};
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.policy_delay = 0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Snapshot, RoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  Mlp net({14, 200, 200, 1}, OutputActivation::Tanh);
  net.init(rng);
  net.params().b[2](0) = 1e-300;
  net.params().W[1](3, 4) = -0.1;
  std::istringstream in(format_mlp(net));
  const Mlp back = parse_mlp(in);
  EXPECT_EQ(back.sizes(), net.sizes());
  for (std::size_t l = 0; l < net.layers(); ++l) {
    EXPECT_EQ(back.params().W[l], net.params().W[l]);
    EXPECT_EQ(back.params().b[l], net.params().b[l]);
  }
  EXPECT_EQ(format_mlp(back), format_mlp(net));
}

TEST(Snapshot, RejectsDamagedFiles) {
  Mlp net({2, 2, 1}, OutputActivation::Identity);
  const std::string good = format_mlp(net);
  for (const std::string& bad :
       {std::string("RLMLP 2\n"), good.substr(0, good.size() - 4), good + "7\n", std::string("sizes 1 1\n"),
        std::string("RLMLP 1\nsizes 2 0 1\noutput tanh\n")}) {
    std::istringstream in(bad);
    EXPECT_THROW(parse_mlp(in), LoadError) << bad;
  }
  EXPECT_THROW(load_mlp("/nonexistent/actor.txt"), LoadError);
}

}  // namespace
}  // namespace racelab::learn
