#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/learn/mlp.hpp"
#include "racelab/learn/transition.hpp"

namespace racelab::learn {

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000) : capacity_(capacity) {
    if (capacity == 0) throw ParameterError("replay capacity must be > 0");
  }

  void push(const Transition& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  /// Uniform indices, with replacement.
  template <class Rng>
  std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n) const {
    if (data_.empty()) throw ParameterError("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.005;
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  int policy_delay = 2;
  double exploration_noise = 0.1;
  std::size_t batch = 100;
  long long total_steps = 100'000;
  long long warmup = 1000;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int hidden = 200;
  std::size_t replay_capacity = 1'000'000;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must be in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ParameterError("tau must be in (0, 1]");
    if (policy_delay < 1) throw ParameterError("policy_delay must be >= 1");
    if (batch == 0 || hidden <= 0 || total_steps < 0 || warmup < 0) {
      throw ParameterError("batch, hidden, total_steps and warmup must be positive");
    }
    if (!(policy_noise >= 0.0 && noise_clip >= 0.0 && exploration_noise >= 0.0)) {
      throw ParameterError("noise parameters must be >= 0");
    }
    if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ParameterError("learning rates must be > 0");
  }
};

struct UpdateStats {
  bool updated = false;
  bool actor_updated = false;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  std::string note;
};

/// Batch matrices from transitions: observations as columns.
struct Batch {
  Matrix obs, next_obs;  // 14 x B
  Matrix action;         // 1 x B
  Vector reward, not_done;
};

inline Batch make_batch(const ReplayBuffer& buf, const std::vector<std::size_t>& idx) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  constexpr auto D = static_cast<Eigen::Index>(plan::kObsSize);
  Batch b{Matrix(D, B), Matrix(D, B), Matrix(1, B), Vector(B), Vector(B)};
  for (Eigen::Index j = 0; j < B; ++j) {
    const Transition& t = buf[idx[j]];
    for (Eigen::Index k = 0; k < D; ++k) {
      b.obs(k, j) = t.obs[k];
      b.next_obs(k, j) = t.next_obs[k];
    }
    b.action(0, j) = t.action.a_nn;
    b.reward(j) = t.reward;
    b.not_done(j) = t.done ? 0.0 : 1.0;
  }
  return b;
}

inline Matrix stack(const Matrix& obs, const Matrix& action) {
  Matrix x(obs.rows() + action.rows(), obs.cols());
  x << obs, action;
  return x;
}

/// Twin critics, a deterministic actor and their target copies.
class Td3 {
 public:
  template <class Rng>
  Td3(const Td3Config& cfg, Rng& init_rng) : cfg_(cfg) {
    cfg_.validate();
    const int obs = static_cast<int>(plan::kObsSize), h = cfg.hidden;
    actor_ = Mlp({obs, h, h, 1}, OutputActivation::Tanh);
    critic1_ = Mlp({obs + 1, h, h, 1}, OutputActivation::Identity);
    critic2_ = Mlp({obs + 1, h, h, 1}, OutputActivation::Identity);
    actor_.init(init_rng);
    critic1_.init(init_rng);
    critic2_.init(init_rng);
    actor_t_ = actor_;
    critic1_t_ = critic1_;
    critic2_t_ = critic2_;
    actor_opt_ = AdamState(actor_.params());
    critic1_opt_ = AdamState(critic1_.params());
    critic2_opt_ = AdamState(critic2_.params());
  }

  const Td3Config& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  Mlp& actor() { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& actor_target() const { return actor_t_; }
  const Mlp& critic1_target() const { return critic1_t_; }
  const Mlp& critic2_target() const { return critic2_t_; }
  long long updates() const { return updates_; }

  double act(const plan::Observation& o) const {
    Matrix x(static_cast<Eigen::Index>(plan::kObsSize), 1);
    for (std::size_t k = 0; k < plan::kObsSize; ++k) x(static_cast<Eigen::Index>(k), 0) = o[k];
    return actor_.forward(x)(0, 0);
  }

  /// Bootstrapped regression target r + gamma * (1 - done) * min(Q1', Q2').
  template <class Rng>
  Vector target_q(const Batch& b, Rng& rng) const {
    Matrix next_a = actor_t_.forward(b.next_obs);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index j = 0; j < next_a.cols(); ++j) {
      const double n = std::clamp(cfg_.policy_noise * noise(rng), -cfg_.noise_clip, cfg_.noise_clip);
      next_a(0, j) = std::clamp(next_a(0, j) + n, -1.0, 1.0);
    }
    const Matrix x = stack(b.next_obs, next_a);
    const Matrix q1 = critic1_t_.forward(x), q2 = critic2_t_.forward(x);
    const Vector q = q1.cwiseMin(q2).transpose();
    return b.reward + cfg_.gamma * b.not_done.cwiseProduct(q);
  }

  template <class Rng>
  UpdateStats update(const ReplayBuffer& buf, Rng& rng) {
    UpdateStats st;
    if (buf.size() < cfg_.batch) {
      st.note = "replay holds " + std::to_string(buf.size()) + " < batch " + std::to_string(cfg_.batch);
      return st;
    }
    return update_on(make_batch(buf, buf.sample_indices(rng, cfg_.batch)), rng);
  }

  template <class Rng>
  UpdateStats update_on(const Batch& b, Rng& rng) {
    UpdateStats st;
    st.updated = true;
    ++updates_;
    const double B = static_cast<double>(b.obs.cols());
    const Vector y = target_q(b, rng);

    const Matrix x = stack(b.obs, b.action);
    st.critic_loss = 0.0;
    for (auto [net, opt] : {std::pair{&critic1_, &critic1_opt_}, std::pair{&critic2_, &critic2_opt_}}) {
      Mlp::Cache c;
      const Matrix q = net->forward(x, c);
      const Matrix err = q - y.transpose();
      st.critic_loss += err.squaredNorm() / B;
      const Params g = net->backward(c, 2.0 * err / B);
      adam_step(net->params(), g, *opt, {cfg_.critic_lr});
    }

    if (updates_ % cfg_.policy_delay == 0) {
      st.actor_updated = true;
      Mlp::Cache ca, cq;
      const Matrix a = actor_.forward(b.obs, ca);
      const Matrix q = critic1_.forward(stack(b.obs, a), cq);
      st.actor_loss = -q.sum() / B;
      Matrix dx;
      critic1_.backward(cq, Matrix::Constant(1, q.cols(), -1.0 / B), &dx);
      const Params g = actor_.backward(ca, dx.bottomRows(1));
      adam_step(actor_.params(), g, actor_opt_, {cfg_.actor_lr});

      soft_update(critic1_t_.params(), critic1_.params(), cfg_.tau);
      soft_update(critic2_t_.params(), critic2_.params(), cfg_.tau);
      soft_update(actor_t_.params(), actor_.params(), cfg_.tau);
    }

    for (const Mlp* n : {&actor_, &critic1_, &critic2_}) {
      if (!n->params().all_finite()) {
        throw Error("non-finite network parameter after update " + std::to_string(updates_));
      }
    }
    return st;
  }

 private:
  Td3Config cfg_;
  Mlp actor_, critic1_, critic2_;
  Mlp actor_t_, critic1_t_, critic2_t_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  long long updates_ = 0;
};

}  // namespace racelab::learn
