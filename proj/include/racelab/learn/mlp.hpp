#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/error.hpp"
#include "racelab/util/numfmt.hpp"

namespace racelab::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation { Tanh, Identity };

/// Parameter-shaped container, used for the network itself, its gradients and
/// the Adam moments.
struct Params {
  std::vector<Matrix> W;  // W[l] is out x in
  std::vector<Vector> b;

  void set_zero() {
    for (auto& w : W) w.setZero();
    for (auto& v : b) v.setZero();
  }
  Params zeros_like() const {
    Params z = *this;
    z.set_zero();
    return z;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
    return n;
  }
  bool all_finite() const {
    for (std::size_t l = 0; l < W.size(); ++l) {
      if (!W[l].allFinite() || !b[l].allFinite()) return false;
    }
    return true;
  }
  Params& operator+=(const Params& o) {
    for (std::size_t l = 0; l < W.size(); ++l) {
      W[l] += o.W[l];
      b[l] += o.b[l];
    }
    return *this;
  }
};

/// Fully connected network with ReLU hidden layers. Inputs and outputs are
/// column-per-sample: X is in x batch.
class Mlp {
 public:
  Mlp() = default;

  Mlp(std::vector<int> sizes, OutputActivation out) : sizes_(std::move(sizes)), out_(out) {
    if (sizes_.size() < 2) throw ParameterError("mlp needs at least an input and an output layer");
    for (int s : sizes_) {
      if (s <= 0) throw ParameterError("mlp layer sizes must be > 0");
    }
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      p_.W.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l]));
      p_.b.push_back(Vector::Zero(sizes_[l + 1]));
    }
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  template <class Rng>
  void init(Rng& rng) {
    for (std::size_t l = 0; l < p_.W.size(); ++l) {
      const double k = 1.0 / std::sqrt(static_cast<double>(p_.W[l].cols()));
      std::uniform_real_distribution<double> u(-k, k);
      // fill in a fixed order so the draw sequence never depends on storage layout
      for (Eigen::Index r = 0; r < p_.W[l].rows(); ++r) {
        for (Eigen::Index c = 0; c < p_.W[l].cols(); ++c) p_.W[l](r, c) = u(rng);
      }
      for (Eigen::Index r = 0; r < p_.b[l].size(); ++r) p_.b[l](r) = u(rng);
    }
  }

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return out_; }
  std::size_t layers() const { return p_.W.size(); }

  Params& params() { return p_; }
  const Params& params() const { return p_; }

  /// Pre-activations and activations of one forward pass, kept for backward.
  struct Cache {
    std::vector<Matrix> a;  // a[0] = input, a[l+1] = output of layer l
  };

  Matrix forward(const Matrix& X) const {
    Cache c;
    return forward(X, c);
  }

  Matrix forward(const Matrix& X, Cache& cache) const {
    if (X.rows() != input_size()) {
      throw ParameterError("mlp input has " + std::to_string(X.rows()) + " rows, expected " +
                           std::to_string(input_size()));
    }
    cache.a.resize(p_.W.size() + 1);
    cache.a[0] = X;
    for (std::size_t l = 0; l < p_.W.size(); ++l) {
      Matrix z = p_.W[l] * cache.a[l];
      z.colwise() += p_.b[l];
      if (l + 1 < p_.W.size()) {
        cache.a[l + 1] = z.cwiseMax(0.0);
      } else {
        cache.a[l + 1] = out_ == OutputActivation::Tanh ? Matrix(z.array().tanh()) : z;
      }
    }
    return cache.a.back();
  }

  /// Reverse-mode gradients of sum(dY .* Y) with respect to the parameters
  /// (accumulated over the batch) and the input.
  Params backward(const Cache& cache, const Matrix& dY, Matrix* dX = nullptr) const {
    const std::size_t L = p_.W.size();
    if (cache.a.size() != L + 1) throw ParameterError("mlp backward without a matching forward pass");
    if (dY.rows() != output_size() || dY.cols() != cache.a.back().cols()) {
      throw ParameterError("mlp output gradient has the wrong shape");
    }
    Params g = p_.zeros_like();
    Matrix delta = dY;
    if (out_ == OutputActivation::Tanh) {
      delta = delta.array() * (1.0 - cache.a.back().array().square());
    }
    for (std::size_t l = L; l-- > 0;) {
      g.W[l].noalias() = delta * cache.a[l].transpose();
      g.b[l] = delta.rowwise().sum();
      if (l == 0 && !dX) break;
      Matrix up = p_.W[l].transpose() * delta;
      if (l == 0) {
        *dX = std::move(up);
        break;
      }
      delta = up.array() * (cache.a[l].array() > 0.0).cast<double>();
    }
    return g;
  }

 private:
  std::vector<int> sizes_;
  OutputActivation out_ = OutputActivation::Identity;
  Params p_;
};

// ---- Adam ---------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Params m, v;
  long long t = 0;

  AdamState() = default;
  explicit AdamState(const Params& like) : m(like.zeros_like()), v(like.zeros_like()) {}
};

namespace detail {
template <class P, class G, class M>
void adam_block(P& p, const G& g, M& m, M& v, const AdamConfig& c, double bc1, double bc2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  p.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}
}  // namespace detail

/// One bias-corrected Adam step.
inline void adam_step(Params& p, const Params& g, AdamState& s, const AdamConfig& c) {
  ++s.t;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.t));
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    detail::adam_block(p.W[l], g.W[l], s.m.W[l], s.v.W[l], c, bc1, bc2);
    detail::adam_block(p.b[l], g.b[l], s.m.b[l], s.v.b[l], c, bc1, bc2);
  }
}

/// target <- tau * online + (1 - tau) * target
inline void soft_update(Params& target, const Params& online, double tau) {
  for (std::size_t l = 0; l < target.W.size(); ++l) {
    target.W[l] = tau * online.W[l] + (1.0 - tau) * target.W[l];
    target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
  }
}

// ---- snapshot -------------------------------------------------------------

inline std::string format_mlp(const Mlp& net) {
  std::string out = "RLMLP 1\nsizes";
  for (int s : net.sizes()) out += ' ' + std::to_string(s);
  out += net.output_activation() == OutputActivation::Tanh ? "\noutput tanh\n" : "\noutput identity\n";
  const auto& p = net.params();
  for (std::size_t l = 0; l < net.layers(); ++l) {
    out += "layer " + std::to_string(l) + '\n';
    for (Eigen::Index r = 0; r < p.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.W[l].cols(); ++c) {
        out += util::sig(p.W[l](r, c), 17);
        out += c + 1 < p.W[l].cols() ? ' ' : '\n';
      }
    }
    for (Eigen::Index r = 0; r < p.b[l].size(); ++r) {
      out += util::sig(p.b[l](r), 17);
      out += r + 1 < p.b[l].size() ? ' ' : '\n';
    }
  }
  return out;
}

inline Mlp parse_mlp(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || util::trim(line) != "RLMLP 1") throw LoadError("not a network snapshot");
  if (!std::getline(in, line) || line.rfind("sizes", 0) != 0) throw LoadError("snapshot: missing sizes");
  std::vector<int> sizes;
  {
    std::istringstream ls(line.substr(5));
    std::string tok;
    while (ls >> tok) sizes.push_back(static_cast<int>(util::parse_int(tok, "layer size")));
  }
  if (!std::getline(in, line)) throw LoadError("snapshot: missing output activation");
  OutputActivation act;
  if (util::trim(line) == "output tanh") act = OutputActivation::Tanh;
  else if (util::trim(line) == "output identity") act = OutputActivation::Identity;
  else throw LoadError("snapshot: bad output activation '" + line + "'");

  Mlp net;
  try {
    net = Mlp(sizes, act);
  } catch (const ParameterError& e) {
    throw LoadError(std::string("snapshot: ") + e.what());
  }
  auto& p = net.params();
  std::string tok;
  auto next = [&](const char* what) {
    if (!(in >> tok)) throw LoadError(std::string("snapshot truncated reading ") + what);
    try {
      return util::parse_double(tok, what);
    } catch (const FormatError& e) {
      throw LoadError(e.what());
    }
  };
  for (std::size_t l = 0; l < net.layers(); ++l) {
    std::string kw;
    long long idx = -1;
    if (!(in >> kw >> idx) || kw != "layer" || idx != static_cast<long long>(l)) {
      throw LoadError("snapshot: expected 'layer " + std::to_string(l) + "'");
    }
    for (Eigen::Index r = 0; r < p.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.W[l].cols(); ++c) p.W[l](r, c) = next("weight");
    }
    for (Eigen::Index r = 0; r < p.b[l].size(); ++r) p.b[l](r) = next("bias");
  }
  if (in >> tok) throw LoadError("snapshot: trailing data");
  if (!p.all_finite()) throw LoadError("snapshot: non-finite parameter");
  return net;
}

inline void save_mlp(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_mlp(net);
  if (!out) throw IoError("write failed: " + path.string());
}

inline Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open snapshot " + path.string());
  return parse_mlp(in);
}

}  // namespace racelab::learn
