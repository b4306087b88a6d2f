#ifndef MBRL_NUMERICS_HPP
#define MBRL_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace mbrl {

/// Thrown when a computation receives or produces non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded random stream. All stochastic code in this project draws from an
/// RngStream instance; identical seeds give identical draw sequences on any
/// platform (the uniform mapping is fixed, not implementation-defined).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  /// Uniform draw in [0, 1).
  double uniform() {
    if (!scripted_.empty()) {
      double v = scripted_.front();
      scripted_.pop_front();
      return v;
    }
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal via Box-Muller (no cached second value).
  double normal(double mean, double stddev) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + stddev * z;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    return gen_() % n;
  }

  std::uint64_t seed() const { return seed_; }

  /// Test hook: queue exact values to be returned by the next uniform() calls.
  void script_uniform(std::initializer_list<double> values) {
    scripted_.insert(scripted_.end(), values.begin(), values.end());
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::deque<double> scripted_;
};

/// Derives an independent stream seed from a master seed (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Activation { Identity, Tanh, Relu };

/// Fully connected feed-forward network with explicit parameters and exact
/// reverse-mode gradients. Hidden layers share one activation; the output
/// layer has its own (Identity or Tanh).
class Mlp {
 public:
  Mlp() = default;

  /// Weights initialized uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)],
  /// biases zero.
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
      RngStream& rng);

  std::vector<double> forward(std::span<const double> input) const;

  struct Gradients {
    std::vector<double> params;  // same layout as parameters()
    std::vector<double> input;
  };

  /// Gradients of dot(output, output_gradient) w.r.t. all parameters and the
  /// input. Pure; runs its own forward pass.
  Gradients backprop(std::span<const double> input,
                     std::span<const double> output_gradient) const;

  /// Allocation-free variant for the training hot loops: parameter gradients
  /// are added into `param_grad_sink` (pass an empty span to skip them); the
  /// input gradient is written to `input_gradient` when non-null.
  void backprop_accumulate(std::span<const double> input,
                           std::span<const double> output_gradient,
                           std::span<double> param_grad_sink,
                           std::vector<double>* input_gradient = nullptr) const;

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  /// Flat parameter vector: per layer, row-major weights then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  bool same_architecture(const Mlp& other) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;
  Activation hidden_act_ = Activation::Tanh;
  Activation output_act_ = Activation::Identity;

  double activate(double x, Activation a) const;
  double activate_grad(double pre, double post, Activation a) const;
};

/// Bias-corrected adaptive-moment optimizer state for one parameter vector.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n) : first_moment(n, 0.0), second_moment(n, 0.0) {}
  void reset();
};

/// One in-place update. Throws NumericError on non-finite gradient entries.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate);

}  // namespace mbrl

#endif  // MBRL_NUMERICS_HPP
