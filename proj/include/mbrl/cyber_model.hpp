#ifndef MBRL_CYBER_MODEL_HPP
#define MBRL_CYBER_MODEL_HPP

#include <span>
#include <vector>

#include "mbrl/envs.hpp"
#include "mbrl/numerics.hpp"

namespace mbrl {

/// Streaming per-dimension mean/variance (Welford). Variance uses the
/// population denominator (count). Dimensions with variance below 1e-12
/// normalize with divisor 1.
class Normalizer {
 public:
  explicit Normalizer(std::size_t dim);

  void update(std::span<const double> sample);
  std::vector<double> normalize(std::span<const double> x) const;
  std::vector<double> denormalize(std::span<const double> x) const;

  long count() const { return count_; }
  std::size_t dim() const { return mean_.size(); }
  double mean(std::size_t i) const { return mean_[i]; }
  double variance(std::size_t i) const;
  bool ready() const { return count_ >= 2; }
  void reset();

 private:
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> sq_diff_;  // sum of squared deviations (Welford M2)

  double divisor(std::size_t i) const;
};

struct DynamicsModelConfig {
  std::vector<std::size_t> hidden{64};
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
};

/// Learned dynamics: a normalized MLP predicting state deltas,
/// next = state + denormalize(net(normalize(state (+) action))).
class DynamicsModel {
 public:
  DynamicsModel(const EnvSpec& spec, const DynamicsModelConfig& config, std::uint64_t seed);

  /// Fits mean-squared error on normalized deltas. The normalizers are
  /// recomputed from `data` before training, so normalization always matches
  /// the fitted dataset. Returns the per-epoch mean loss trace.
  std::vector<double> fit(std::span<const Transition> data, int epochs);

  /// One-step prediction, clipped to the state box. Requires a prior fit
  /// (normalizers with count >= 2).
  std::vector<double> predict_next(std::span<const double> state,
                                   std::span<const double> action) const;

  bool fitted() const { return input_normalizer_.ready() && delta_normalizer_.ready(); }

  const Normalizer& input_normalizer() const { return input_normalizer_; }
  const Normalizer& delta_normalizer() const { return delta_normalizer_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  EnvSpec spec_;
  DynamicsModelConfig config_;
  Mlp net_;
  Normalizer input_normalizer_;
  Normalizer delta_normalizer_;
  AdamState adam_;
  RngStream rng_;
};

/// The learned model wrapped as an Environment. Rewards come from the real
/// task's analytic reward function; episodes terminate on the horizon only.
/// Never touches the real environment's step counter.
class CyberEnv : public Environment {
 public:
  CyberEnv(DynamicsModel& model, const Environment& real_env);

  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset_to(std::span<const double> state) override;
  std::vector<double> sample_initial_state(RngStream& rng) const override;
  std::vector<double> sample_state_uniform(RngStream& rng) const override;
  double analytic_reward(std::span<const double> state, std::span<const double> action,
                         std::span<const double> next_state) const override;
  std::vector<double> current_state() const override;

 protected:
  StepResult do_step(std::span<const double> action) override;

 private:
  DynamicsModel* model_;
  const Environment* real_env_;
  EnvSpec spec_;
  std::vector<double> state_;
  bool has_state_ = false;
};

}  // namespace mbrl

#endif  // MBRL_CYBER_MODEL_HPP
