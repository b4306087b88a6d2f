#ifndef MBRL_CONTROLLER_HPP
#define MBRL_CONTROLLER_HPP

#include <span>
#include <vector>

#include "mbrl/envs.hpp"
#include "mbrl/numerics.hpp"

namespace mbrl {

/// Fixed-capacity ring buffer with uniform sampling and FIFO overwrite.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

  /// Uniform sample of `batch` entries (indices may repeat).
  std::vector<const Transition*> sample(std::size_t batch, RngStream& rng) const;

  /// Every stored transition, in storage order.
  std::span<const Transition> all() const { return storage_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;
};

struct DdpgParams {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  std::size_t batch_size = 64;
  double noise_scale = 0.1;  // stddev as a fraction of the action half-range
  std::size_t warmup_size = 64;
  std::vector<std::size_t> actor_hidden{64};
  std::vector<std::size_t> critic_hidden{64};
};

struct TrainStats {
  long real_steps = 0;
  long cyber_steps = 0;
  long real_skipped = 0;
  long cyber_skipped = 0;
  double mean_critic_loss = 0.0;
};

/// Deterministic actor-critic with target networks and soft updates. The
/// actor maps state to a tanh-squashed action scaled to the action bounds;
/// the critic scores (state (+) action) pairs.
class DdpgController {
 public:
  DdpgController(const EnvSpec& spec, const DdpgParams& params, std::uint64_t seed);

  /// Actor output; with explore, Gaussian noise is added and the result
  /// clipped to the action bounds.
  std::vector<double> act(std::span<const double> state, bool explore, RngStream& rng) const;

  double q_value(std::span<const double> state, std::span<const double> action) const;

  /// Exactly t_real real-batch and t_cyber cyber-batch gradient steps in a
  /// seeded random interleaving. A step whose buffer holds fewer than
  /// batch_size entries is skipped and reported.
  TrainStats train_mixed(const ReplayBuffer& real_buf, const ReplayBuffer& cyber_buf,
                         long t_real, long t_cyber, RngStream& rng);

  /// Copies every online and target parameter from src; optimizer states
  /// are reset. Architectures must match.
  void copy_weights_from(const DdpgController& src);

  long update_count() const { return update_count_; }
  const DdpgParams& params() const { return params_; }
  const EnvSpec& spec() const { return spec_; }

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }

 private:
  EnvSpec spec_;
  DdpgParams params_;
  Mlp actor_, critic_;
  Mlp target_actor_, target_critic_;
  AdamState actor_adam_, critic_adam_;
  long update_count_ = 0;

  std::vector<double> scale_action(std::span<const double> raw) const;
  double train_on_batch(const ReplayBuffer& buf, RngStream& rng);
  void soft_update(Mlp& target, const Mlp& online) const;
};

}  // namespace mbrl

#endif  // MBRL_CONTROLLER_HPP
