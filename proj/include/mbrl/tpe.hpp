#ifndef MBRL_TPE_HPP
#define MBRL_TPE_HPP

#include <memory>
#include <span>
#include <vector>

#include "mbrl/controller.hpp"
#include "mbrl/cyber_model.hpp"
#include "mbrl/envs.hpp"
#include "mbrl/numerics.hpp"

namespace mbrl {

/// The three control knobs exposed by the training process: a0 steers where
/// real episodes start (model-training locality), a1 where cyber episodes
/// start (model-usage locality), a2 the real/cyber data ratio.
struct TpeAction {
  double a0 = 0.6;
  double a1 = 0.6;
  double a2 = 0.6;

  void validate() const;
};

enum class TpeObsMode { Constant, LastAvgReward, SampleRatio };

TpeObsMode obs_mode_from_name(const std::string& name);

struct TpeConfig {
  long k_real = 50;      // real samples per step
  long t_real = 50;      // real training batches per step
  long init_samples = 1000;
  int m1 = 50;           // max reset trials
  int m2 = 5;            // min reset trials
  int model_epochs = 5;
  TpeObsMode obs_mode = TpeObsMode::Constant;
  std::size_t real_buffer_capacity = 100000;
  std::size_t cyber_buffer_capacity = 100000;
};

struct TpeStepReport {
  double observation = 0.0;
  int reward = 0;               // sign of the sampling-reward change
  double raw_avg_reward = 0.0;  // mean per-step reward of this step's real samples
  long real_samples_used_total = 0;
  long cyber_samples_this_step = 0;
  bool done = false;
};

/// Cyber samples per step for a given ratio action; rounds to nearest with
/// ties to even, matching exact rational arithmetic for decimal actions.
long compute_kc(long k_real, double a2);
/// Cyber training batches per step; same rounding.
long compute_tc(long t_real, double a2);

/// Start-state quality: a0 * Q(s, pi(s)) + (1 - a0) * u with a fresh uniform
/// draw u. Always consumes exactly one uniform draw.
double quality(std::span<const double> state, double a0, const DdpgController& ctrl,
               RngStream& rng);

/// Quality-guided episode reset for the real environment: draws up to m1
/// initial-state candidates and stops after m2 as soon as the newest
/// candidate ties or beats every quality seen so far. Resets env to the last
/// candidate and returns it.
std::vector<double> sampling_reset_real(Environment& env, double a0,
                                        const DdpgController& ctrl, int m1, int m2,
                                        RngStream& rng);

/// Episode reset for the cyber environment: with probability a1 a state
/// stored in the real buffer, otherwise a uniform draw from the state box.
/// An empty buffer falls back to the uniform branch (reported via fell_back).
std::vector<double> sampling_reset_cyber(Environment& cyber_env, double a1,
                                         const ReplayBuffer& real_buffer, RngStream& rng,
                                         bool* fell_back = nullptr);

/// Shared real-sample budget; ensembles hand one instance to every slot.
class SampleBudget {
 public:
  explicit SampleBudget(long limit) : limit_(limit) {
    if (limit < 0) throw std::invalid_argument("SampleBudget: negative limit");
  }
  long take(long want) {
    long granted = std::min(want, limit_ - used_);
    if (granted < 0) granted = 0;
    used_ += granted;
    return granted;
  }
  long used() const { return used_; }
  long limit() const { return limit_; }
  bool exhausted() const { return used_ >= limit_; }

 private:
  long limit_;
  long used_ = 0;
};

/// One step of model-based training behind RL interfaces: train the
/// controller on a seeded mix of real and cyber batches, collect real data
/// with quality-guided resets, collect cyber data from the learned model,
/// refit the model, and report the sign of the sampling-reward change.
class Tpe {
 public:
  Tpe(const TpeConfig& config, Environment& real_env, DdpgController& controller,
      DynamicsModel& model, std::shared_ptr<SampleBudget> budget, std::uint64_t seed);

  /// Seeds the real buffer with uniform-random-action transitions and fits
  /// the model once. Must be called before step().
  void initialize();

  TpeStepReport step(const TpeAction& action);

  double observation() const;
  bool done() const { return budget_->exhausted(); }

  struct RealCollection {
    std::vector<Transition> transitions;
    double mean_reward = 0.0;
    long count = 0;
    long reference_episodes = 0;
    long reference_steps = 0;
  };

  // Phase API used by the ensemble, which interleaves memory sharing and
  // reference sampling between phases. step() composes these in order.
  TrainStats train_phase(const TpeAction& action);
  RealCollection collect_real_phase(const TpeAction& action,
                                    const DdpgController* reference = nullptr,
                                    double p_ref = 0.0);
  long collect_cyber_phase(const TpeAction& action);
  void fit_model_phase();
  TpeStepReport finalize_step(const RealCollection& collection, long cyber_collected);

  /// Memory sharing: appends transitions collected by other slots.
  void absorb_shared(std::span<const Transition> transitions);

  const ReplayBuffer& real_buffer() const { return real_buffer_; }
  const ReplayBuffer& cyber_buffer() const { return cyber_buffer_; }
  const SampleBudget& budget() const { return *budget_; }
  double last_avg_reward() const { return last_avg_reward_; }
  long step_index() const { return step_index_; }
  long cyber_reset_fallbacks() const { return cyber_reset_fallbacks_; }
  long cyber_skipped_unfitted() const { return cyber_skipped_unfitted_; }
  bool model_fitted() const { return model_->fitted(); }
  Environment& real_env() { return *real_env_; }
  CyberEnv& cyber_env() { return cyber_env_; }

 private:
  TpeConfig config_;
  Environment* real_env_;
  DdpgController* controller_;
  DynamicsModel* model_;
  CyberEnv cyber_env_;
  std::shared_ptr<SampleBudget> budget_;
  ReplayBuffer real_buffer_;
  ReplayBuffer cyber_buffer_;
  RngStream rng_;
  double last_avg_reward_ = 0.0;
  long step_index_ = 0;
  bool initialized_ = false;
  const DdpgController* episode_actor_ = nullptr;  // actor for the open real episode
  bool episode_actor_is_reference_ = false;
  long cyber_reset_fallbacks_ = 0;
  long cyber_skipped_unfitted_ = 0;
};

}  // namespace mbrl

#endif  // MBRL_TPE_HPP
