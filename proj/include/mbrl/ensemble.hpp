#ifndef MBRL_ENSEMBLE_HPP
#define MBRL_ENSEMBLE_HPP

#include <array>
#include <memory>
#include <vector>

#include "mbrl/trainers.hpp"
#include "mbrl/tpe.hpp"

namespace mbrl {

struct EnsembleConfig {
  long transfer_threshold = 3;  // steps between skewness analyses (C)
  double phi_max = 0.7;
  double phi_min = 0.5;
};

/// Probability of sampling with the best slot's controller. Forced to zero
/// on every third trainer step so those steps stay clean evaluation steps.
double reference_probability(long t, double phi, const EnsembleConfig& config);

/// Rank of each raw reward in the ascending sort; ties share the lowest tied
/// index. Invariant under scaling all rewards by any positive constant.
std::array<int, 3> order_rewards(const std::array<double, 3>& raw);

/// Performance skewness (best - median) / (best - worst); the no-spread case
/// falls back to phi_min, which maps to zero reference probability.
double skewness(const std::array<double, 3>& accumulated, double phi_min);

/// Rank bookkeeping for the three slots: per-step order rewards, accumulated
/// rewards since the last transfer, best-slot tracking, skewness analysis,
/// and the transfer decision. Pure record-keeping; it never touches the
/// controllers, so scripted-reward traces can drive it directly.
class EnsembleBookkeeping {
 public:
  explicit EnsembleBookkeeping(const EnsembleConfig& config);

  struct StepOutcome {
    std::array<int, 3> ranks{};
    bool analysis_ran = false;
    std::array<double, 3> accumulated{};  // valid when analysis_ran
    int best_index = 2;
    double phi = 0.0;  // valid when analysis_ran
    bool transfer = false;
  };

  /// Effective reference probability for the upcoming step.
  double current_p_ref() const { return reference_probability(t_, phi_, config_); }

  StepOutcome record_step(const std::array<double, 3>& raw_rewards);

  long step_index() const { return t_; }
  long steps_since_transfer() const { return n_c_; }
  int best_index() const { return best_; }
  double latest_phi() const { return phi_; }
  const std::vector<std::array<int, 3>>& rank_history() const { return rank_history_; }

 private:
  EnsembleConfig config_;
  long t_ = 0;
  long n_c_ = 0;
  int best_ = 2;  // the all-real slot starts as the best player
  double phi_ = 0.0;
  std::vector<std::array<int, 3>> rank_history_;
};

/// One head of the ensemble: a trainer with its own environment instance,
/// target controller, dynamics model, and TPE (sharing the global budget).
struct TrainerSlot {
  std::unique_ptr<Environment> env;
  std::unique_ptr<DdpgController> controller;
  std::unique_ptr<DynamicsModel> model;
  std::unique_ptr<Tpe> tpe;
  std::unique_ptr<Trainer> trainer;
};

/// Three-slot ensemble: slot 0 learns (DQN), slot 1 explores (random), slot
/// 2 uses only real data. Slots share real data through a common log, sample
/// with the best slot's controller with probability p_ref, earn order-based
/// rewards, and transfer weights into slot 0 when it falls behind.
class EnsembleTrainer {
 public:
  EnsembleTrainer(std::array<TrainerSlot, 3> slots, const EnsembleConfig& config);

  /// Runs every slot's TPE initialization and shares the seed data.
  void initialize();

  struct StepOutcome {
    std::array<TpeStepReport, 3> reports;
    std::array<std::size_t, 3> action_indices{};
    std::array<TpeAction, 3> actions;
    std::array<double, 3> raw_rewards{};
    std::array<int, 3> ranks{};
    std::array<long, 3> real_collected{};
    std::array<long, 3> reference_episodes{};
    double p_ref = 0.0;  // effective during this step
    bool dqn_memory_updated = false;
    bool analysis_ran = false;
    bool transfer = false;
    int best_index = 2;
    double phi = 0.0;
    bool done = false;
  };

  StepOutcome step(RngStream& rng);

  bool done() const { return slots_[0].tpe->done(); }
  const EnsembleBookkeeping& bookkeeping() const { return book_; }
  const DdpgController& best_controller() const {
    return *slots_[static_cast<std::size_t>(book_.best_index())].controller;
  }
  TrainerSlot& slot(std::size_t i) { return slots_[i]; }
  const TrainerSlot& slot(std::size_t i) const { return slots_[i]; }
  DqnTrainer& dqn_trainer() { return *dqn_; }
  long shared_log_size() const { return static_cast<long>(shared_log_.size()); }

 private:
  std::array<TrainerSlot, 3> slots_;
  EnsembleConfig config_;
  EnsembleBookkeeping book_;
  DqnTrainer* dqn_;  // owned by slots_[0]
  std::vector<Transition> shared_log_;
  std::array<std::size_t, 3> marks_{};  // per-slot high-water marks into the log
};

}  // namespace mbrl

#endif  // MBRL_ENSEMBLE_HPP
