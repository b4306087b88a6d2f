#ifndef MBRL_TRAINERS_HPP
#define MBRL_TRAINERS_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mbrl/numerics.hpp"
#include "mbrl/tpe.hpp"

namespace mbrl {

/// Discrete action set: the cartesian product of per-dimension value lists,
/// flattened as index = (i0 * n1 + i1) * n2 + i2.
class ActionTable {
 public:
  explicit ActionTable(std::array<std::vector<double>, 3> per_dim_values);

  /// Same value list for all three dimensions.
  static ActionTable uniform(std::vector<double> values);
  static ActionTable single(const TpeAction& action);

  std::size_t size() const { return flat_.size(); }
  const TpeAction& entry(std::size_t index) const { return flat_.at(index); }

  /// Index of the entry closest to `action`, per dimension (ties toward the
  /// smaller value).
  std::size_t nearest_index(const TpeAction& action) const;

 private:
  std::array<std::vector<double>, 3> values_;
  std::vector<TpeAction> flat_;
};

/// One trainer-level experience: the TPE observation, the chosen action
/// index, the trainer reward, and the following observation.
struct TrainerSample {
  double obs = 0.0;
  std::size_t action = 0;
  double reward = 0.0;
  double next_obs = 0.0;
};

/// Replay memory with a hard per-action cap of floor(M / |A|) entries
/// (floored at one when the table outnumbers the capacity). A store into a
/// full action slot overwrites a uniformly random old entry, so no single
/// action can flood the buffer.
class CappedReplay {
 public:
  CappedReplay(std::size_t capacity, std::size_t action_count);

  void store(const TrainerSample& sample, RngStream& rng);
  std::size_t size() const { return total_; }
  std::size_t per_action_cap() const { return per_action_cap_; }
  std::size_t action_size(std::size_t action) const { return stores_.at(action).size(); }

  /// Uniform draw over all stored samples.
  const TrainerSample& sample_one(RngStream& rng) const;

 private:
  std::size_t per_action_cap_;
  std::vector<std::vector<TrainerSample>> stores_;
  std::size_t total_ = 0;
};

/// Outer-layer agent mapping TPE observations to action-table indices.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual const ActionTable& table() const = 0;
  /// Chooses an action index and advances the trainer's step clock.
  virtual std::size_t select(double obs, RngStream& rng) = 0;
  virtual void observe(double obs, std::size_t action, double reward, double next_obs,
                       RngStream& rng) = 0;
};

struct DqnTrainerConfig {
  std::size_t memory = 32;
  long total_steps = 1000;       // trainer steps until the budget runs out
  double final_epsilon = 0.1;
  double anneal_fraction = 0.1;  // epsilon reaches its floor after this share of steps
  double gamma = 0.5;
  double learning_rate = 1e-2;
  std::size_t hidden = 16;
  int update_batches = 4;
  std::size_t update_batch_size = 8;
};

/// Epsilon-greedy Q-learning over the action table with the capped memory.
class DqnTrainer : public Trainer {
 public:
  DqnTrainer(ActionTable table, const DqnTrainerConfig& config, std::uint64_t seed);

  const ActionTable& table() const override { return table_; }
  std::size_t select(double obs, RngStream& rng) override;
  void observe(double obs, std::size_t action, double reward, double next_obs,
               RngStream& rng) override;

  /// Epsilon-greedy choice at an explicit step clock (does not advance it).
  std::size_t select_action(double obs, long t, RngStream& rng) const;
  double epsilon(long t) const;
  std::size_t greedy_action(double obs) const;

  void store(const TrainerSample& sample, RngStream& rng);
  /// Runs the update recipe; returns false (no-op) on an empty memory.
  bool update(RngStream& rng);

  std::vector<double> q_values(double obs) const;
  const CappedReplay& memory() const { return memory_; }
  long step_clock() const { return step_clock_; }
  Mlp& q_net() { return q_net_; }
  const Mlp& q_net() const { return q_net_; }

 private:
  ActionTable table_;
  DqnTrainerConfig config_;
  Mlp q_net_;
  AdamState adam_;
  CappedReplay memory_;
  long step_clock_ = 0;
};

struct ReinforceTrainerConfig {
  int episode_length = 5;  // TPE steps per trainer episode
  double learning_rate = 1e-2;
  std::size_t hidden = 16;
};

/// Softmax policy gradient; updates once per fixed-length episode using the
/// episode return as the weight on the taken actions' log-probabilities.
class ReinforceTrainer : public Trainer {
 public:
  ReinforceTrainer(ActionTable table, const ReinforceTrainerConfig& config, std::uint64_t seed);

  const ActionTable& table() const override { return table_; }
  std::size_t select(double obs, RngStream& rng) override;
  void observe(double obs, std::size_t action, double reward, double next_obs,
               RngStream& rng) override;

  struct EpisodeStep {
    double obs = 0.0;
    std::size_t action = 0;
    double reward = 0.0;
  };

  void reinforce_update(std::span<const EpisodeStep> episode);
  std::vector<double> action_probabilities(double obs) const;

 private:
  ActionTable table_;
  ReinforceTrainerConfig config_;
  Mlp policy_net_;
  AdamState adam_;
  std::vector<EpisodeStep> pending_;
};

enum class BaselineKind { Random, Fixed, NoCyber };

/// Non-learning trainers: uniform-random over the table, the constant
/// (0.6, 0.6, 0.6) action, and the all-real action (a2 = 1, no cyber data).
class BaselineTrainer : public Trainer {
 public:
  BaselineTrainer(BaselineKind kind, ActionTable random_table);
  explicit BaselineTrainer(BaselineKind kind);
  /// Fixed trainer with a custom constant action.
  static BaselineTrainer fixed(const TpeAction& action);

  const ActionTable& table() const override { return table_; }
  std::size_t select(double obs, RngStream& rng) override;
  void observe(double, std::size_t, double, double, RngStream&) override {}

  BaselineKind kind() const { return kind_; }

 private:
  BaselineKind kind_;
  ActionTable table_;
};

TpeAction fixed_baseline_action();
TpeAction no_cyber_action();

}  // namespace mbrl

#endif  // MBRL_TRAINERS_HPP
