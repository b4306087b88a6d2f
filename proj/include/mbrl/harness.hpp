#ifndef MBRL_HARNESS_HPP
#define MBRL_HARNESS_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mbrl/controller.hpp"
#include "mbrl/ensemble.hpp"
#include "mbrl/envs.hpp"
#include "mbrl/tpe.hpp"
#include "mbrl/trainers.hpp"

namespace mbrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainerKind { Dqn, Dqn5, DqnLargeMemory, Reinforce, Random, Fixed, NoCyber, Ensemble };

TrainerKind trainer_kind_from_name(const std::string& name);
std::string trainer_kind_name(TrainerKind kind);

struct ExperimentConfig {
  Task task = Task::Pendulum;
  TrainerKind trainer = TrainerKind::Dqn;
  TpeObsMode tpe_obs = TpeObsMode::Constant;
  long budget_n = 50000;
  long k_real = 50;
  long t_real = 50;
  long init_samples = 1000;
  long eval_interval = 10;  // in TPE steps
  long eval_episodes = 5;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  DdpgParams ddpg;
  std::size_t buffer_capacity = 100000;

  std::vector<std::size_t> model_hidden{64};
  double model_lr = 1e-3;
  std::size_t model_batch = 64;
  int model_epochs = 5;

  int m1 = 50;
  int m2 = 5;

  double trainer_gamma = 0.5;
  double trainer_lr = 1e-2;
  std::size_t trainer_hidden = 16;
  double final_epsilon = 0.1;
  double anneal_fraction = 0.1;
  std::size_t dqn_memory = 32;
  int reinforce_episode = 5;

  TpeAction fixed_action{0.6, 0.6, 0.6};

  long ensemble_c = 3;
  double phi_max = 0.7;
  double phi_min = 0.5;

  /// Optional early stop: end the run once an evaluation mean reaches this.
  std::optional<double> stop_at_return;

  void validate() const;  // throws ConfigError
  long trainer_step_limit() const;
};

/// Defaults for a task (pendulum: 50k budget, 50 real samples per step;
/// mountain car: 30k steps of one sample each, C = 100).
ExperimentConfig default_config(Task task);

struct ConfigOverride {
  std::string key;
  std::string value;
};

/// Line-based `key = value` configuration; '#' starts a comment. Unknown
/// keys and malformed values are rejected naming the offending line.
/// Command-line overrides are applied after the file.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<ConfigOverride>& overrides);
ExperimentConfig parse_config_file(const std::string& path,
                                   const std::vector<ConfigOverride>& overrides);

struct EvalRecord {
  long tpe_step = 0;
  long real_samples_used = 0;
  double mean_return = 0.0;
  double return_std = 0.0;
};

/// Builds the configured uni-head trainer (the ensemble wires its slots
/// itself inside run_experiment).
std::unique_ptr<Trainer> make_trainer(const ExperimentConfig& config, std::uint64_t seed);

/// One greedy episode; returns the undiscounted return. Resets to `start`
/// when given, otherwise to a draw from the initial-state distribution.
double rollout_return(Environment& env, const DdpgController& controller, RngStream& rng,
                      const std::vector<double>* start = nullptr);

/// Mean and population standard deviation of `episodes` greedy episode
/// returns in an isolated test environment; consumes no training budget.
std::pair<double, double> evaluate(const DdpgController& controller, Environment& test_env,
                                   long episodes, RngStream& rng);

struct RunResult {
  std::vector<EvalRecord> curve;
  long tpe_steps = 0;
  long real_samples_used = 0;
  std::string output_dir;
};

/// Runs one experiment from a seeded config and writes learning_curve.csv,
/// actions.csv, and manifest.json into the output directory.
RunResult run_experiment(const ExperimentConfig& config);

/// Renders <dir>/learning_curve.csv to <dir>/learning_curve.svg.
std::string plot_learning_curve(const std::string& run_dir);

}  // namespace mbrl

#endif  // MBRL_HARNESS_HPP
