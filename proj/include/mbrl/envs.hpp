#ifndef MBRL_ENVS_HPP
#define MBRL_ENVS_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mbrl/numerics.hpp"

namespace mbrl {

struct EnvSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low, action_high;
  std::vector<double> state_low, state_high;  // bounded box
  long max_episode_steps = 0;
};

/// One experience tuple; the unit of both real and cyber data.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;       // episode over (either terminal or truncated)
  bool truncated = false;  // the step-limit horizon ended it, not the task
};

/// Common interface for the real tasks and the learned cyber environment.
/// Supports controlled resets: reset_to(s) places the environment exactly in
/// state s (the exchange format is the observation vector). Stepping a
/// finished episode throws until the next reset. step_count() counts every
/// step ever taken on this instance and backs the sample-budget probes.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::vector<double> reset_to(std::span<const double> state) = 0;
  virtual std::vector<double> sample_initial_state(RngStream& rng) const = 0;
  virtual std::vector<double> sample_state_uniform(RngStream& rng) const = 0;
  virtual double analytic_reward(std::span<const double> state,
                                 std::span<const double> action,
                                 std::span<const double> next_state) const = 0;
  virtual std::vector<double> current_state() const = 0;

  std::vector<double> reset_random(RngStream& rng) {
    auto s = sample_initial_state(rng);
    return reset_to(s);
  }

  StepResult step(std::span<const double> action);

  long step_count() const { return step_count_; }
  long steps_in_episode() const { return steps_in_episode_; }
  bool episode_done() const { return episode_done_; }

 protected:
  virtual StepResult do_step(std::span<const double> action) = 0;

  void mark_reset() {
    steps_in_episode_ = 0;
    episode_done_ = false;
  }

 private:
  long step_count_ = 0;
  long steps_in_episode_ = 0;
  bool episode_done_ = true;  // unreset instances cannot step
};

/// Pendulum swing-up. Internal state (angle, angular velocity); observation
/// (cos a, sin a, adot). Torque in [-2, 2]; 200-step horizon, no other
/// termination.
class PendulumEnv : public Environment {
 public:
  PendulumEnv();

  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset_to(std::span<const double> state) override;
  std::vector<double> sample_initial_state(RngStream& rng) const override;
  std::vector<double> sample_state_uniform(RngStream& rng) const override;
  double analytic_reward(std::span<const double> state, std::span<const double> action,
                         std::span<const double> next_state) const override;
  std::vector<double> current_state() const override;

  /// Direct internal reset used by tests and the oracle integrator.
  void reset_internal(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

 protected:
  StepResult do_step(std::span<const double> action) override;

 private:
  EnvSpec spec_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

/// Continuous mountain car. State (position, velocity); force in [-1, 1];
/// +100 on reaching position >= 0.45, -0.1 * force^2 per step.
class MountainCarEnv : public Environment {
 public:
  MountainCarEnv();

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
  EnvSpec spec_;
  double position_ = 0.0;
  double velocity_ = 0.0;
};

enum class Task { Pendulum, MountainCar };

std::unique_ptr<Environment> make_env(Task task);
Task task_from_name(const std::string& name);
std::string task_name(Task task);

double clamp(double x, double lo, double hi);

}  // namespace mbrl

#endif  // MBRL_ENVS_HPP
