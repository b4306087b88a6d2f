#include "mbrl/envs.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace mbrl {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double theta) {
  double x = std::fmod(theta + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  return x - kPi;
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite value");
  }
}
}  // namespace

double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

StepResult Environment::step(std::span<const double> action) {
  if (episode_done_) {
    throw std::logic_error("Environment::step: episode finished; reset required");
  }
  StepResult r = do_step(action);
  ++step_count_;
  ++steps_in_episode_;
  if (!r.done && steps_in_episode_ >= spec().max_episode_steps) {
    r.done = true;
    r.truncated = true;
  }
  episode_done_ = r.done;
  return r;
}

// ---------------------------------------------------------------------------
// Pendulum
// ---------------------------------------------------------------------------

PendulumEnv::PendulumEnv() {
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_low = {-2.0};
  spec_.action_high = {2.0};
  spec_.state_low = {-1.0, -1.0, -8.0};
  spec_.state_high = {1.0, 1.0, 8.0};
  spec_.max_episode_steps = 200;
}

std::vector<double> PendulumEnv::current_state() const {
  return {std::cos(theta_), std::sin(theta_), theta_dot_};
}

void PendulumEnv::reset_internal(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  mark_reset();
}

std::vector<double> PendulumEnv::reset_to(std::span<const double> state) {
  if (state.size() != 3) throw std::invalid_argument("PendulumEnv::reset_to: need 3 dims");
  check_finite(state, "PendulumEnv::reset_to");
  reset_internal(std::atan2(state[1], state[0]), clamp(state[2], -8.0, 8.0));
  return current_state();
}

std::vector<double> PendulumEnv::sample_initial_state(RngStream& rng) const {
  double theta = rng.uniform(-kPi, kPi);
  double theta_dot = rng.uniform(-1.0, 1.0);
  return {std::cos(theta), std::sin(theta), theta_dot};
}

std::vector<double> PendulumEnv::sample_state_uniform(RngStream& rng) const {
  double theta = rng.uniform(-kPi, kPi);
  double theta_dot = rng.uniform(-8.0, 8.0);
  return {std::cos(theta), std::sin(theta), theta_dot};
}

double PendulumEnv::analytic_reward(std::span<const double> state,
                                    std::span<const double> action,
                                    std::span<const double> /*next_state*/) const {
  double theta = std::atan2(state[1], state[0]);
  double theta_dot = state[2];
  double torque = clamp(action[0], -2.0, 2.0);
  double w = wrap_angle(theta);
  return -(w * w + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
}

StepResult PendulumEnv::do_step(std::span<const double> action) {
  if (action.size() != 1) throw std::invalid_argument("PendulumEnv::step: need 1 action dim");
  check_finite(action, "PendulumEnv::step");

  // g = 10, mass = 1, length = 1, dt = 0.05; semi-implicit Euler.
  const double dt = 0.05;
  double torque = clamp(action[0], -2.0, 2.0);
  double w = wrap_angle(theta_);
  double cost = w * w + 0.1 * theta_dot_ * theta_dot_ + 0.001 * torque * torque;

  double new_theta_dot = theta_dot_ + (15.0 * std::sin(theta_) + 3.0 * torque) * dt;
  new_theta_dot = clamp(new_theta_dot, -8.0, 8.0);
  theta_ = theta_ + new_theta_dot * dt;
  theta_dot_ = new_theta_dot;

  return {current_state(), -cost, false};
}

// ---------------------------------------------------------------------------
// Mountain car (continuous)
// ---------------------------------------------------------------------------

MountainCarEnv::MountainCarEnv() {
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.action_low = {-1.0};
  spec_.action_high = {1.0};
  spec_.state_low = {-1.2, -0.07};
  spec_.state_high = {0.6, 0.07};
  spec_.max_episode_steps = 999;
}

std::vector<double> MountainCarEnv::current_state() const { return {position_, velocity_}; }

std::vector<double> MountainCarEnv::reset_to(std::span<const double> state) {
  if (state.size() != 2) throw std::invalid_argument("MountainCarEnv::reset_to: need 2 dims");
  check_finite(state, "MountainCarEnv::reset_to");
  position_ = clamp(state[0], -1.2, 0.6);
  velocity_ = clamp(state[1], -0.07, 0.07);
  mark_reset();
  return current_state();
}

std::vector<double> MountainCarEnv::sample_initial_state(RngStream& rng) const {
  return {rng.uniform(-0.6, -0.4), 0.0};
}

std::vector<double> MountainCarEnv::sample_state_uniform(RngStream& rng) const {
  return {rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
}

double MountainCarEnv::analytic_reward(std::span<const double> state,
                                       std::span<const double> action,
                                       std::span<const double> next_state) const {
  double force = clamp(action[0], -1.0, 1.0);
  bool goal = next_state[0] >= 0.45 || state[0] >= 0.45;
  return -0.1 * force * force + (goal ? 100.0 : 0.0);
}

StepResult MountainCarEnv::do_step(std::span<const double> action) {
  if (action.size() != 1) throw std::invalid_argument("MountainCarEnv::step: need 1 action dim");
  check_finite(action, "MountainCarEnv::step");

  double force = clamp(action[0], -1.0, 1.0);
  bool at_goal_already = position_ >= 0.45;

  velocity_ += force * 0.0015 - std::cos(3.0 * position_) * 0.0025;
  velocity_ = clamp(velocity_, -0.07, 0.07);
  position_ += velocity_;
  position_ = clamp(position_, -1.2, 0.6);

  bool goal = position_ >= 0.45 || at_goal_already;
  double reward = -0.1 * force * force + (goal ? 100.0 : 0.0);
  return {current_state(), reward, goal};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Environment> make_env(Task task) {
  switch (task) {
    case Task::Pendulum: return std::make_unique<PendulumEnv>();
    case Task::MountainCar: return std::make_unique<MountainCarEnv>();
  }
  throw std::invalid_argument("make_env: unknown task");
}

Task task_from_name(const std::string& name) {
  if (name == "pendulum") return Task::Pendulum;
  if (name == "mountaincar") return Task::MountainCar;
  throw std::invalid_argument("unknown task name: " + name);
}

std::string task_name(Task task) {
  return task == Task::Pendulum ? "pendulum" : "mountaincar";
}

}  // namespace mbrl
