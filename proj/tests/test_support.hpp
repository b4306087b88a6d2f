#ifndef MBRL_TEST_SUPPORT_HPP
#define MBRL_TEST_SUPPORT_HPP

#include <functional>
#include <vector>

#include "mbrl/envs.hpp"

namespace mbrl_test {

/// Scriptable one-dimensional environment for trace oracles. Initial-state
/// candidates count upward (consuming no rng draws), rewards follow a
/// configurable sequence, and the state advances by +1 per step.
class StubEnv : public mbrl::Environment {
 public:
  explicit StubEnv(long horizon = 1000) {
    spec_.state_dim = 1;
    spec_.action_dim = 1;
    spec_.action_low = {-1.0};
    spec_.action_high = {1.0};
    spec_.state_low = {-1e6};
    spec_.state_high = {1e6};
    spec_.max_episode_steps = horizon;
  }

  const mbrl::EnvSpec& spec() const override { return spec_; }

  std::vector<double> reset_to(std::span<const double> state) override {
    state_ = state[0];
    last_reset_ = state_;
    mark_reset();
    return {state_};
  }

  std::vector<double> sample_initial_state(mbrl::RngStream&) const override {
    return {static_cast<double>(candidate_counter_++)};
  }

  std::vector<double> sample_state_uniform(mbrl::RngStream& rng) const override {
    return {rng.uniform(spec_.state_low[0], spec_.state_high[0])};
  }

  double analytic_reward(std::span<const double>, std::span<const double>,
                         std::span<const double>) const override {
    return 0.0;
  }

  std::vector<double> current_state() const override { return {state_}; }

  long candidates_drawn() const { return candidate_counter_; }
  double last_reset() const { return last_reset_; }

  std::vector<double> scripted_rewards;  // consumed in order, then 0.0

 protected:
  mbrl::StepResult do_step(std::span<const double>) override {
    double reward = 0.0;
    if (reward_cursor_ < scripted_rewards.size()) reward = scripted_rewards[reward_cursor_++];
    state_ += 1.0;
    return {{state_}, reward, false};
  }

 private:
  mbrl::EnvSpec spec_;
  double state_ = 0.0;
  double last_reset_ = 0.0;
  mutable long candidate_counter_ = 0;
  std::size_t reward_cursor_ = 0;
};

}  // namespace mbrl_test

#endif  // MBRL_TEST_SUPPORT_HPP
