#include "mbrl/tpe.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mbrl {

void TpeAction::validate() const {
  if (!(a0 >= 0.0 && a0 <= 1.0)) throw std::invalid_argument("TpeAction: a0 must be in [0, 1]");
  if (!(a1 >= 0.0 && a1 <= 1.0)) throw std::invalid_argument("TpeAction: a1 must be in [0, 1]");
  if (!(a2 > 0.0 && a2 <= 1.0)) throw std::invalid_argument("TpeAction: a2 must be in (0, 1]");
}

TpeObsMode obs_mode_from_name(const std::string& name) {
  if (name == "const") return TpeObsMode::Constant;
  if (name == "v1") return TpeObsMode::LastAvgReward;
  if (name == "v2") return TpeObsMode::SampleRatio;
  throw std::invalid_argument("unknown tpe_obs mode: " + name);
}

namespace {
// Nearest integer with ties to even. Values within 1e-9 of an exact .5 are
// treated as ties so decimal-fraction actions round like exact rationals.
long round_half_even(double x) {
  double f = std::floor(x);
  double frac = x - f;
  if (std::abs(frac - 0.5) < 1e-9) {
    long lo = static_cast<long>(f);
    return (lo % 2 == 0) ? lo : lo + 1;
  }
  return std::llround(x);
}

long scaled_count(long base, double a2, const char* what) {
  if (!(a2 > 0.0 && a2 <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": a2 must be in (0, 1]");
  }
  if (base < 0) throw std::invalid_argument(std::string(what) + ": negative count");
  return round_half_even(static_cast<double>(base) * (1.0 - a2) / a2);
}
}  // namespace

long compute_kc(long k_real, double a2) { return scaled_count(k_real, a2, "compute_kc"); }

long compute_tc(long t_real, double a2) { return scaled_count(t_real, a2, "compute_tc"); }

double quality(std::span<const double> state, double a0, const DdpgController& ctrl,
               RngStream& rng) {
  double u = rng.uniform();
  double q = 0.0;
  if (a0 > 0.0) {
    std::vector<double> a = ctrl.act(state, false, rng);
    q = ctrl.q_value(state, a);
  }
  return a0 * q + (1.0 - a0) * u;
}

std::vector<double> sampling_reset_real(Environment& env, double a0,
                                        const DdpgController& ctrl, int m1, int m2,
                                        RngStream& rng) {
  if (m1 <= m2 || m2 <= 0) throw std::invalid_argument("sampling_reset_real: need m1 > m2 > 0");
  std::vector<double> candidate;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= m1; ++i) {
    candidate = env.sample_initial_state(rng);
    double phi = quality(candidate, a0, ctrl, rng);
    bool running_max = phi >= best;
    if (running_max) best = phi;
    if (i > m2 && running_max) break;
  }
  return env.reset_to(candidate);
}

std::vector<double> sampling_reset_cyber(Environment& cyber_env, double a1,
                                         const ReplayBuffer& real_buffer, RngStream& rng,
                                         bool* fell_back) {
  if (!(a1 >= 0.0 && a1 <= 1.0)) throw std::invalid_argument("sampling_reset_cyber: a1 in [0, 1]");
  if (fell_back) *fell_back = false;
  double u = rng.uniform();
  if (u < a1) {
    if (real_buffer.size() > 0) {
      const Transition& t = real_buffer.at(rng.uniform_int(real_buffer.size()));
      return cyber_env.reset_to(t.state);
    }
    if (fell_back) *fell_back = true;
  }
  return cyber_env.reset_to(cyber_env.sample_state_uniform(rng));
}

// ---------------------------------------------------------------------------

Tpe::Tpe(const TpeConfig& config, Environment& real_env, DdpgController& controller,
         DynamicsModel& model, std::shared_ptr<SampleBudget> budget, std::uint64_t seed)
    : config_(config),
      real_env_(&real_env),
      controller_(&controller),
      model_(&model),
      cyber_env_(model, real_env),
      budget_(std::move(budget)),
      real_buffer_(config.real_buffer_capacity),
      cyber_buffer_(config.cyber_buffer_capacity),
      rng_(seed) {
  if (config_.k_real < 1) throw std::invalid_argument("Tpe: k_real must be >= 1");
  if (config_.m1 <= config_.m2 || config_.m2 <= 0) {
    throw std::invalid_argument("Tpe: need m1 > m2 > 0");
  }
  if (config_.init_samples > budget_->limit()) {
    throw std::invalid_argument("Tpe: init_samples exceeds the sample budget");
  }
}

void Tpe::initialize() {
  long granted = budget_->take(config_.init_samples);
  const EnvSpec& spec = real_env_->spec();
  double reward_sum = 0.0;
  for (long i = 0; i < granted; ++i) {
    if (real_env_->episode_done()) real_env_->reset_random(rng_);
    std::vector<double> state = real_env_->current_state();
    std::vector<double> action(spec.action_dim);
    for (std::size_t d = 0; d < action.size(); ++d) {
      action[d] = rng_.uniform(spec.action_low[d], spec.action_high[d]);
    }
    StepResult res = real_env_->step(action);
    reward_sum += res.reward;
    // Horizon truncation is episode control, not a terminal state; the
    // stored flag only marks true terminals so bootstrapping stays sound.
    real_buffer_.add({std::move(state), std::move(action), res.reward,
                      std::move(res.next_state), res.done && !res.truncated});
  }
  last_avg_reward_ = granted > 0 ? reward_sum / static_cast<double>(granted) : 0.0;
  if (real_buffer_.size() > 0 && config_.model_epochs > 0) {
    model_->fit(real_buffer_.all(), config_.model_epochs);
  }
  initialized_ = true;
}

TrainStats Tpe::train_phase(const TpeAction& action) {
  long t_cyber = compute_tc(config_.t_real, action.a2);
  return controller_->train_mixed(real_buffer_, cyber_buffer_, config_.t_real, t_cyber, rng_);
}

Tpe::RealCollection Tpe::collect_real_phase(const TpeAction& action,
                                            const DdpgController* reference, double p_ref) {
  RealCollection out;
  long granted = budget_->take(config_.k_real);
  double reward_sum = 0.0;
  for (long i = 0; i < granted; ++i) {
    if (real_env_->episode_done()) {
      sampling_reset_real(*real_env_, action.a0, *controller_, config_.m1, config_.m2, rng_);
      episode_actor_ = controller_;
      episode_actor_is_reference_ = false;
      if (reference && p_ref > 0.0 && rng_.uniform() < p_ref) {
        episode_actor_ = reference;
        episode_actor_is_reference_ = true;
        ++out.reference_episodes;
      }
    }
    if (episode_actor_ == nullptr) episode_actor_ = controller_;  // episode opened by initialize()
    std::vector<double> state = real_env_->current_state();
    std::vector<double> a = episode_actor_->act(state, true, rng_);
    StepResult res = real_env_->step(a);
    reward_sum += res.reward;
    if (episode_actor_is_reference_) ++out.reference_steps;
    Transition t{std::move(state), std::move(a), res.reward, std::move(res.next_state),
                 res.done && !res.truncated};
    real_buffer_.add(t);
    out.transitions.push_back(std::move(t));
  }
  out.count = granted;
  out.mean_reward = granted > 0 ? reward_sum / static_cast<double>(granted) : last_avg_reward_;
  return out;
}

long Tpe::collect_cyber_phase(const TpeAction& action) {
  long k_cyber = compute_kc(config_.k_real, action.a2);
  if (k_cyber == 0) return 0;
  if (!model_->fitted()) {
    ++cyber_skipped_unfitted_;
    return 0;
  }
  for (long i = 0; i < k_cyber; ++i) {
    if (cyber_env_.episode_done()) {
      bool fell_back = false;
      sampling_reset_cyber(cyber_env_, action.a1, real_buffer_, rng_, &fell_back);
      if (fell_back) ++cyber_reset_fallbacks_;
    }
    std::vector<double> state = cyber_env_.current_state();
    std::vector<double> a = controller_->act(state, true, rng_);
    StepResult res = cyber_env_.step(a);
    cyber_buffer_.add({std::move(state), std::move(a), res.reward, std::move(res.next_state),
                       res.done && !res.truncated});
  }
  return k_cyber;
}

void Tpe::fit_model_phase() {
  if (real_buffer_.size() > 0 && config_.model_epochs > 0) {
    model_->fit(real_buffer_.all(), config_.model_epochs);
  }
}

TpeStepReport Tpe::finalize_step(const RealCollection& collection, long cyber_collected) {
  double r_new = collection.mean_reward;
  int sign = (r_new > last_avg_reward_) - (r_new < last_avg_reward_);
  last_avg_reward_ = r_new;
  ++step_index_;
  TpeStepReport report;
  report.observation = observation();
  report.reward = sign;
  report.raw_avg_reward = r_new;
  report.real_samples_used_total = budget_->used();
  report.cyber_samples_this_step = cyber_collected;
  report.done = done();
  return report;
}

TpeStepReport Tpe::step(const TpeAction& action) {
  action.validate();
  if (!initialized_) throw std::logic_error("Tpe::step: initialize() first");
  if (done()) throw std::logic_error("Tpe::step: sample budget exhausted");
  train_phase(action);
  RealCollection collection = collect_real_phase(action);
  long cyber_collected = collect_cyber_phase(action);
  fit_model_phase();
  return finalize_step(collection, cyber_collected);
}

double Tpe::observation() const {
  switch (config_.obs_mode) {
    case TpeObsMode::Constant: return 0.0;
    case TpeObsMode::LastAvgReward: return last_avg_reward_;
    case TpeObsMode::SampleRatio:
      return budget_->limit() > 0
                 ? static_cast<double>(budget_->used()) / static_cast<double>(budget_->limit())
                 : 0.0;
  }
  return 0.0;
}

void Tpe::absorb_shared(std::span<const Transition> transitions) {
  for (const Transition& t : transitions) real_buffer_.add(t);
}

}  // namespace mbrl
