#include "mbrl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::add(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[cursor_] = std::move(t);
    cursor_ = (cursor_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, RngStream& rng) const {
  if (storage_.empty()) throw std::logic_error("ReplayBuffer::sample: empty buffer");
  std::vector<const Transition*> out(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out[i] = &storage_[rng.uniform_int(storage_.size())];
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::vector<std::size_t> make_layers(std::size_t in, const std::vector<std::size_t>& hidden,
                                     std::size_t out) {
  std::vector<std::size_t> sizes;
  sizes.push_back(in);
  for (std::size_t h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}
}  // namespace

DdpgController::DdpgController(const EnvSpec& spec, const DdpgParams& params, std::uint64_t seed)
    : spec_(spec),
      params_(params),
      actor_([&] {
        RngStream r(derive_seed(seed, 11));
        return Mlp(make_layers(spec.state_dim, params.actor_hidden, spec.action_dim),
                   Activation::Tanh, Activation::Tanh, r);
      }()),
      critic_([&] {
        RngStream r(derive_seed(seed, 12));
        return Mlp(make_layers(spec.state_dim + spec.action_dim, params.critic_hidden, 1),
                   Activation::Tanh, Activation::Identity, r);
      }()),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_adam_(actor_.parameter_count()),
      critic_adam_(critic_.parameter_count()) {
  // gamma = 0 is allowed for degenerate bandit setups.
  if (params_.gamma < 0.0 || params_.gamma >= 1.0) {
    throw std::invalid_argument("DdpgController: gamma must be in [0, 1)");
  }
  if (params_.tau <= 0.0 || params_.tau > 1.0) {
    throw std::invalid_argument("DdpgController: tau must be in (0, 1]");
  }
  if (params_.batch_size == 0) throw std::invalid_argument("DdpgController: batch_size >= 1");
}

std::vector<double> DdpgController::scale_action(std::span<const double> raw) const {
  std::vector<double> a(raw.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double mid = 0.5 * (spec_.action_low[i] + spec_.action_high[i]);
    double half = 0.5 * (spec_.action_high[i] - spec_.action_low[i]);
    a[i] = mid + half * raw[i];
  }
  return a;
}

std::vector<double> DdpgController::act(std::span<const double> state, bool explore,
                                        RngStream& rng) const {
  if (state.size() != spec_.state_dim) throw std::invalid_argument("DdpgController::act: state dim");
  std::vector<double> a = scale_action(actor_.forward(state));
  if (explore) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      double half = 0.5 * (spec_.action_high[i] - spec_.action_low[i]);
      a[i] += rng.normal(0.0, params_.noise_scale * half);
      a[i] = clamp(a[i], spec_.action_low[i], spec_.action_high[i]);
    }
  }
  return a;
}

double DdpgController::q_value(std::span<const double> state, std::span<const double> action) const {
  if (state.size() != spec_.state_dim || action.size() != spec_.action_dim) {
    throw std::invalid_argument("DdpgController::q_value: dimension mismatch");
  }
  std::vector<double> in(state.begin(), state.end());
  in.insert(in.end(), action.begin(), action.end());
  return critic_.forward(in)[0];
}

void DdpgController::soft_update(Mlp& target, const Mlp& online) const {
  std::vector<double> tp = target.parameters();
  std::vector<double> op = online.parameters();
  for (std::size_t i = 0; i < tp.size(); ++i) {
    tp[i] = (1.0 - params_.tau) * tp[i] + params_.tau * op[i];
  }
  target.set_parameters(tp);
}

double DdpgController::train_on_batch(const ReplayBuffer& buf, RngStream& rng) {
  const std::size_t batch = params_.batch_size;
  auto samples = buf.sample(batch, rng);
  const double inv = 1.0 / static_cast<double>(batch);

  // Critic regression toward y = r + gamma * (1 - done) * Q'(s', pi'(s')).
  std::vector<double> critic_grad(critic_.parameter_count(), 0.0);
  double loss = 0.0;
  for (const Transition* t : samples) {
    std::vector<double> next_in(t->next_state);
    std::vector<double> next_a = scale_action(target_actor_.forward(t->next_state));
    next_in.insert(next_in.end(), next_a.begin(), next_a.end());
    double q_next = target_critic_.forward(next_in)[0];
    double y = t->reward + params_.gamma * (t->done ? 0.0 : 1.0) * q_next;

    std::vector<double> in(t->state);
    in.insert(in.end(), t->action.begin(), t->action.end());
    double q = critic_.forward(in)[0];
    double err = q - y;
    loss += err * err * inv;
    std::vector<double> dq{2.0 * err * inv};
    critic_.backprop_accumulate(in, dq, critic_grad);
  }
  std::vector<double> critic_params = critic_.parameters();
  adam_step(critic_params, critic_grad, critic_adam_, params_.critic_lr);
  critic_.set_parameters(critic_params);

  // Actor ascent on Q(s, pi(s)): chain the critic's action gradient through
  // the actor and its bound scaling. The accumulated gradient points uphill,
  // so it is negated before the minimizing optimizer step.
  std::vector<double> actor_grad(actor_.parameter_count(), 0.0);
  std::vector<double> critic_in_grad;
  std::vector<double> da(spec_.action_dim);
  for (const Transition* t : samples) {
    std::vector<double> raw = actor_.forward(t->state);
    std::vector<double> a = scale_action(raw);
    std::vector<double> in(t->state);
    in.insert(in.end(), a.begin(), a.end());
    std::vector<double> dq{inv};
    critic_.backprop_accumulate(in, dq, {}, &critic_in_grad);
    for (std::size_t i = 0; i < spec_.action_dim; ++i) {
      double half = 0.5 * (spec_.action_high[i] - spec_.action_low[i]);
      da[i] = critic_in_grad[spec_.state_dim + i] * half;
    }
    actor_.backprop_accumulate(t->state, da, actor_grad);
  }
  for (double& g : actor_grad) g = -g;
  std::vector<double> actor_params = actor_.parameters();
  adam_step(actor_params, actor_grad, actor_adam_, params_.actor_lr);
  actor_.set_parameters(actor_params);

  soft_update(target_actor_, actor_);
  soft_update(target_critic_, critic_);
  ++update_count_;
  return loss;
}

TrainStats DdpgController::train_mixed(const ReplayBuffer& real_buf, const ReplayBuffer& cyber_buf,
                                       long t_real, long t_cyber, RngStream& rng) {
  if (t_real < 0 || t_cyber < 0) throw std::invalid_argument("train_mixed: negative step count");
  TrainStats stats;
  if (real_buf.size() < params_.warmup_size) {
    stats.real_skipped = t_real;
    stats.cyber_skipped = t_cyber;
    return stats;
  }

  std::vector<bool> is_real(static_cast<std::size_t>(t_real + t_cyber));
  std::fill(is_real.begin(), is_real.begin() + t_real, true);
  for (std::size_t i = is_real.size(); i > 1; --i) {
    std::size_t j = rng.uniform_int(i);
    std::swap(is_real[i - 1], is_real[j]);
  }

  double loss_sum = 0.0;
  for (bool real : is_real) {
    const ReplayBuffer& buf = real ? real_buf : cyber_buf;
    if (buf.size() < params_.batch_size) {
      (real ? stats.real_skipped : stats.cyber_skipped) += 1;
      continue;
    }
    loss_sum += train_on_batch(buf, rng);
    (real ? stats.real_steps : stats.cyber_steps) += 1;
  }
  long done = stats.real_steps + stats.cyber_steps;
  stats.mean_critic_loss = done > 0 ? loss_sum / static_cast<double>(done) : 0.0;
  return stats;
}

void DdpgController::copy_weights_from(const DdpgController& src) {
  if (!actor_.same_architecture(src.actor_) || !critic_.same_architecture(src.critic_)) {
    throw std::invalid_argument("copy_weights_from: architecture mismatch");
  }
  actor_.set_parameters(src.actor_.parameters());
  critic_.set_parameters(src.critic_.parameters());
  target_actor_.set_parameters(src.target_actor_.parameters());
  target_critic_.set_parameters(src.target_critic_.parameters());
  actor_adam_.reset();
  critic_adam_.reset();
}

}  // namespace mbrl
