#include "mbrl/cyber_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mbrl {

Normalizer::Normalizer(std::size_t dim) : mean_(dim, 0.0), sq_diff_(dim, 0.0) {}

void Normalizer::update(std::span<const double> sample) {
  if (sample.size() != mean_.size()) {
    throw std::invalid_argument("Normalizer::update: dimension mismatch");
  }
  count_ += 1;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    double delta = sample[i] - mean_[i];
    mean_[i] += delta / static_cast<double>(count_);
    sq_diff_[i] += delta * (sample[i] - mean_[i]);
  }
}

double Normalizer::variance(std::size_t i) const {
  if (count_ == 0) return 0.0;
  return sq_diff_[i] / static_cast<double>(count_);
}

double Normalizer::divisor(std::size_t i) const {
  double var = variance(i);
  if (var < 1e-12) return 1.0;
  return std::sqrt(var);
}

std::vector<double> Normalizer::normalize(std::span<const double> x) const {
  if (x.size() != mean_.size()) throw std::invalid_argument("Normalizer::normalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean_[i]) / divisor(i);
  return out;
}

std::vector<double> Normalizer::denormalize(std::span<const double> x) const {
  if (x.size() != mean_.size()) throw std::invalid_argument("Normalizer::denormalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * divisor(i) + mean_[i];
  return out;
}

void Normalizer::reset() {
  count_ = 0;
  std::fill(mean_.begin(), mean_.end(), 0.0);
  std::fill(sq_diff_.begin(), sq_diff_.end(), 0.0);
}

// ---------------------------------------------------------------------------

namespace {
std::vector<std::size_t> model_layers(const EnvSpec& spec, const DynamicsModelConfig& cfg) {
  std::vector<std::size_t> sizes;
  sizes.push_back(spec.state_dim + spec.action_dim);
  for (std::size_t h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(spec.state_dim);
  return sizes;
}
}  // namespace

DynamicsModel::DynamicsModel(const EnvSpec& spec, const DynamicsModelConfig& config,
                             std::uint64_t seed)
    : spec_(spec),
      config_(config),
      net_([&] {
        RngStream init_rng(seed);
        return Mlp(model_layers(spec, config), Activation::Tanh, Activation::Identity, init_rng);
      }()),
      input_normalizer_(spec.state_dim + spec.action_dim),
      delta_normalizer_(spec.state_dim),
      adam_(net_.parameter_count()),
      rng_(derive_seed(seed, 1)) {}

std::vector<double> DynamicsModel::fit(std::span<const Transition> data, int epochs) {
  if (data.empty()) throw std::invalid_argument("DynamicsModel::fit: empty data");

  // Normalization statistics always reflect the dataset being fitted.
  input_normalizer_.reset();
  delta_normalizer_.reset();
  std::vector<std::vector<double>> inputs(data.size());
  std::vector<std::vector<double>> deltas(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Transition& t = data[i];
    std::vector<double> in(t.state);
    in.insert(in.end(), t.action.begin(), t.action.end());
    std::vector<double> d(spec_.state_dim);
    for (std::size_t k = 0; k < spec_.state_dim; ++k) d[k] = t.next_state[k] - t.state[k];
    input_normalizer_.update(in);
    delta_normalizer_.update(d);
    inputs[i] = std::move(in);
    deltas[i] = std::move(d);
  }
  for (auto& in : inputs) in = input_normalizer_.normalize(in);
  for (auto& d : deltas) d = delta_normalizer_.normalize(d);

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(std::max(epochs, 0)));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> params = net_.parameters();
  const std::size_t batch = std::max<std::size_t>(1, config_.batch_size);

  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = rng_.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t end = std::min(order.size(), start + batch);
      std::vector<double> grad(params.size(), 0.0);
      double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& in = inputs[order[k]];
        const auto& target = deltas[order[k]];
        std::vector<double> pred = net_.forward(in);
        std::vector<double> dloss(pred.size());
        for (std::size_t d = 0; d < pred.size(); ++d) {
          double err = pred[d] - target[d];
          epoch_loss += err * err;
          dloss[d] = 2.0 * err * inv;
        }
        net_.backprop_accumulate(in, dloss, grad);
      }
      adam_step(params, grad, adam_, config_.learning_rate);
      net_.set_parameters(params);
    }
    trace.push_back(epoch_loss / static_cast<double>(data.size() * spec_.state_dim));
  }
  return trace;
}

std::vector<double> DynamicsModel::predict_next(std::span<const double> state,
                                                std::span<const double> action) const {
  if (!fitted()) throw std::logic_error("DynamicsModel::predict_next: model not fitted");
  if (state.size() != spec_.state_dim || action.size() != spec_.action_dim) {
    throw std::invalid_argument("DynamicsModel::predict_next: dimension mismatch");
  }
  std::vector<double> in(state.begin(), state.end());
  in.insert(in.end(), action.begin(), action.end());
  std::vector<double> delta = delta_normalizer_.denormalize(net_.forward(input_normalizer_.normalize(in)));
  std::vector<double> next(spec_.state_dim);
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = clamp(state[i] + delta[i], spec_.state_low[i], spec_.state_high[i]);
  }
  return next;
}

// ---------------------------------------------------------------------------

CyberEnv::CyberEnv(DynamicsModel& model, const Environment& real_env)
    : model_(&model), real_env_(&real_env), spec_(real_env.spec()) {}

std::vector<double> CyberEnv::current_state() const {
  if (!has_state_) throw std::logic_error("CyberEnv::current_state: reset required");
  return state_;
}

std::vector<double> CyberEnv::reset_to(std::span<const double> state) {
  if (state.size() != spec_.state_dim) {
    throw std::invalid_argument("CyberEnv::reset_to: dimension mismatch");
  }
  state_.assign(state.begin(), state.end());
  has_state_ = true;
  mark_reset();
  return state_;
}

std::vector<double> CyberEnv::sample_initial_state(RngStream& rng) const {
  return real_env_->sample_initial_state(rng);
}

std::vector<double> CyberEnv::sample_state_uniform(RngStream& rng) const {
  return real_env_->sample_state_uniform(rng);
}

double CyberEnv::analytic_reward(std::span<const double> state, std::span<const double> action,
                                 std::span<const double> next_state) const {
  return real_env_->analytic_reward(state, action, next_state);
}

StepResult CyberEnv::do_step(std::span<const double> action) {
  if (!has_state_) throw std::logic_error("CyberEnv::step: reset required");
  std::vector<double> next = model_->predict_next(state_, action);
  double reward = real_env_->analytic_reward(state_, action, next);
  state_ = std::move(next);
  return {state_, reward, false};
}

}  // namespace mbrl
