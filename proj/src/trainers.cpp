#include "mbrl/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbrl {

ActionTable::ActionTable(std::array<std::vector<double>, 3> per_dim_values)
    : values_(std::move(per_dim_values)) {
  for (const auto& vals : values_) {
    if (vals.empty()) throw std::invalid_argument("ActionTable: empty value set");
  }
  flat_.reserve(values_[0].size() * values_[1].size() * values_[2].size());
  for (double v0 : values_[0]) {
    for (double v1 : values_[1]) {
      for (double v2 : values_[2]) {
        TpeAction a{v0, v1, v2};
        a.validate();
        flat_.push_back(a);
      }
    }
  }
}

ActionTable ActionTable::uniform(std::vector<double> values) {
  return ActionTable({values, values, values});
}

ActionTable ActionTable::single(const TpeAction& action) {
  return ActionTable({std::vector<double>{action.a0}, std::vector<double>{action.a1},
                      std::vector<double>{action.a2}});
}

namespace {
std::size_t nearest_value_index(const std::vector<double>& values, double x) {
  std::size_t best = 0;
  double best_dist = std::abs(values[0] - x);
  for (std::size_t i = 1; i < values.size(); ++i) {
    double d = std::abs(values[i] - x);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}
}  // namespace

std::size_t ActionTable::nearest_index(const TpeAction& action) const {
  std::size_t i0 = nearest_value_index(values_[0], action.a0);
  std::size_t i1 = nearest_value_index(values_[1], action.a1);
  std::size_t i2 = nearest_value_index(values_[2], action.a2);
  return (i0 * values_[1].size() + i1) * values_[2].size() + i2;
}

// ---------------------------------------------------------------------------

CappedReplay::CappedReplay(std::size_t capacity, std::size_t action_count)
    : stores_(action_count) {
  if (action_count == 0) throw std::invalid_argument("CappedReplay: need at least one action");
  if (capacity == 0) throw std::invalid_argument("CappedReplay: capacity must be positive");
  // With more actions than capacity the cap floors at one slot per action,
  // otherwise the memory could never store anything.
  per_action_cap_ = std::max<std::size_t>(1, capacity / action_count);
}

void CappedReplay::store(const TrainerSample& sample, RngStream& rng) {
  auto& slot = stores_.at(sample.action);
  if (slot.size() < per_action_cap_) {
    slot.push_back(sample);
    ++total_;
  } else {
    slot[rng.uniform_int(slot.size())] = sample;
  }
}

const TrainerSample& CappedReplay::sample_one(RngStream& rng) const {
  if (total_ == 0) throw std::logic_error("CappedReplay::sample_one: empty memory");
  std::size_t idx = rng.uniform_int(total_);
  for (const auto& slot : stores_) {
    if (idx < slot.size()) return slot[idx];
    idx -= slot.size();
  }
  return stores_.back().back();  // unreachable
}

// ---------------------------------------------------------------------------

DqnTrainer::DqnTrainer(ActionTable table, const DqnTrainerConfig& config, std::uint64_t seed)
    : table_(std::move(table)),
      config_(config),
      q_net_([&] {
        RngStream r(seed);
        return Mlp({1, config.hidden, table_.size()}, Activation::Tanh, Activation::Identity, r);
      }()),
      adam_(q_net_.parameter_count()),
      memory_(config.memory, table_.size()) {
  if (config_.total_steps < 1) throw std::invalid_argument("DqnTrainer: total_steps >= 1");
}

double DqnTrainer::epsilon(long t) const {
  double anneal = config_.anneal_fraction * static_cast<double>(config_.total_steps);
  if (anneal < 1.0) anneal = 1.0;
  if (static_cast<double>(t) >= anneal) return config_.final_epsilon;
  return 1.0 + (config_.final_epsilon - 1.0) * static_cast<double>(t) / anneal;
}

std::vector<double> DqnTrainer::q_values(double obs) const {
  const double in[1] = {obs};
  return q_net_.forward(in);
}

std::size_t DqnTrainer::greedy_action(double obs) const {
  std::vector<double> q = q_values(obs);
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t DqnTrainer::select_action(double obs, long t, RngStream& rng) const {
  if (t < 0) throw std::invalid_argument("DqnTrainer::select_action: negative step");
  if (rng.uniform() < epsilon(t)) return rng.uniform_int(table_.size());
  return greedy_action(obs);
}

std::size_t DqnTrainer::select(double obs, RngStream& rng) {
  return select_action(obs, step_clock_++, rng);
}

void DqnTrainer::store(const TrainerSample& sample, RngStream& rng) {
  if (sample.action >= table_.size()) {
    throw std::invalid_argument("DqnTrainer::store: action index out of range");
  }
  memory_.store(sample, rng);
}

bool DqnTrainer::update(RngStream& rng) {
  if (memory_.size() == 0) return false;
  std::vector<double> params = q_net_.parameters();
  const double inv = 1.0 / static_cast<double>(config_.update_batch_size);
  for (int b = 0; b < config_.update_batches; ++b) {
    std::vector<double> grad(params.size(), 0.0);
    for (std::size_t k = 0; k < config_.update_batch_size; ++k) {
      const TrainerSample& s = memory_.sample_one(rng);
      std::vector<double> q_next = q_values(s.next_obs);
      double target = s.reward + config_.gamma * *std::max_element(q_next.begin(), q_next.end());
      std::vector<double> q = q_values(s.obs);
      std::vector<double> dq(q.size(), 0.0);
      dq[s.action] = 2.0 * (q[s.action] - target) * inv;
      const double in[1] = {s.obs};
      q_net_.backprop_accumulate(in, dq, grad);
    }
    adam_step(params, grad, adam_, config_.learning_rate);
    q_net_.set_parameters(params);
  }
  return true;
}

void DqnTrainer::observe(double obs, std::size_t action, double reward, double next_obs,
                         RngStream& rng) {
  store({obs, action, reward, next_obs}, rng);
  update(rng);
}

// ---------------------------------------------------------------------------

ReinforceTrainer::ReinforceTrainer(ActionTable table, const ReinforceTrainerConfig& config,
                                   std::uint64_t seed)
    : table_(std::move(table)),
      config_(config),
      policy_net_([&] {
        RngStream r(seed);
        return Mlp({1, config.hidden, table_.size()}, Activation::Tanh, Activation::Identity, r);
      }()),
      adam_(policy_net_.parameter_count()) {
  if (config_.episode_length < 1) throw std::invalid_argument("ReinforceTrainer: episode_length >= 1");
}

std::vector<double> ReinforceTrainer::action_probabilities(double obs) const {
  const double in[1] = {obs};
  std::vector<double> logits = policy_net_.forward(in);
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& l : logits) {
    l = std::exp(l - m);
    sum += l;
  }
  for (double& l : logits) l /= sum;
  return logits;
}

std::size_t ReinforceTrainer::select(double obs, RngStream& rng) {
  std::vector<double> probs = action_probabilities(obs);
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

void ReinforceTrainer::reinforce_update(std::span<const EpisodeStep> episode) {
  if (episode.size() != static_cast<std::size_t>(config_.episode_length)) {
    throw std::invalid_argument("reinforce_update: wrong episode length");
  }
  double episode_return = 0.0;
  for (const EpisodeStep& s : episode) episode_return += s.reward;

  std::vector<double> grad(policy_net_.parameter_count(), 0.0);
  for (const EpisodeStep& s : episode) {
    std::vector<double> probs = action_probabilities(s.obs);
    // d/dlogits of -return * log pi(a | obs)
    std::vector<double> dlogits(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      dlogits[i] = episode_return * (probs[i] - (i == s.action ? 1.0 : 0.0));
    }
    const double in[1] = {s.obs};
    policy_net_.backprop_accumulate(in, dlogits, grad);
  }
  std::vector<double> params = policy_net_.parameters();
  adam_step(params, grad, adam_, config_.learning_rate);
  policy_net_.set_parameters(params);
}

void ReinforceTrainer::observe(double obs, std::size_t action, double reward, double /*next_obs*/,
                               RngStream& /*rng*/) {
  pending_.push_back({obs, action, reward});
  if (pending_.size() == static_cast<std::size_t>(config_.episode_length)) {
    reinforce_update(pending_);
    pending_.clear();
  }
}

// ---------------------------------------------------------------------------

TpeAction fixed_baseline_action() { return {0.6, 0.6, 0.6}; }

TpeAction no_cyber_action() { return {0.0, 0.0, 1.0}; }

BaselineTrainer::BaselineTrainer(BaselineKind kind, ActionTable random_table)
    : kind_(kind), table_(std::move(random_table)) {
  if (kind != BaselineKind::Random) {
    throw std::invalid_argument("BaselineTrainer: only the random kind takes a table");
  }
}

BaselineTrainer::BaselineTrainer(BaselineKind kind)
    : kind_(kind),
      table_(ActionTable::single(kind == BaselineKind::Fixed ? fixed_baseline_action()
                                                             : no_cyber_action())) {
  if (kind == BaselineKind::Random) {
    throw std::invalid_argument("BaselineTrainer: the random kind needs a table");
  }
}

BaselineTrainer BaselineTrainer::fixed(const TpeAction& action) {
  BaselineTrainer t(BaselineKind::Fixed);
  t.table_ = ActionTable::single(action);
  return t;
}

std::size_t BaselineTrainer::select(double /*obs*/, RngStream& rng) {
  if (kind_ == BaselineKind::Random) return rng.uniform_int(table_.size());
  return 0;
}

}  // namespace mbrl
