#include "mbrl/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbrl {

double reference_probability(long t, double phi, const EnsembleConfig& config) {
  if (!std::isfinite(phi)) throw std::invalid_argument("reference_probability: non-finite phi");
  if (t % 3 == 0) return 0.0;
  double p = (phi - config.phi_min) / (config.phi_max - config.phi_min);
  if (p > 1.0) p = 1.0;
  if (p < 0.0) p = 0.0;
  return p;
}

std::array<int, 3> order_rewards(const std::array<double, 3>& raw) {
  for (double r : raw) {
    if (!std::isfinite(r)) throw std::invalid_argument("order_rewards: non-finite reward");
  }
  std::array<int, 3> ranks{};
  for (int i = 0; i < 3; ++i) {
    int below = 0;
    for (int j = 0; j < 3; ++j) {
      if (raw[j] < raw[i]) ++below;
    }
    ranks[i] = below;  // ties share the lowest tied index
  }
  return ranks;
}

double skewness(const std::array<double, 3>& accumulated, double phi_min) {
  double best = std::max({accumulated[0], accumulated[1], accumulated[2]});
  double worst = std::min({accumulated[0], accumulated[1], accumulated[2]});
  if (best == worst) return phi_min;
  double median = accumulated[0] + accumulated[1] + accumulated[2] - best - worst;
  return (best - median) / (best - worst);
}

// ---------------------------------------------------------------------------

EnsembleBookkeeping::EnsembleBookkeeping(const EnsembleConfig& config) : config_(config) {
  if (config_.transfer_threshold < 1) {
    throw std::invalid_argument("EnsembleBookkeeping: transfer threshold >= 1");
  }
  if (!(config_.phi_max > config_.phi_min)) {
    throw std::invalid_argument("EnsembleBookkeeping: need phi_max > phi_min");
  }
}

EnsembleBookkeeping::StepOutcome EnsembleBookkeeping::record_step(
    const std::array<double, 3>& raw_rewards) {
  StepOutcome out;
  out.ranks = order_rewards(raw_rewards);
  rank_history_.push_back(out.ranks);
  ++n_c_;

  if (n_c_ > config_.transfer_threshold) {
    out.analysis_ran = true;
    std::array<double, 3> acc{};
    for (long j = 0; j < n_c_; ++j) {
      const auto& r = rank_history_[rank_history_.size() - 1 - static_cast<std::size_t>(j)];
      for (int i = 0; i < 3; ++i) acc[static_cast<std::size_t>(i)] += r[static_cast<std::size_t>(i)];
    }
    out.accumulated = acc;
    double max_acc = std::max({acc[0], acc[1], acc[2]});
    if (acc[static_cast<std::size_t>(best_)] < max_acc) {
      for (int i = 0; i < 3; ++i) {
        if (acc[static_cast<std::size_t>(i)] == max_acc) {
          best_ = i;
          break;
        }
      }
    }
    phi_ = skewness(acc, config_.phi_min);
    out.phi = phi_;
    out.transfer = (best_ != 0);
    n_c_ = 0;
  }
  out.best_index = best_;
  ++t_;
  return out;
}

// ---------------------------------------------------------------------------

EnsembleTrainer::EnsembleTrainer(std::array<TrainerSlot, 3> slots, const EnsembleConfig& config)
    : slots_(std::move(slots)), config_(config), book_(config) {
  dqn_ = dynamic_cast<DqnTrainer*>(slots_[0].trainer.get());
  if (dqn_ == nullptr) {
    throw std::invalid_argument("EnsembleTrainer: slot 0 must hold the DQN trainer");
  }
  for (const TrainerSlot& s : slots_) {
    if (!s.env || !s.controller || !s.model || !s.tpe || !s.trainer) {
      throw std::invalid_argument("EnsembleTrainer: incomplete slot");
    }
  }
}

void EnsembleTrainer::initialize() {
  std::array<std::size_t, 3> start{}, length{};
  for (std::size_t i = 0; i < 3; ++i) {
    start[i] = shared_log_.size();
    slots_[i].tpe->initialize();
    auto seed_data = slots_[i].tpe->real_buffer().all();
    shared_log_.insert(shared_log_.end(), seed_data.begin(), seed_data.end());
    length[i] = shared_log_.size() - start[i];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (j == i) continue;
      slots_[i].tpe->absorb_shared(
          std::span<const Transition>(shared_log_).subspan(start[j], length[j]));
    }
    marks_[i] = shared_log_.size();
  }
}

EnsembleTrainer::StepOutcome EnsembleTrainer::step(RngStream& rng) {
  if (done()) throw std::logic_error("EnsembleTrainer::step: sample budget exhausted");

  StepOutcome out;
  out.p_ref = book_.current_p_ref();
  const DdpgController* best_ctrl =
      &*slots_[static_cast<std::size_t>(book_.best_index())].controller;

  std::array<double, 3> obs_before{};
  for (std::size_t i = 0; i < 3; ++i) {
    TrainerSlot& slot = slots_[i];
    obs_before[i] = slot.tpe->observation();
    out.action_indices[i] = slot.trainer->select(obs_before[i], rng);
    out.actions[i] = slot.trainer->table().entry(out.action_indices[i]);

    slot.tpe->absorb_shared(std::span<const Transition>(shared_log_).subspan(marks_[i]));
    marks_[i] = shared_log_.size();

    slot.tpe->train_phase(out.actions[i]);

    auto collection = slot.tpe->collect_real_phase(
        out.actions[i], out.p_ref > 0.0 ? best_ctrl : nullptr, out.p_ref);
    shared_log_.insert(shared_log_.end(), collection.transitions.begin(),
                       collection.transitions.end());
    marks_[i] = shared_log_.size();
    out.raw_rewards[i] = collection.mean_reward;
    out.real_collected[i] = collection.count;
    out.reference_episodes[i] = collection.reference_episodes;

    long cyber = slot.tpe->collect_cyber_phase(out.actions[i]);
    slot.tpe->fit_model_phase();
    out.reports[i] = slot.tpe->finalize_step(collection, cyber);
  }

  auto bk = book_.record_step(out.raw_rewards);
  out.ranks = bk.ranks;
  out.analysis_ran = bk.analysis_ran;
  out.phi = bk.phi;

  // Trainer-level transitions feed the DQN memory only on clean evaluation
  // steps; contaminated ones are thrown away.
  if (out.p_ref == 0.0) {
    for (std::size_t i = 0; i < 3; ++i) {
      TrainerSample sample{obs_before[i], dqn_->table().nearest_index(out.actions[i]),
                           static_cast<double>(out.ranks[i]), out.reports[i].observation};
      dqn_->store(sample, rng);
    }
    dqn_->update(rng);
    out.dqn_memory_updated = true;
  }

  if (bk.transfer) {
    slots_[0].controller->copy_weights_from(
        *slots_[static_cast<std::size_t>(bk.best_index)].controller);
    out.transfer = true;
  }
  out.best_index = bk.best_index;
  out.done = done();
  return out;
}

}  // namespace mbrl
