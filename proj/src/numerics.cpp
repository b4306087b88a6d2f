#include "mbrl/numerics.hpp"

#include <cmath>

namespace mbrl {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
         RngStream& rng)
    : sizes_(std::move(layer_sizes)), hidden_act_(hidden), output_act_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("Mlp: zero-width layer");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    std::size_t fan_in = sizes_[l];
    std::size_t fan_out = sizes_[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    weights_.push_back(std::move(w));
    biases_.emplace_back(fan_out, 0.0);
  }
}

double Mlp::activate(double x, Activation a) const {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Relu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

double Mlp::activate_grad(double pre, double post, Activation a) const {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: return 1.0 - post * post;
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

namespace {
// Reused activation/delta workspaces. The hot loops run backprop per sample,
// so per-call allocations would dominate; instances stay single-threaded and
// each thread owns its scratch.
struct MlpScratch {
  std::vector<double> pre;    // pre-activations, all layers flattened
  std::vector<double> post;   // activations incl. the input, flattened
  std::vector<double> delta;
  std::vector<double> prev;
};
thread_local MlpScratch mlp_scratch;
}  // namespace

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (input.size() != sizes_.front()) {
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  }
  MlpScratch& ws = mlp_scratch;
  std::size_t widest = 0;
  for (std::size_t s : sizes_) widest = std::max(widest, s);
  ws.delta.resize(widest);
  ws.prev.resize(widest);
  double* act = ws.delta.data();
  double* next = ws.prev.data();
  std::copy(input.begin(), input.end(), act);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& w = weights_[l];
    const std::vector<double>& b = biases_[l];
    Activation a = (l + 1 == weights_.size()) ? output_act_ : hidden_act_;
    for (std::size_t r = 0; r < w.rows; ++r) {
      double z = b[r];
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) z += row[c] * act[c];
      next[r] = activate(z, a);
    }
    std::swap(act, next);
  }
  return std::vector<double>(act, act + sizes_.back());
}

void Mlp::backprop_accumulate(std::span<const double> input,
                              std::span<const double> output_gradient,
                              std::span<double> param_grad_sink,
                              std::vector<double>* input_gradient) const {
  if (input.size() != sizes_.front()) {
    throw std::invalid_argument("Mlp::backprop: input size mismatch");
  }
  if (output_gradient.size() != sizes_.back()) {
    throw std::invalid_argument("Mlp::backprop: output gradient size mismatch");
  }
  if (!param_grad_sink.empty() && param_grad_sink.size() != parameter_count()) {
    throw std::invalid_argument("Mlp::backprop: gradient sink size mismatch");
  }

  // Forward pass keeping pre- and post-activation values per layer.
  MlpScratch& ws = mlp_scratch;
  std::size_t post_total = 0, widest = 0;
  for (std::size_t s : sizes_) {
    post_total += s;
    widest = std::max(widest, s);
  }
  ws.post.resize(post_total);
  ws.pre.resize(post_total - sizes_.front());
  ws.delta.resize(widest);
  ws.prev.resize(widest);

  std::copy(input.begin(), input.end(), ws.post.begin());
  std::size_t post_off = 0, pre_off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& w = weights_[l];
    Activation a = (l + 1 == weights_.size()) ? output_act_ : hidden_act_;
    const double* in = &ws.post[post_off];
    double* pre = &ws.pre[pre_off];
    double* out = &ws.post[post_off + w.cols];
    for (std::size_t r = 0; r < w.rows; ++r) {
      double z = biases_[l][r];
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) z += row[c] * in[c];
      pre[r] = z;
      out[r] = activate(z, a);
    }
    post_off += w.cols;
    pre_off += w.rows;
  }

  double* delta = ws.delta.data();
  double* prev = ws.prev.data();
  std::copy(output_gradient.begin(), output_gradient.end(), delta);
  std::size_t param_off = parameter_count();
  for (std::size_t li = weights_.size(); li-- > 0;) {
    const Matrix& w = weights_[li];
    Activation a = (li + 1 == weights_.size()) ? output_act_ : hidden_act_;
    post_off -= w.cols;
    pre_off -= w.rows;
    param_off -= w.rows * w.cols + w.rows;
    const double* in = &ws.post[post_off];
    const double* pre = &ws.pre[pre_off];
    const double* out = &ws.post[post_off + w.cols];
    for (std::size_t r = 0; r < w.rows; ++r) {
      delta[r] *= activate_grad(pre[r], out[r], a);
    }
    if (!param_grad_sink.empty()) {
      double* wgrad = &param_grad_sink[param_off];
      double* bgrad = wgrad + w.rows * w.cols;
      for (std::size_t r = 0; r < w.rows; ++r) {
        const double dr = delta[r];
        double* wrow = &wgrad[r * w.cols];
        for (std::size_t c = 0; c < w.cols; ++c) wrow[c] += dr * in[c];
        bgrad[r] += dr;
      }
    }
    std::fill(prev, prev + w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double dr = delta[r];
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) prev[c] += row[c] * dr;
    }
    std::swap(delta, prev);
  }
  if (input_gradient) input_gradient->assign(delta, delta + sizes_.front());
}

Mlp::Gradients Mlp::backprop(std::span<const double> input,
                             std::span<const double> output_gradient) const {
  Gradients g;
  g.params.assign(parameter_count(), 0.0);
  backprop_accumulate(input, output_gradient, g.params, &g.input);
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += weights_[l].rows * weights_[l].cols + biases_[l].size();
  }
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].data.begin(), weights_[l].data.end());
    flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
  }
  return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("Mlp::set_parameters: size mismatch");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::size_t nw = weights_[l].rows * weights_[l].cols;
    std::copy(flat.begin() + off, flat.begin() + off + nw, weights_[l].data.begin());
    off += nw;
    std::copy(flat.begin() + off, flat.begin() + off + biases_[l].size(), biases_[l].begin());
    off += biases_[l].size();
  }
}

bool Mlp::same_architecture(const Mlp& other) const {
  return sizes_ == other.sizes_ && hidden_act_ == other.hidden_act_ &&
         output_act_ == other.output_act_;
}

void AdamState::reset() {
  std::fill(first_moment.begin(), first_moment.end(), 0.0);
  std::fill(second_moment.begin(), second_moment.end(), 0.0);
  step_count = 0;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: dimension mismatch");
  }
  if (learning_rate <= 0.0) throw std::invalid_argument("adam_step: learning_rate must be positive");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
  }
  state.step_count += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grads[i];
    v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
    double mhat = m / corr1;
    double vhat = v / corr2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

}  // namespace mbrl
