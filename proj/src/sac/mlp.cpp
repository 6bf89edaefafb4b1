#include "fastrl/sac/mlp.hpp"

#include <cmath>

#include "fastrl/core/kernels.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::sac {

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.input <= 0 || spec_.output <= 0) throw ConfigError("mlp needs input and output dims");
  int prev = spec_.input;
  std::size_t offset = 0;
  auto add_layer = [&](int out) {
    Layer l;
    l.in = prev;
    l.out = out;
    l.w = offset;
    offset += std::size_t(out) * prev;
    l.b = offset;
    offset += out;
    layers_.push_back(l);
    prev = out;
  };
  for (int h : spec_.hidden) add_layer(h);
  add_layer(spec_.output);
  params_.assign(offset, 0.0);
}

void Mlp::init_weights(core::Rng& rng) {
  for (const auto& l : layers_) {
    const double a = std::sqrt(6.0 / (l.in + l.out));
    for (std::size_t i = 0; i < std::size_t(l.out) * l.in; ++i)
      params_[l.w + i] = rng.uniform(-a, a);
    for (int i = 0; i < l.out; ++i) params_[l.b + i] = 0.0;
  }
}

void Mlp::forward(const double* x, int n, Cache& cache) const {
  cache.n = n;
  cache.acts.resize(layers_.size() - 1);
  const double* prev = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    const auto& l = layers_[i];
    auto& act = cache.acts[i];
    act.resize(std::size_t(n) * l.out);
    core::dense_forward(prev, params_.data() + l.w, params_.data() + l.b, act.data(), n,
                        l.in, l.out);
    core::tanh_forward(act.data(), act.data(), act.size());
    prev = act.data();
  }
  const auto& l = layers_.back();
  cache.out.resize(std::size_t(n) * l.out);
  core::dense_forward(prev, params_.data() + l.w, params_.data() + l.b, cache.out.data(), n,
                      l.in, l.out);
}

void Mlp::backward(const double* x, int n, const Cache& cache, const double* dy,
                   std::vector<double>& grads, double* dx) const {
  std::vector<double> d(dy, dy + std::size_t(n) * layers_.back().out);
  std::vector<double> d_prev;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    const auto& l = layers_[i];
    const double* input = (i == 0) ? x : cache.acts[i - 1].data();
    const bool need_dx = (i > 0) || dx != nullptr;
    double* dx_target = nullptr;
    if (i > 0) {
      d_prev.resize(std::size_t(n) * l.in);
      dx_target = d_prev.data();
    } else {
      dx_target = dx;
    }
    core::dense_backward(input, params_.data() + l.w, d.data(), need_dx ? dx_target : nullptr,
                         grads.data() + l.w, grads.data() + l.b, n, l.in, l.out);
    if (i > 0) {
      core::tanh_backward(cache.acts[i - 1].data(), d_prev.data(), d_prev.data(),
                          d_prev.size());
      d.swap(d_prev);
    }
  }
}

}  // namespace fastrl::sac
