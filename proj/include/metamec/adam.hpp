#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "metamec/errors.hpp"
#include "metamec/mlp.hpp"

namespace metamec {

struct AdamState {
  GradBuffer first_moment;
  GradBuffer second_moment;
  std::uint64_t step_count = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(const MlpParams& params, double learning_rate)
      : first_moment(params), second_moment(params), lr(learning_rate) {}
};

/// Rescales `grads` so its global L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
inline double clip_global_norm(GradBuffer& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

/// Bias-corrected Adam update applied in place.
inline void adam_step(MlpParams& params, const GradBuffer& grads, AdamState& state) {
  if (!grads.congruent_with(params) || !state.first_moment.congruent_with(params) ||
      !state.second_moment.congruent_with(params))
    throw ShapeError("adam_step: params, gradients and moments are not congruent");
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    bool finite = true;
    for (double g : grads.weights[l].data) finite = finite && std::isfinite(g);
    for (double g : grads.biases[l]) finite = finite && std::isfinite(g);
    if (!finite) throw DivergenceError("non-finite gradient in layer " + std::to_string(l));
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](double& p, double g, double& m, double& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    p -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  };
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    auto& w = params.weights[l].data;
    const auto& g = grads.weights[l].data;
    auto& m = state.first_moment.weights[l].data;
    auto& v = state.second_moment.weights[l].data;
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], g[i], m[i], v[i]);
    auto& b = params.biases[l];
    const auto& gb = grads.biases[l];
    auto& mb = state.first_moment.biases[l];
    auto& vb = state.second_moment.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
  if (!all_finite(params)) throw DivergenceError("adam_step produced non-finite parameters");
}

}  // namespace metamec
