#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metamec/distributions.hpp"
#include "metamec/errors.hpp"
#include "metamec/rng.hpp"

namespace metamec {

using Vec = std::vector<double>;

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

enum class HiddenActivation { tanh, relu };
enum class OutputActivation { linear, softmax };

/// Dense feed-forward network. weights[l] is (layer_sizes[l+1] x layer_sizes[l]).
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vec> biases;
  HiddenActivation hidden_activation = HiddenActivation::tanh;
  OutputActivation output_activation = OutputActivation::linear;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].data.size() + biases[l].size();
    return n;
  }

  bool operator==(const MlpParams&) const = default;
};

/// Gradient accumulator with the same shapes as an MlpParams.
struct GradBuffer {
  std::vector<Matrix> weights;
  std::vector<Vec> biases;

  GradBuffer() = default;
  explicit GradBuffer(const MlpParams& p) {
    weights.reserve(p.weights.size());
    for (const auto& w : p.weights) weights.emplace_back(w.rows, w.cols, 0.0);
    for (const auto& b : p.biases) biases.emplace_back(b.size(), 0.0);
  }

  void zero() {
    for (auto& w : weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& w : weights)
      for (double g : w.data) s += g * g;
    for (const auto& b : biases)
      for (double g : b) s += g * g;
    return s;
  }

  void scale(double factor) {
    for (auto& w : weights)
      for (double& g : w.data) g *= factor;
    for (auto& b : biases)
      for (double& g : b) g *= factor;
  }

  bool congruent_with(const MlpParams& p) const {
    if (weights.size() != p.weights.size() || biases.size() != p.biases.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows != p.weights[l].rows || weights[l].cols != p.weights[l].cols) return false;
      if (biases[l].size() != p.biases[l].size()) return false;
    }
    return true;
  }

  bool operator==(const GradBuffer&) const = default;
};

/// Per-layer values recorded by mlp_forward for the backward pass.
/// activations[0] is the input; activations[l+1] is the post-activation
/// output of layer l (softmax probabilities for a softmax output layer).
struct MlpCache {
  std::vector<Vec> activations;
};

/// Xavier/Glorot uniform weights, zero biases.
inline MlpParams make_mlp(std::vector<std::size_t> layer_sizes, HiddenActivation hidden,
                          OutputActivation output, RngStream& rng) {
  if (layer_sizes.size() < 2) throw ShapeError("mlp needs at least an input and an output layer");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw ShapeError("mlp layer sizes must be positive");
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.hidden_activation = hidden;
  p.output_activation = output;
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    const std::size_t in = p.layer_sizes[l];
    const std::size_t out = p.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(out, in);
    for (double& x : w.data) x = rng.uniform(-limit, limit);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(out, 0.0);
  }
  return p;
}

namespace detail {

inline void check_mlp_shape(const MlpParams& p) {
  if (p.layer_sizes.size() != p.weights.size() + 1 || p.biases.size() != p.weights.size())
    throw ShapeError("mlp params: layer count mismatch");
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    if (p.weights[l].rows != p.layer_sizes[l + 1] || p.weights[l].cols != p.layer_sizes[l] ||
        p.biases[l].size() != p.layer_sizes[l + 1])
      throw ShapeError("mlp params: layer " + std::to_string(l) + " has inconsistent shape");
  }
}

inline double activate(HiddenActivation a, double z) {
  return a == HiddenActivation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the post-activation value.
inline double activate_grad_from_output(HiddenActivation a, double y) {
  return a == HiddenActivation::tanh ? 1.0 - y * y : (y > 0.0 ? 1.0 : 0.0);
}

}  // namespace detail

inline Vec mlp_forward(const MlpParams& params, std::span<const double> x, MlpCache* cache = nullptr) {
  if (x.size() != params.input_size())
    throw ShapeError("mlp_forward: input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(params.input_size()));
  const std::size_t layers = params.layer_count();
  Vec current(x.begin(), x.end());
  if (cache) {
    cache->activations.resize(layers + 1);
    cache->activations[0] = current;
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = params.weights[l];
    const Vec& b = params.biases[l];
    Vec next(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double* row = &w.data[r * w.cols];
      double s = b[r];
      for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * current[c];
      next[r] = s;
    }
    if (l + 1 < layers) {
      for (double& v : next) v = detail::activate(params.hidden_activation, v);
    } else if (params.output_activation == OutputActivation::softmax) {
      next = softmax(next);
    }
    current = std::move(next);
    if (cache) cache->activations[l + 1] = current;
  }
  return current;
}

/// Accumulates d(output . upstream)/d(params) into `grads`.
inline void mlp_backward_accumulate(const MlpParams& params, const MlpCache& cache,
                                    std::span<const double> upstream, GradBuffer& grads) {
  const std::size_t layers = params.layer_count();
  if (cache.activations.size() != layers + 1) throw ShapeError("mlp_backward: cache does not match params");
  if (upstream.size() != params.output_size())
    throw ShapeError("mlp_backward: upstream gradient has " + std::to_string(upstream.size()) +
                     " entries, expected " + std::to_string(params.output_size()));
  if (!grads.congruent_with(params)) throw ShapeError("mlp_backward: grad buffer not congruent with params");

  // delta = d loss / d pre-activation of the current layer
  Vec delta(upstream.begin(), upstream.end());
  if (params.output_activation == OutputActivation::softmax) {
    const Vec& p = cache.activations[layers];
    double dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * delta[i];
    for (std::size_t i = 0; i < p.size(); ++i) delta[i] = p[i] * (delta[i] - dot);
  }
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = params.weights[l];
    const Vec& input = cache.activations[l];
    if (input.size() != w.cols) throw ShapeError("mlp_backward: cache does not match params");
    Matrix& gw = grads.weights[l];
    Vec& gb = grads.biases[l];
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      gb[r] += d;
      if (d == 0.0) continue;
      double* grow = &gw.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) grow[c] += d * input[c];
    }
    if (l == 0) break;
    Vec prev(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) prev[c] += d * row[c];
    }
    for (std::size_t c = 0; c < w.cols; ++c)
      prev[c] *= detail::activate_grad_from_output(params.hidden_activation, input[c]);
    delta = std::move(prev);
  }
}

inline GradBuffer mlp_backward(const MlpParams& params, const MlpCache& cache,
                               std::span<const double> upstream) {
  detail::check_mlp_shape(params);
  GradBuffer g(params);
  mlp_backward_accumulate(params, cache, upstream, g);
  return g;
}

inline bool all_finite(const MlpParams& p) {
  for (const auto& w : p.weights)
    for (double x : w.data)
      if (!std::isfinite(x)) return false;
  for (const auto& b : p.biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace metamec
