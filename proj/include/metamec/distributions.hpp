#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "metamec/errors.hpp"
#include "metamec/rng.hpp"

namespace metamec {

/// Numerically stable softmax (max-subtracted).
inline std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("softmax: empty input");
  double hi = v[0];
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("softmax: non-finite input");
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - hi);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

/// log softmax evaluated directly from logits; avoids log(0) for saturated heads.
inline std::vector<double> log_softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("log_softmax: empty input");
  double hi = v[0];
  for (double x : v) hi = std::max(hi, x);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  const double lse = hi + std::log(sum);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
  return out;
}

/// Shannon entropy (nats) of a categorical given its log-probabilities.
inline double categorical_entropy(std::span<const double> probs, std::span<const double> log_probs) {
  double h = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) h -= probs[i] * log_probs[i];
  return h;
}

struct CategoricalDraw {
  std::size_t index = 0;
  double log_prob = 0.0;
};

inline void validate_distribution(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("categorical: empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("categorical: entries must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("categorical: probabilities do not sum to 1");
}

/// Inverse-CDF draw consuming exactly one uniform from `rng`.
inline CategoricalDraw sample_categorical(std::span<const double> probs, RngStream& rng) {
  validate_distribution(probs);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }
  // Rounding can leave the tail cumulative just below 1; never land on a zero-mass entry.
  while (probs[chosen] == 0.0 && chosen > 0) --chosen;
  return {chosen, std::log(probs[chosen])};
}

/// First index of the maximum.
inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace metamec
