#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "metamec/errors.hpp"
#include "metamec/mlp.hpp"

namespace metamec {

/// Loss over a set of networks. When `grads` is non-null it is sized to match
/// `params` and must receive the analytic gradient.
using MultiNetLoss = std::function<double(const std::vector<MlpParams>& params, std::vector<GradBuffer>* grads)>;
using NetLoss = std::function<double(const MlpParams& params, GradBuffer* grad)>;
/// The part of a separable loss that depends on network `net`.
using NetTermLoss = std::function<double(const std::vector<MlpParams>& params, std::size_t net)>;

namespace detail {

template <class Visit>
void for_each_parameter(std::vector<MlpParams>& nets, std::vector<GradBuffer>& grads, Visit&& visit) {
  for (std::size_t n = 0; n < nets.size(); ++n) {
    for (std::size_t l = 0; l < nets[n].weights.size(); ++l) {
      auto& w = nets[n].weights[l].data;
      for (std::size_t i = 0; i < w.size(); ++i) visit(n, w[i], grads[n].weights[l].data[i]);
      auto& b = nets[n].biases[l];
      for (std::size_t i = 0; i < b.size(); ++i) visit(n, b[i], grads[n].biases[l][i]);
    }
  }
}

inline double relative_error(double g_analytic, double g_fd) {
  return std::abs(g_analytic - g_fd) / std::max(1e-8, std::abs(g_analytic) + std::abs(g_fd));
}

}  // namespace detail

/// Max over all parameters of |g_analytic - g_fd| / max(1e-8, |g_analytic| + |g_fd|),
/// with g_fd the central difference at step h.
inline double finite_diff_check(const MultiNetLoss& loss_fn, std::vector<MlpParams> params, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite_diff_check: h must be positive");
  std::vector<GradBuffer> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.emplace_back(p);
  const double base = loss_fn(params, &analytic);
  if (!std::isfinite(base)) throw InvalidArgument("finite_diff_check: non-finite loss");

  double worst = 0.0;
  detail::for_each_parameter(params, analytic, [&](std::size_t, double& theta, double g_analytic) {
    const double saved = theta;
    theta = saved + h;
    const double up = loss_fn(params, nullptr);
    theta = saved - h;
    const double down = loss_fn(params, nullptr);
    theta = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) throw InvalidArgument("finite_diff_check: non-finite loss");
    worst = std::max(worst, detail::relative_error(g_analytic, (up - down) / (2.0 * h)));
  });
  return worst;
}

/// Same check for a loss that is a sum of per-network terms: analytic
/// gradients come from `loss_fn`, differences from `term_fn(params, n)` for
/// the network being perturbed. Differencing only the affected term keeps
/// roundoff from the other terms out of the estimate.
inline double finite_diff_check(const MultiNetLoss& loss_fn, const NetTermLoss& term_fn, std::vector<MlpParams> params,
                                double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite_diff_check: h must be positive");
  std::vector<GradBuffer> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.emplace_back(p);
  if (!std::isfinite(loss_fn(params, &analytic))) throw InvalidArgument("finite_diff_check: non-finite loss");

  double worst = 0.0;
  detail::for_each_parameter(params, analytic, [&](std::size_t net, double& theta, double g_analytic) {
    const double saved = theta;
    theta = saved + h;
    const double up = term_fn(params, net);
    theta = saved - h;
    const double down = term_fn(params, net);
    theta = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) throw InvalidArgument("finite_diff_check: non-finite loss");
    worst = std::max(worst, detail::relative_error(g_analytic, (up - down) / (2.0 * h)));
  });
  return worst;
}

inline double finite_diff_check(const NetLoss& loss_fn, const MlpParams& params, double h) {
  MultiNetLoss wrapped = [&](const std::vector<MlpParams>& nets, std::vector<GradBuffer>* grads) {
    return loss_fn(nets.front(), grads ? &grads->front() : nullptr);
  };
  return finite_diff_check(wrapped, std::vector<MlpParams>{params}, h);
}

}  // namespace metamec
