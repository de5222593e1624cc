/*
Copyright 2026 The RMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Scalar building blocks: the cumulative-gap exponent ladder, floored radial
// powers and the log-primitive (r^mu - 1) / mu with its mu -> 0 limit.

#ifndef RMN_RADIAL_BASIS_HPP
#define RMN_RADIAL_BASIS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rmn/core.hpp"

namespace rmn {

struct StabilizationConfig {
  double r_floor = 1e-12;
};

struct LogPrimitiveParams {
  double coeff = 0.0;
  double mu_log = 0.0;
  double eps_log = 1e-4;
};

/// Raw gap parameters s_1..s_K and the interval the derived exponents live in.
struct ExponentLadder {
  std::vector<double> raw_gaps;
  double mu_min = -2.0;
  double mu_max = 4.0;
  double eps_gap = 0.01;
};

inline double softplus(double s) { return std::log1p(std::exp(-std::abs(s))) + std::max(s, 0.0); }

/// d softplus / ds.
inline double logistic(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// mu_k = mu_min + (mu_max - mu_min) * sigma_k / sigma_K with sigma the running sum of
/// softplus(s_j) + eps. The last exponent is pinned to mu_max.
inline void ladder_exponents(std::span<const double> raw, double mu_min, double mu_max, double eps_gap,
                             std::span<double> out) {
  const std::size_t K = raw.size();
  double sigma = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    sigma += softplus(raw[k]) + eps_gap;
    out[k] = sigma;
  }
  const double range = mu_max - mu_min;
  for (std::size_t k = 0; k + 1 < K; ++k) out[k] = mu_min + range * (out[k] / sigma);
  if (K > 0) out[K - 1] = mu_max;
}

inline std::vector<double> ladder_exponents(const ExponentLadder& ladder) {
  require(!ladder.raw_gaps.empty(), "ladder_exponents: K must be >= 1");
  std::vector<double> mu(ladder.raw_gaps.size());
  ladder_exponents(ladder.raw_gaps, ladder.mu_min, ladder.mu_max, ladder.eps_gap, mu);
  return mu;
}

/// Dense K x K Jacobian d mu_k / d s_j, row-major. Row K-1 is zero.
inline std::vector<double> ladder_jacobian(const ExponentLadder& ladder) {
  const std::size_t K = ladder.raw_gaps.size();
  require(K >= 1, "ladder_jacobian: K must be >= 1");
  std::vector<double> sigma(K);
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    s += softplus(ladder.raw_gaps[k]) + ladder.eps_gap;
    sigma[k] = s;
  }
  const double total = s;
  const double range = ladder.mu_max - ladder.mu_min;
  std::vector<double> jac(K * K, 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) {
      const double ind = j <= k ? 1.0 : 0.0;
      jac[k * K + j] = range * logistic(ladder.raw_gaps[j]) * (ind / total - sigma[k] / (total * total));
    }
  }
  return jac;
}

/// Pulls a gradient with respect to the exponents back onto the raw gaps in O(K):
/// grad_s_j = range * logistic(s_j) * (sum_{k>=j} g_k / sigma_K - sum_k g_k sigma_k / sigma_K^2).
inline void ladder_backprop(std::span<const double> raw, double mu_min, double mu_max, double eps_gap,
                            std::span<const double> grad_mu, std::span<double> grad_raw) {
  const std::size_t K = raw.size();
  if (K == 0) return;
  std::vector<double> sigma(K);
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    s += softplus(raw[k]) + eps_gap;
    sigma[k] = s;
  }
  const double total = s;
  const double range = mu_max - mu_min;
  // mu_K is pinned, so its gradient never reaches the gaps.
  double weighted = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) weighted += grad_mu[k] * sigma[k];
  double tail = 0.0;
  for (std::size_t j = K; j-- > 0;) {
    if (j + 1 < K) tail += grad_mu[j];
    grad_raw[j] = range * logistic(raw[j]) * (tail / total - weighted / (total * total));
  }
}

/// r^mu evaluated as exp(mu log max(r, r_floor)).
inline double stable_pow(double r, double mu, StabilizationConfig cfg = {}) {
  return std::exp(mu * std::log(std::max(r, cfg.r_floor)));
}

namespace detail {

// psi(r; mu) from L = log r. Below the threshold the series
// L + mu L^2/2 + mu^2 L^3/6 + mu^3 L^4/24 is used.
inline double log_primitive_from_log(double L, double mu, double eps_log) {
  if (std::abs(mu) > eps_log) return std::expm1(mu * L) / mu;
  const double mL = mu * L;
  return L * (1.0 + mL * (0.5 + mL * (1.0 / 6.0 + mL / 24.0)));
}

inline double log_primitive_dmu_from_log(double L, double mu, double eps_log) {
  if (std::abs(mu) > eps_log) {
    const double mL = mu * L;
    return (mL * std::exp(mL) - std::expm1(mL)) / (mu * mu);
  }
  const double mL = mu * L;
  return L * L * (0.5 + mL * (1.0 / 3.0 + mL / 8.0));
}

}  // namespace detail

/// psi_log(r; mu) = (r^mu - 1) / mu, with log r as the mu -> 0 limit.
inline double log_primitive(double r, double mu, const LogPrimitiveParams& params = {},
                            StabilizationConfig cfg = {}) {
  return detail::log_primitive_from_log(std::log(std::max(r, cfg.r_floor)), mu, params.eps_log);
}

/// d psi_log / d mu.
inline double log_primitive_dmu(double r, double mu, const LogPrimitiveParams& params = {},
                                StabilizationConfig cfg = {}) {
  return detail::log_primitive_dmu_from_log(std::log(std::max(r, cfg.r_floor)), mu, params.eps_log);
}

/// d psi_log / d r = r^(mu - 1) on both branches.
inline double log_primitive_dr(double r, double mu, const LogPrimitiveParams& /*params*/ = {},
                               StabilizationConfig cfg = {}) {
  return stable_pow(r, mu - 1.0, cfg);
}

}  // namespace rmn

#endif  // RMN_RADIAL_BASIS_HPP
