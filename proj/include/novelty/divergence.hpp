// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

namespace novelty {

/// Added to every entry of the reference distribution before the KL ratio.
inline constexpr double kKlSmoothing = 1e-12;

namespace detail {
inline void check_same_size(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distribution dimension mismatch");
}
}  // namespace detail

/// KL(p || q) in nats. q is smoothed with kKlSmoothing and renormalized so
/// the ratio is defined wherever p > 0; terms with p(w) = 0 contribute 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::check_same_size(p, q);
  const double norm = 1.0 + static_cast<double>(q.size()) * kKlSmoothing;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const double qs = (q[i] + kKlSmoothing) / norm;
    sum += p[i] * std::log(p[i] / qs);
  }
  return sum > 0.0 ? sum : 0.0;
}

/// Mean of both KL directions.
inline double symmetric_kl(std::span<const double> p, std::span<const double> q) {
  return 0.5 * (kl_divergence(p, q) + kl_divergence(q, p));
}

/// Jensen-Shannon divergence (natural log, so bounded by ln 2).
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
  detail::check_same_size(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) sum += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) sum += q[i] * std::log(q[i] / m);
  }
  sum *= 0.5;
  if (sum < 0.0) return 0.0;
  return sum > std::numbers::ln2 ? std::numbers::ln2 : sum;
}

}  // namespace novelty
