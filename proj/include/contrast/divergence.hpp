// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file divergence.hpp
 * @brief Bounded divergence between two next-token distributions and the
 * per-step contrast controls derived from it.
 *
 *   D(P||Q) = 1/2 * sum_i (p_i + q_i) * log2(|p_i - q_i|^k + 1)
 *
 * D is symmetric, lies in [0, 1], and is 0 exactly when P == Q. Because
 * |p_i - q_i| <= 1, each log term is at most 1, and the weights sum to 2.
 * Smaller k inflates small differences, so the statistic grows as k shrinks.
 */

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include "contrast/core.hpp"

namespace contrast {

/// Vocabulary size from which the sum switches to compensated accumulation.
inline constexpr std::size_t kCompensatedSumThreshold = 10'000;

inline double bounded_divergence(const ProbDistribution& p, const ProbDistribution& q,
                                 double k) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("bounded_divergence: distribution sizes differ");
  }
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("bounded_divergence: k must be > 0");
  }

  const auto ps = p.probs();
  const auto qs = q.probs();
  const bool compensated = ps.size() >= kCompensatedSumThreshold;

  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double gap = std::abs(ps[i] - qs[i]);
    if (gap == 0.0) continue;
    const double powered = std::exp(k * std::log(gap));
    const double term = (ps[i] + qs[i]) * std::log1p(powered) / std::numbers::ln2;
    if (compensated) {
      // Neumaier variant of Kahan summation.
      const double t = sum + term;
      carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    } else {
      sum += term;
    }
  }
  const double d = 0.5 * (sum + carry);
  return std::clamp(d, 0.0, 1.0);
}

/// Dynamic contrast weight alpha_t = 1 - D and candidate-pool cutoff
/// beta_t = D for one step.
inline CodeControls restriction_params(const ProbDistribution& p_visual,
                                       const ProbDistribution& p_description, double k) {
  const double d = bounded_divergence(p_visual, p_description, k);
  return CodeControls{d, 1.0 - d, d};
}

}  // namespace contrast
