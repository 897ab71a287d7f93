// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file strategies.hpp
 * @brief Per-step token selection rules.
 *
 * Fixed contrastive decoding scores tokens with
 *
 *   (1 + alpha) * logit_expert - alpha * logit_amateur
 *
 * and keeps only tokens whose expert probability is at least beta times the
 * expert maximum. Description-contrastive decoding (code_step) uses the same
 * contrast with the description-conditioned logits as the amateur, but both
 * alpha and beta are recomputed at every step from the bounded divergence D
 * between the two distributions: alpha_t = 1 - D, beta_t = D. Tokens outside
 * the candidate pool get probability exactly 0.
 */

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "contrast/core.hpp"
#include "contrast/divergence.hpp"
#include "contrast/rng.hpp"

namespace contrast {

/// Elementwise (1 + alpha) * expert - alpha * amateur.
///
/// A token masked on the expert side stays masked. A token masked only on
/// the amateur side is masked too, unless alpha == 0, where the amateur term
/// vanishes and the expert logit passes through unchanged.
inline std::vector<double> contrast_logits(const LogitVector& expert,
                                           const LogitVector& amateur, double alpha) {
  if (expert.size() != amateur.size()) {
    throw std::invalid_argument("contrast: logit vectors differ in length");
  }
  std::vector<double> out(expert.size());
  for (std::size_t i = 0; i < expert.size(); ++i) {
    const double e = expert[i];
    const double a = amateur[i];
    if (e == kNegInf) {
      out[i] = kNegInf;
    } else if (alpha == 0.0) {
      out[i] = e;
    } else if (a == kNegInf) {
      out[i] = kNegInf;
    } else {
      out[i] = (1.0 + alpha) * e - alpha * a;
    }
  }
  return out;
}

/// Softmax of the fixed-alpha contrast at temperature 1.
inline ProbDistribution cd_distribution(const LogitVector& logits_expert,
                                        const LogitVector& logits_amateur, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("cd_distribution: alpha must be >= 0");
  const auto contrasted = contrast_logits(logits_expert, logits_amateur, alpha);
  return ProbDistribution(detail::softmax_values(contrasted, 1.0));
}

/// {i : p[i] >= beta * max(p)}, ascending. Always contains every argmax.
inline std::vector<TokenId> plausibility_head(const ProbDistribution& p, double beta) {
  const auto probs = p.probs();
  const double threshold = beta * *std::max_element(probs.begin(), probs.end());
  std::vector<TokenId> head;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= threshold) head.push_back(static_cast<TokenId>(i));
  }
  return head;
}

/// Sets every entry outside `keep` (ascending ids) to -inf.
inline void mask_outside(std::vector<double>& logits, std::span<const TokenId> keep) {
  std::size_t next = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (next < keep.size() && keep[next] == i) {
      ++next;
    } else {
      logits[i] = kNegInf;
    }
  }
}

/// Masks `contrasted` outside `head`. If that leaves nothing (the amateur
/// side ruled out the whole pool), the pool is scored by `fallback` instead.
inline std::vector<double> restrict_to_pool(std::vector<double> contrasted,
                                            std::span<const TokenId> head,
                                            const LogitVector& fallback) {
  mask_outside(contrasted, head);
  if (std::none_of(contrasted.begin(), contrasted.end(),
                   [](double s) { return s != kNegInf; })) {
    contrasted = fallback.values();
    mask_outside(contrasted, head);
  }
  return contrasted;
}

struct CodeStep {
  ProbDistribution distribution;
  StepRecord record;  // chosen = argmax of the distribution; step left at 0
};

/// One step of description-contrastive decoding.
///
/// The divergence and the candidate pool are computed from the raw
/// distributions at temperature 1. If every candidate is masked by the
/// amateur side (only possible when the amateur rules out the whole pool),
/// the pool falls back to the visual logits.
inline CodeStep code_step(const LogitVector& logits_v, const LogitVector& logits_d, double k) {
  if (logits_v.size() != logits_d.size()) {
    throw std::invalid_argument("code_step: logit vectors differ in length");
  }
  const ProbDistribution p_v = softmax(logits_v, 1.0);
  const ProbDistribution p_d = softmax(logits_d, 1.0);
  const CodeControls controls = restriction_params(p_v, p_d, k);

  std::vector<TokenId> head = plausibility_head(p_v, controls.beta_t);
  assert(!head.empty());

  std::vector<double> contrasted =
      restrict_to_pool(contrast_logits(logits_v, logits_d, controls.alpha_t), head, logits_v);

  ProbDistribution dist(detail::softmax_values(contrasted, 1.0));
  StepRecord record;
  record.logits_v = logits_v;
  record.logits_d = logits_d;
  record.controls = controls;
  record.head_set = std::move(head);
  record.chosen = argmax_token(std::span<const double>(contrasted));
  record.contrasted_logits = LogitVector(std::move(contrasted));
  return CodeStep{std::move(dist), std::move(record)};
}

/// Smallest set of most-probable tokens whose mass reaches top_p, in
/// descending probability order (ties by lower id). Zero-probability tokens
/// are never included.
inline std::vector<TokenId> nucleus_set(const ProbDistribution& p, double top_p) {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p outside (0, 1]");
  const auto probs = p.probs();
  std::vector<TokenId> order;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) order.push_back(static_cast<TokenId>(i));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return probs[a] > probs[b]; });
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    mass += probs[order[keep++]];
    if (mass >= top_p) break;
  }
  order.resize(keep);
  return order;
}

/// Samples from the renormalized nucleus of p.
inline TokenId nucleus_step(const ProbDistribution& p, double top_p, Rng& rng) {
  const auto kept = nucleus_set(p, top_p);
  double mass = 0.0;
  for (TokenId id : kept) mass += p[id];
  const double u = rng.uniform() * mass;
  double acc = 0.0;
  for (TokenId id : kept) {
    acc += p[id];
    if (u < acc) return id;
  }
  return kept.back();
}

}  // namespace contrast
