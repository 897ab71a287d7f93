// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file decode.hpp
 * @brief The decode loop, beam search, and trace recording.
 */

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <vector>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/provider.hpp"
#include "contrast/rng.hpp"
#include "contrast/strategies.hpp"
#include "contrast/trace.hpp"

namespace contrast {

struct DecodeResult {
  std::vector<TokenId> tokens;
  std::vector<StepRecord> trace;
  std::size_t calls_v = 0;
  std::size_t calls_d = 0;
};

struct BeamHypothesis {
  std::vector<TokenId> token_ids;
  double cum_logprob = 0.0;
  bool finished = false;
};

namespace detail {

inline void require_same_vocab(const LogitProvider& a, const LogitProvider& b) {
  if (a.vocabulary().size() != b.vocabulary().size()) {
    throw ConfigError("providers disagree on vocabulary size (" +
                      std::to_string(a.vocabulary().size()) + " vs " +
                      std::to_string(b.vocabulary().size()) + ")");
  }
}

/// Queries a provider, validating the response and tagging any failure with
/// the decode step.
inline LogitVector fetch(LogitProvider& provider, const Context& ctx, Side side, std::size_t step) {
  try {
    if (auto limit = provider.max_context(); limit && ctx.size() >= *limit) {
      throw ProviderError("context overflow: " + std::to_string(ctx.size()) +
                          " tokens reaches the provider limit of " + std::to_string(*limit));
    }
    auto logits = provider.next_logits(ctx, side, step);
    check_provider_logits(logits, provider.vocabulary().size());
    return logits;
  } catch (Error& e) {
    e.set_step(step);
    throw;
  } catch (const std::exception& e) {
    ProviderError wrapped(std::string("provider failure: ") + e.what());
    wrapped.set_step(step);
    throw wrapped;
  }
}

inline bool exhausted(const LogitProvider& provider, std::size_t step) {
  const auto limit = provider.max_steps();
  return limit && step >= *limit;
}

inline std::vector<double> log_softmax(const LogitVector& logits, double temperature) {
  auto probs = softmax_values(logits.scores(), temperature);
  for (double& p : probs) p = p > 0.0 ? std::log(p) : kNegInf;
  return probs;
}

inline std::vector<TokenId> finite_support(std::span<const double> logits) {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] != kNegInf) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

}  // namespace detail

/// Length-limited beam search over per-step log-probabilities. Finished
/// hypotheses (eos emitted) are frozen and keep competing by cumulative
/// log-probability; there is no length normalization. Returns the final
/// beams, best first.
inline std::vector<BeamHypothesis> beam_search(LogitProvider& provider, const Context& ctx,
                                               const DecodeConfig& config) {
  if (config.num_beams == 0) throw ConfigError("num_beams: must be >= 1");
  const auto eos = provider.vocabulary().eos_id();
  std::vector<BeamHypothesis> beams{BeamHypothesis{}};

  for (std::size_t step = 0; step < config.max_tokens; ++step) {
    if (detail::exhausted(provider, step)) break;
    if (std::all_of(beams.begin(), beams.end(), [](const auto& b) { return b.finished; })) break;

    std::vector<BeamHypothesis> candidates;
    for (const auto& beam : beams) {
      if (beam.finished) candidates.push_back(beam);
    }
    for (const auto& beam : beams) {
      if (beam.finished) continue;
      Context extended = ctx;
      for (TokenId id : beam.token_ids) extended.append(id);
      const auto logits = detail::fetch(provider, extended, Side::visual, step);
      const auto logp = detail::log_softmax(logits, config.temperature);

      // Only the best num_beams continuations of a beam can survive.
      std::vector<TokenId> order = detail::finite_support(logp);
      const auto keep = std::min<std::size_t>(config.num_beams, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                        [&](TokenId a, TokenId b) { return logp[a] > logp[b] || (logp[a] == logp[b] && a < b); });
      for (std::size_t i = 0; i < keep; ++i) {
        BeamHypothesis next = beam;
        next.token_ids.push_back(order[i]);
        next.cum_logprob += logp[order[i]];
        next.finished = eos && order[i] == *eos;
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.cum_logprob > b.cum_logprob; });
    candidates.resize(std::min<std::size_t>(candidates.size(), config.num_beams));
    beams = std::move(candidates);
  }
  return beams;
}

inline std::vector<TokenId> beam_decode(LogitProvider& provider, const Context& ctx,
                                        const DecodeConfig& config) {
  return beam_search(provider, ctx, config).front().token_ids;
}

/// Runs one decode.
///
/// Emits tokens until max_tokens, the vocabulary's eos token, or the end of
/// a replaying provider. Contrastive strategies (code, cd_fixed) query both
/// providers once per step; the others query only provider_v. The chosen
/// token extends both contexts of `pair`.
inline DecodeResult decode(LogitProvider& provider_v, LogitProvider* provider_d, ContextPair pair,
                           const DecodeConfig& config) {
  if (auto bad = config.violations(); !bad.empty()) throw ConfigError(std::move(bad));
  const bool contrastive = is_contrastive(config.strategy);
  if (contrastive) {
    if (provider_d == nullptr) {
      throw ConfigError("strategy " + std::string(to_string(config.strategy)) +
                        " requires a description-side provider");
    }
    detail::require_same_vocab(provider_v, *provider_d);
  }

  DecodeResult result;
  if (config.strategy == Strategy::beam) {
    InstrumentedProvider counted(provider_v);
    result.tokens = beam_decode(counted, pair.visual, config);
    result.calls_v = counted.calls();
    return result;
  }

  const auto eos = provider_v.vocabulary().eos_id();
  const Selector selector = config.effective_selector();
  Rng rng(config.seed);

  for (std::size_t step = 0; step < config.max_tokens; ++step) {
    if (detail::exhausted(provider_v, step) || (contrastive && detail::exhausted(*provider_d, step))) {
      break;
    }
    LogitVector logits_v = detail::fetch(provider_v, pair.visual, Side::visual, step);
    ++result.calls_v;
    std::optional<LogitVector> logits_d;
    if (contrastive) {
      logits_d = detail::fetch(*provider_d, pair.description, Side::description, step);
      ++result.calls_d;
    }

    StepRecord record;
    switch (config.strategy) {
      case Strategy::code: {
        record = code_step(logits_v, *logits_d, config.k).record;
        break;
      }
      case Strategy::cd_fixed: {
        record.head_set = plausibility_head(softmax(logits_v), config.beta);
        record.contrasted_logits = LogitVector(restrict_to_pool(
            contrast_logits(logits_v, *logits_d, config.alpha), record.head_set, logits_v));
        break;
      }
      case Strategy::greedy:
      case Strategy::nucleus:
        record.head_set = detail::finite_support(logits_v.scores());
        record.contrasted_logits = logits_v;
        break;
      case Strategy::beam:
        break;
    }
    record.step = step;
    record.logits_v = std::move(logits_v);
    record.logits_d = std::move(logits_d);

    if (selector == Selector::argmax) {
      record.chosen = argmax_token(record.contrasted_logits);
    } else {
      const auto dist = softmax(record.contrasted_logits, config.temperature);
      if (config.strategy == Strategy::nucleus) record.head_set = nucleus_set(dist, config.top_p);
      record.chosen = nucleus_step(dist, config.top_p, rng);
    }

    const TokenId chosen = record.chosen;
    result.trace.push_back(std::move(record));
    result.tokens.push_back(chosen);
    pair.append(chosen);
    if (eos && chosen == *eos) break;
  }
  return result;
}

/// Greedy decode that captures both logit streams into a trace. The
/// recorded choice at every step is the argmax of the visual logits.
inline TraceFile record_trace(LogitProvider& provider_v, LogitProvider& provider_d, ContextPair pair,
                              std::size_t max_tokens, TraceHeader header) {
  detail::require_same_vocab(provider_v, provider_d);
  header.vocab = provider_v.vocabulary();
  TraceFile trace{std::move(header), {}};
  const auto eos = provider_v.vocabulary().eos_id();
  for (std::size_t step = 0; step < max_tokens; ++step) {
    if (detail::exhausted(provider_v, step) || detail::exhausted(provider_d, step)) break;
    TraceStep s;
    s.step = step;
    s.logits_v = detail::fetch(provider_v, pair.visual, Side::visual, step);
    s.logits_d = detail::fetch(provider_d, pair.description, Side::description, step);
    s.recorded_choice = argmax_token(s.logits_v);
    const TokenId chosen = s.recorded_choice;
    trace.steps.push_back(std::move(s));
    pair.append(chosen);
    if (eos && chosen == *eos) break;
  }
  return trace;
}

}  // namespace contrast
