// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file core.hpp
 * @brief Shared domain types and probability primitives.
 *
 * Everything here is a value type. Logits and probabilities are always
 * double precision; negative infinity is the only masking sentinel a logit
 * may carry, and it maps to probability exactly zero.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace contrast {

using TokenId = std::uint32_t;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Dense token table. Indices are [0, n) and the string/index mapping is a
/// bijection.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens,
                      std::optional<TokenId> eos_id = std::nullopt)
      : tokens_(std::move(tokens)), eos_id_(eos_id) {
    if (tokens_.empty()) throw std::invalid_argument("vocabulary is empty");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
      if (!inserted) {
        throw std::invalid_argument("duplicate vocabulary entry: " + tokens_[i]);
      }
    }
    if (eos_id_ && *eos_id_ >= tokens_.size()) {
      throw std::invalid_argument("eos id outside vocabulary");
    }
  }

  /// Opaque vocabulary of size n whose entries are rendered as "#<id>".
  static Vocabulary placeholder(std::size_t n,
                                std::optional<TokenId> eos_id = std::nullopt) {
    std::vector<std::string> tokens;
    tokens.reserve(n);
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("#" + std::to_string(i));
    return Vocabulary(std::move(tokens), eos_id);
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  std::optional<TokenId> eos_id() const noexcept { return eos_id_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  const std::string& token(TokenId id) const { return tokens_.at(id); }

  std::optional<TokenId> find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.eos_id_ == b.eos_id_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::optional<TokenId> eos_id_;
};

/// Raw next-token scores. Entries are finite or negative infinity.
class LogitVector {
 public:
  LogitVector() = default;

  explicit LogitVector(std::vector<double> scores) : scores_(std::move(scores)) {
    for (double s : scores_) {
      if (std::isnan(s) || s == std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("logit is NaN or +inf");
      }
    }
  }

  std::span<const double> scores() const noexcept { return scores_; }
  const std::vector<double>& values() const noexcept { return scores_; }
  std::size_t size() const noexcept { return scores_.size(); }
  double operator[](std::size_t i) const { return scores_[i]; }

  bool has_finite_support() const noexcept {
    return std::any_of(scores_.begin(), scores_.end(),
                       [](double s) { return std::isfinite(s); });
  }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> scores_;
};

/// Normalized probabilities; entries are non-negative and sum to one within
/// 1e-9.
class ProbDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProbDistribution() = default;

  explicit ProbDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("empty distribution");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || p > 1.0) {
        throw std::invalid_argument("probability outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("probabilities do not sum to one");
    }
  }

  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& values() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

  friend bool operator==(const ProbDistribution&, const ProbDistribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Conditioning prefix: query plus generated tokens so far.
struct Context {
  std::vector<TokenId> token_ids;

  std::size_t size() const noexcept { return token_ids.size(); }
  void append(TokenId id) { token_ids.push_back(id); }

  friend bool operator==(const Context&, const Context&) = default;
};

/// The two conditionings contrasted at every step: one standing for the
/// visual content, one for the model's own description of it. Generated
/// tokens extend both identically.
struct ContextPair {
  Context visual;
  Context description;

  void append(TokenId id) {
    visual.append(id);
    description.append(id);
  }
};

enum class Strategy { greedy, nucleus, beam, cd_fixed, code };
enum class Selector { argmax, sample };

inline std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::greedy: return "greedy";
    case Strategy::nucleus: return "nucleus";
    case Strategy::beam: return "beam";
    case Strategy::cd_fixed: return "cd_fixed";
    case Strategy::code: return "code";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  for (Strategy s : {Strategy::greedy, Strategy::nucleus, Strategy::beam,
                     Strategy::cd_fixed, Strategy::code}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

inline std::string_view to_string(Selector s) noexcept {
  return s == Selector::argmax ? "argmax" : "sample";
}

inline std::optional<Selector> parse_selector(std::string_view text) noexcept {
  if (text == "argmax") return Selector::argmax;
  if (text == "sample") return Selector::sample;
  return std::nullopt;
}

/// True for strategies that contrast two conditionings and therefore query
/// both providers at every step.
inline bool is_contrastive(Strategy s) noexcept {
  return s == Strategy::code || s == Strategy::cd_fixed;
}

struct DecodeConfig {
  Strategy strategy = Strategy::code;
  double alpha = 1.0;   // fixed contrast weight (cd_fixed)
  double beta = 0.1;    // fixed plausibility cutoff (cd_fixed)
  double k = 0.3;       // divergence smoothing exponent (code)
  double top_p = 0.95;
  double temperature = 1.0;
  std::uint32_t num_beams = 5;
  std::size_t max_tokens = 32;
  std::uint64_t seed = 0;
  /// Unset means the strategy's natural selector: sample for nucleus,
  /// argmax for everything else.
  std::optional<Selector> selector;

  Selector effective_selector() const noexcept {
    if (selector) return *selector;
    return strategy == Strategy::nucleus ? Selector::sample : Selector::argmax;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) out.push_back("alpha: must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) out.push_back("beta: must be in [0, 1]");
    if (!(k > 0.0) || !std::isfinite(k)) out.push_back("k: must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) out.push_back("top_p: must be in (0, 1]");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      out.push_back("temperature: must be > 0");
    }
    if (num_beams == 0) out.push_back("num_beams: must be >= 1");
    if (max_tokens == 0) out.push_back("max_tokens: must be >= 1");
    if (selector) {
      if (strategy == Strategy::greedy && *selector == Selector::sample) {
        out.push_back("selector: greedy decoding cannot sample");
      }
      if (strategy == Strategy::nucleus && *selector == Selector::argmax) {
        out.push_back("selector: nucleus decoding always samples");
      }
      if (strategy == Strategy::beam && *selector == Selector::sample) {
        out.push_back("selector: beam search does not sample");
      }
    }
    return out;
  }
};

/// Per-step controls derived from the divergence between the two
/// conditionings. alpha_t + beta_t == 1.
struct CodeControls {
  double divergence = 0.0;
  double alpha_t = 1.0;
  double beta_t = 0.0;
};

/// Audit record of one decode step.
struct StepRecord {
  std::size_t step = 0;
  LogitVector logits_v;
  std::optional<LogitVector> logits_d;  // absent for single-stream strategies
  std::optional<CodeControls> controls;  // present for code only
  std::vector<TokenId> head_set;         // candidates with nonzero final mass
  LogitVector contrasted_logits;         // final logits before temperature
  TokenId chosen = 0;
};

namespace detail {

inline std::vector<double> softmax_values(std::span<const double> logits,
                                          double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  double max = kNegInf;
  for (double s : logits) {
    if (std::isfinite(s) && s > max) max = s;
  }
  if (max == kNegInf) throw std::invalid_argument("empty support");

  std::vector<double> out(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kNegInf) continue;
    out[i] = std::exp((logits[i] - max) / temperature);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

}  // namespace detail

/// Numerically stable softmax. Masked (-inf) entries map to exactly 0.
/// Throws std::invalid_argument on an all-masked input or a non-positive
/// temperature.
inline ProbDistribution softmax(const LogitVector& logits, double temperature = 1.0) {
  return ProbDistribution(detail::softmax_values(logits.scores(), temperature));
}

/// Index of the largest entry; ties go to the lowest index.
inline TokenId argmax_token(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

inline TokenId argmax_token(const LogitVector& logits) { return argmax_token(logits.scores()); }
inline TokenId argmax_token(const ProbDistribution& p) { return argmax_token(p.probs()); }

}  // namespace contrast
