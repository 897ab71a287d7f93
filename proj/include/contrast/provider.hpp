// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/metrics.hpp"

namespace contrast {

/// Which conditioning a logit request is for.
enum class Side { visual, description };

inline std::string_view to_string(Side side) noexcept {
  return side == Side::visual ? "v" : "d";
}

/// Deterministic source of next-token logits.
///
/// Implementations must return the same logits for the same (context, side,
/// step) and a vector whose length equals vocabulary().size(). `step` is the
/// zero-based decode step; only replaying providers look at it.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual LogitVector next_logits(const Context& context, Side side, std::size_t step) = 0;

  /// Longest context the provider accepts, if bounded.
  virtual std::optional<std::size_t> max_context() const { return std::nullopt; }
  /// Number of steps a replaying provider can serve; decoding ends there.
  virtual std::optional<std::size_t> max_steps() const { return std::nullopt; }
  /// Whether next_logits may be called from several threads at once.
  virtual bool concurrent_safe() const { return true; }
};

/// Throws ProviderError unless `logits` is a valid response for a vocabulary
/// of size n.
inline void check_provider_logits(const LogitVector& logits, std::size_t n) {
  if (logits.size() != n) {
    throw ProviderError("provider returned " + std::to_string(logits.size()) +
                        " logits for a vocabulary of " + std::to_string(n));
  }
  if (!logits.has_finite_support()) {
    throw ProviderError("provider returned an all-masked logit vector");
  }
}

/// Decorator counting calls and recording each call's wall time.
class InstrumentedProvider final : public LogitProvider {
 public:
  explicit InstrumentedProvider(LogitProvider& inner) : inner_(inner) {}

  const Vocabulary& vocabulary() const override { return inner_.vocabulary(); }
  std::optional<std::size_t> max_context() const override { return inner_.max_context(); }
  std::optional<std::size_t> max_steps() const override { return inner_.max_steps(); }
  bool concurrent_safe() const override { return false; }

  LogitVector next_logits(const Context& context, Side side, std::size_t step) override {
    const auto start = std::chrono::steady_clock::now();
    auto out = inner_.next_logits(context, side, step);
    latency_.record(std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count());
    ++calls_;
    return out;
  }

  std::size_t calls() const noexcept { return calls_; }
  const LatencyHistogram& latency() const noexcept { return latency_; }
  void reset() {
    calls_ = 0;
    latency_.clear();
  }

 private:
  LogitProvider& inner_;
  std::size_t calls_ = 0;
  LatencyHistogram latency_;
};

}  // namespace contrast
