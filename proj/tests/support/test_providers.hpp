// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "contrast/provider.hpp"

namespace testing_support {

/// Provider backed by a callable; counts calls per side.
class LambdaProvider final : public contrast::LogitProvider {
 public:
  using Fn = std::function<std::vector<double>(const contrast::Context&, contrast::Side, std::size_t)>;

  LambdaProvider(contrast::Vocabulary vocab, Fn fn) : vocab_(std::move(vocab)), fn_(std::move(fn)) {}

  const contrast::Vocabulary& vocabulary() const override { return vocab_; }
  std::optional<std::size_t> max_context() const override { return max_context_; }

  contrast::LogitVector next_logits(const contrast::Context& ctx, contrast::Side side,
                                    std::size_t step) override {
    ++calls;
    return contrast::LogitVector(fn_(ctx, side, step));
  }

  std::optional<std::size_t> max_context_;
  std::size_t calls = 0;

 private:
  contrast::Vocabulary vocab_;
  Fn fn_;
};

}  // namespace testing_support
