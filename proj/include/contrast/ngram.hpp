// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file ngram.hpp
 * @brief Toy n-gram language model used as a desk-scale logit provider.
 *
 * Add-lambda smoothing with backoff: an unseen context drops its oldest
 * token until a seen context (at worst the empty unigram context) is found.
 * For the matched context c, logit(w) = ln((count(c, w) + lambda) /
 * (count(c) + lambda * n)).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/provider.hpp"

namespace contrast {

struct NGramCounts {
  std::map<TokenId, std::uint64_t> next;
  std::uint64_t total = 0;
};

struct NGramModel {
  std::size_t order = 1;
  double lambda = 1.0;
  std::size_t vocab_size = 0;
  /// tables[j] maps a context of exactly j tokens to its continuation counts.
  std::vector<std::map<std::vector<TokenId>, NGramCounts>> tables;

  LogitVector logits(std::span<const TokenId> context) const {
    const std::size_t longest = std::min(order - 1, context.size());
    for (std::size_t j = longest + 1; j-- > 0;) {
      std::vector<TokenId> key(context.end() - static_cast<std::ptrdiff_t>(j), context.end());
      auto it = tables[j].find(key);
      if (it != tables[j].end()) return smoothed(it->second);
    }
    // Unreachable for a trained model: the empty context is always present.
    throw std::logic_error("n-gram model has no unigram table");
  }

 private:
  LogitVector smoothed(const NGramCounts& counts) const {
    const double denom = static_cast<double>(counts.total) + lambda * static_cast<double>(vocab_size);
    std::vector<double> out(vocab_size, std::log(lambda / denom));
    for (const auto& [token, count] : counts.next) {
      out[token] = std::log((static_cast<double>(count) + lambda) / denom);
    }
    return LogitVector(std::move(out));
  }
};

inline NGramModel ngram_train(const std::vector<std::vector<TokenId>>& corpus, std::size_t order,
                              double lambda, std::size_t vocab_size) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("n-gram lambda must be > 0");
  if (vocab_size == 0) throw std::invalid_argument("n-gram vocabulary is empty");
  std::size_t tokens = 0;
  for (const auto& seq : corpus) tokens += seq.size();
  if (tokens == 0) throw std::invalid_argument("empty corpus");

  NGramModel model;
  model.order = order;
  model.lambda = lambda;
  model.vocab_size = vocab_size;
  model.tables.resize(order);
  for (const auto& seq : corpus) {
    for (std::size_t pos = 0; pos < seq.size(); ++pos) {
      if (seq[pos] >= vocab_size) throw std::invalid_argument("corpus token outside vocabulary");
      for (std::size_t j = 0; j < order && j <= pos; ++j) {
        std::vector<TokenId> key(seq.begin() + static_cast<std::ptrdiff_t>(pos - j),
                                 seq.begin() + static_cast<std::ptrdiff_t>(pos));
        auto& counts = model.tables[j][key];
        ++counts.next[seq[pos]];
        ++counts.total;
      }
    }
  }
  return model;
}

/// Whitespace-tokenized text corpus. Ids 0 and 1 are reserved for the
/// end-of-sequence and unknown-word markers; remaining words get ids in
/// order of first appearance. Each line becomes one eos-terminated sequence.
struct TextCorpus {
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  Vocabulary vocabulary;
  std::vector<std::vector<TokenId>> sequences;

  static TextCorpus from_text(const std::string& text) {
    std::vector<std::string> words{kEos, kUnk};
    std::map<std::string, TokenId> index{{kEos, 0}, {kUnk, 1}};
    std::vector<std::vector<TokenId>> sequences;

    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream in(line);
      std::vector<TokenId> seq;
      for (std::string word; in >> word;) {
        auto [it, inserted] = index.emplace(word, static_cast<TokenId>(words.size()));
        if (inserted) words.push_back(word);
        seq.push_back(it->second);
      }
      if (seq.empty()) continue;
      seq.push_back(0);
      sequences.push_back(std::move(seq));
    }
    if (sequences.empty()) throw std::invalid_argument("empty corpus");
    return TextCorpus{Vocabulary(std::move(words), TokenId{0}), std::move(sequences)};
  }

  static TextCorpus load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("corpus: cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
  }
};

/// Maps whitespace-separated words to ids; unknown words become <unk> when
/// the vocabulary has one.
inline std::vector<TokenId> tokenize_words(const Vocabulary& vocab, const std::string& text) {
  std::istringstream in(text);
  std::vector<TokenId> ids;
  const auto unk = vocab.find(TextCorpus::kUnk);
  for (std::string word; in >> word;) {
    if (auto id = vocab.find(word)) {
      ids.push_back(*id);
    } else if (unk) {
      ids.push_back(*unk);
    } else {
      throw std::invalid_argument("word not in vocabulary: " + word);
    }
  }
  return ids;
}

inline std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

/// Logit provider over a trained n-gram model. Both sides share the model;
/// the asymmetry between them lives entirely in their contexts.
class NGramProvider final : public LogitProvider {
 public:
  NGramProvider(std::shared_ptr<const NGramModel> model, Vocabulary vocab)
      : model_(std::move(model)), vocab_(std::move(vocab)) {
    if (model_->vocab_size != vocab_.size()) {
      throw std::invalid_argument("n-gram model and vocabulary sizes differ");
    }
  }

  const Vocabulary& vocabulary() const override { return vocab_; }

  LogitVector next_logits(const Context& context, Side, std::size_t) override {
    return model_->logits(context.token_ids);
  }

  const NGramModel& model() const noexcept { return *model_; }

 private:
  std::shared_ptr<const NGramModel> model_;
  Vocabulary vocab_;
};

/// Toy stand-in for self-description: keeps the first scene token and
/// greedy-decodes from prompt + that token until eos or `max_len` tokens.
/// The result is the most typical sentence opening like the scene, so it is
/// conditioned on the scene but loses most of its detail.
inline std::vector<TokenId> generate_description(const NGramModel& model, const Vocabulary& vocab,
                                                 std::span<const TokenId> scene,
                                                 std::span<const TokenId> prompt,
                                                 std::size_t max_len) {
  std::vector<TokenId> ctx(prompt.begin(), prompt.end());
  std::vector<TokenId> out;
  if (scene.empty() || max_len == 0) return out;
  out.push_back(scene.front());
  ctx.push_back(scene.front());
  while (out.size() < max_len) {
    const TokenId next = argmax_token(model.logits(ctx));
    if (vocab.eos_id() && next == *vocab.eos_id()) break;
    out.push_back(next);
    ctx.push_back(next);
  }
  return out;
}

}  // namespace contrast
