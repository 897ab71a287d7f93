// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <chrono>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/harness/config.hpp"
#include "contrast/ngram.hpp"
#include "contrast/provider.hpp"
#include "contrast/trace.hpp"
#include "contrast/wire.hpp"

namespace contrast::harness {

/// Providers and conditioning contexts for one configured run.
struct Session {
  Vocabulary vocab;
  std::unique_ptr<LogitProvider> provider_v;
  std::unique_ptr<LogitProvider> provider_d;  // null when no description side exists
  ContextPair pair;

  std::string description;  // description text (generated or returned by the server)
  double description_ms = 0.0;

  std::shared_ptr<const NGramModel> ngram;
  std::shared_ptr<const TraceFile> trace;
  std::shared_ptr<wire::RemoteClient> client;

  std::string render(std::span<const TokenId> ids) const { return detokenize(vocab, ids); }
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline Session open_ngram(const RunSettings& s) {
  auto corpus = TextCorpus::load(s.corpus);
  Session session;
  session.vocab = corpus.vocabulary;
  session.ngram = std::make_shared<const NGramModel>(
      ngram_train(corpus.sequences, s.order, s.lambda, corpus.vocabulary.size()));

  std::vector<TokenId> scene;
  if (s.scene.empty()) {
    scene = corpus.sequences.front();
    scene.pop_back();  // drop the eos marker
  } else {
    scene = tokenize_words(session.vocab, s.scene);
  }
  const auto query = tokenize_words(session.vocab, s.query);
  const auto prompt = tokenize_words(session.vocab, s.prompt);

  const auto start = std::chrono::steady_clock::now();
  const auto description =
      generate_description(*session.ngram, session.vocab, scene, prompt, s.description_max_tokens);
  session.description_ms = elapsed_ms(start);
  session.description = detokenize(session.vocab, description);

  session.pair.visual.token_ids = scene;
  session.pair.description.token_ids = description;
  for (TokenId id : query) session.pair.append(id);

  session.provider_v = std::make_unique<NGramProvider>(session.ngram, session.vocab);
  session.provider_d = std::make_unique<NGramProvider>(session.ngram, session.vocab);
  return session;
}

inline Session open_trace(const RunSettings& s) {
  Session session;
  session.trace = std::make_shared<const TraceFile>(load_trace(s.trace_file));
  session.vocab = session.trace->header.vocab;
  session.provider_v = std::make_unique<TraceProvider>(session.trace);
  session.provider_d = std::make_unique<TraceProvider>(session.trace);
  return session;
}

inline Session open_remote(const RunSettings& s) {
  Session session;
  session.client = std::make_shared<wire::RemoteClient>(wire::open_endpoint(s.endpoint),
                                                        std::chrono::milliseconds(s.timeout_ms));
  const auto info = session.client->handshake();
  session.vocab = Vocabulary::placeholder(info.n, info.eos_id);
  session.provider_v = std::make_unique<wire::RemoteProvider>(session.client, info);

  if (!s.image.empty()) {
    const auto start = std::chrono::steady_clock::now();
    session.description = session.client->describe(s.image, s.prompt);
    session.description_ms = elapsed_ms(start);
    session.provider_d = std::make_unique<wire::RemoteProvider>(session.client, info);
  }
  if (!s.query.empty()) {
    for (TokenId id : session.client->tokenize(s.query)) session.pair.append(id);
  }
  return session;
}

}  // namespace detail

/// Loads or connects the configured providers and builds the context pair.
/// For the n-gram provider the description side is produced here, by
/// greedily decoding the model from the scene followed by the description
/// prompt; the server does the equivalent for the remote provider.
inline Session open_session(const RunSettings& s) {
  validate(s);
  switch (s.provider) {
    case ProviderKind::ngram: return detail::open_ngram(s);
    case ProviderKind::trace: return detail::open_trace(s);
    case ProviderKind::remote: return detail::open_remote(s);
  }
  throw ConfigError("provider: unknown kind");
}

}  // namespace contrast::harness
