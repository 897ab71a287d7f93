// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "contrast/decode.hpp"
#include "inversion_fixture.hpp"
#include "oracle.hpp"
#include "test_providers.hpp"

using namespace contrast;
using testing_support::LambdaProvider;

namespace {

// Context-dependent logits: a hash of the context seeds the scores.
std::vector<double> hashed_logits(const Context& ctx, std::size_t n, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ull ^ salt;
  for (TokenId id : ctx.token_ids) h = (h ^ id) * 1099511628211ull;
  std::mt19937_64 gen(h);
  std::normal_distribution<double> d(0.0, 2.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(gen);
  return out;
}

LambdaProvider hashed(std::size_t n, std::uint64_t salt, std::optional<TokenId> eos = std::nullopt) {
  return LambdaProvider(Vocabulary::placeholder(n, eos),
                        [n, salt](const Context& c, Side, std::size_t) { return hashed_logits(c, n, salt); });
}

DecodeConfig config_for(Strategy s, std::size_t t) {
  DecodeConfig c;
  c.strategy = s;
  c.max_tokens = t;
  return c;
}

}  // namespace

TEST(Decode, SingleTokenCallCounts) {
  for (auto s : {Strategy::greedy, Strategy::nucleus, Strategy::beam, Strategy::cd_fixed, Strategy::code}) {
    auto v = hashed(16, 1);
    auto d = hashed(16, 2);
    auto c = config_for(s, 1);
    c.num_beams = 3;
    const auto r = decode(v, &d, {}, c);
    EXPECT_EQ(r.tokens.size(), 1u);
    EXPECT_EQ(v.calls, 1u) << to_string(s);
    EXPECT_EQ(d.calls, is_contrastive(s) ? 1u : 0u) << to_string(s);
    EXPECT_EQ(r.calls_v, v.calls);
    EXPECT_EQ(r.calls_d, d.calls);
  }
}

TEST(Decode, ContrastiveCostsTwoCallsPerToken) {
  auto v = hashed(32, 1);
  auto d = hashed(32, 2);
  const auto code = decode(v, &d, {}, config_for(Strategy::code, 12));
  EXPECT_EQ(code.tokens.size(), 12u);
  EXPECT_EQ(code.calls_v + code.calls_d, 24u);
  const auto greedy = decode(v, nullptr, {}, config_for(Strategy::greedy, 12));
  EXPECT_EQ(greedy.calls_v + greedy.calls_d, 12u);
}

TEST(Decode, StopsAtEos) {
  LambdaProvider v(Vocabulary::placeholder(3, TokenId{2}), [](const Context& c, Side, std::size_t) {
    return c.size() < 2 ? std::vector<double>{1.0, 0.0, -1.0} : std::vector<double>{0.0, 0.0, 5.0};
  });
  const auto r = decode(v, nullptr, {}, config_for(Strategy::greedy, 10));
  EXPECT_EQ(r.tokens, (std::vector<TokenId>{0, 0, 2}));
}

TEST(Decode, ContrastiveRequiresDescriptionProvider) {
  auto v = hashed(8, 1);
  EXPECT_THROW(decode(v, nullptr, {}, config_for(Strategy::code, 3)), ConfigError);
  EXPECT_THROW(decode(v, nullptr, {}, config_for(Strategy::cd_fixed, 3)), ConfigError);
  auto d = hashed(9, 2);
  EXPECT_THROW(decode(v, &d, {}, config_for(Strategy::code, 3)), ConfigError);
}

TEST(Decode, RejectsInvalidConfig) {
  auto v = hashed(8, 1);
  auto c = config_for(Strategy::greedy, 0);
  c.top_p = 2.0;
  try {
    decode(v, nullptr, {}, c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 2u);
  }
}

TEST(Decode, CodeWithIdenticalProvidersIsGreedy) {
  auto v = hashed(50, 7);
  auto d = hashed(50, 7);
  const auto code = decode(v, &d, {}, config_for(Strategy::code, 20));
  const auto greedy = decode(v, nullptr, {}, config_for(Strategy::greedy, 20));
  EXPECT_EQ(code.tokens, greedy.tokens);
  for (const auto& rec : code.trace) {
    EXPECT_EQ(rec.controls->divergence, 0.0);
    EXPECT_EQ(rec.controls->alpha_t, 1.0);
  }
}

TEST(Decode, FixedContrastWithZeroAlphaAndBetaIsGreedy) {
  auto v = hashed(50, 3);
  auto d = hashed(50, 4);
  auto c = config_for(Strategy::cd_fixed, 15);
  c.alpha = 0.0;
  c.beta = 0.0;
  EXPECT_EQ(decode(v, &d, {}, c).tokens, decode(v, nullptr, {}, config_for(Strategy::greedy, 15)).tokens);
}

TEST(Decode, CodeStepsMatchOracle) {
  auto v = hashed(40, 5);
  auto d = hashed(40, 6);
  ContextPair pair{{{3, 4}}, {{9}}};
  const auto r = decode(v, &d, pair, config_for(Strategy::code, 10));
  for (const auto& rec : r.trace) {
    const auto o = oracle::code_step(rec.logits_v.values(), rec.logits_d->values(), 0.3);
    ASSERT_NEAR(rec.controls->divergence, o.divergence, 1e-12);
    const auto dist = oracle::softmax(rec.contrasted_logits.values());
    for (std::size_t i = 0; i < 40; ++i) ASSERT_NEAR(dist[i], o.distribution[i], 1e-9);
  }
  // The chosen token extends both contexts.
  EXPECT_EQ(d.calls, 10u);
}

TEST(Decode, SamplingIsSeeded) {
  auto v = hashed(30, 8);
  auto c = config_for(Strategy::nucleus, 25);
  c.seed = 1234;
  const auto a = decode(v, nullptr, {}, c);
  const auto b = decode(v, nullptr, {}, c);
  EXPECT_EQ(a.tokens, b.tokens);
  c.seed = 1235;
  EXPECT_NE(decode(v, nullptr, {}, c).tokens, a.tokens);
}

TEST(Decode, TinyNucleusIsGreedy) {
  auto v = hashed(30, 9);
  auto c = config_for(Strategy::nucleus, 10);
  c.top_p = 1e-9;
  EXPECT_EQ(decode(v, nullptr, {}, c).tokens, decode(v, nullptr, {}, config_for(Strategy::greedy, 10)).tokens);
}

TEST(Decode, ContextOverflowIsTaggedWithStep) {
  auto v = hashed(8, 1);
  v.max_context_ = 3;
  try {
    decode(v, nullptr, ContextPair{{{1}}, {}}, config_for(Strategy::greedy, 5));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.step(), 2u);
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("context overflow"), std::string::npos);
  }
}

TEST(Decode, ForeignProviderFailureBecomesProviderError) {
  LambdaProvider v(Vocabulary::placeholder(4), [](const Context&, Side, std::size_t step) -> std::vector<double> {
    if (step == 2) throw std::runtime_error("backend exploded");
    return {0.0, 1.0, 0.0, 0.0};
  });
  try {
    decode(v, nullptr, {}, config_for(Strategy::greedy, 5));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.step(), 2u);
    EXPECT_NE(std::string(e.what()).find("backend exploded"), std::string::npos);
  }
}

TEST(Decode, WrongLengthOrMaskedResponseIsRejected) {
  LambdaProvider short_v(Vocabulary::placeholder(4), [](const Context&, Side, std::size_t) {
    return std::vector<double>{0.0, 1.0};
  });
  EXPECT_THROW(decode(short_v, nullptr, {}, config_for(Strategy::greedy, 2)), ProviderError);
  LambdaProvider masked(Vocabulary::placeholder(2), [](const Context&, Side, std::size_t) {
    return std::vector<double>{kNegInf, kNegInf};
  });
  EXPECT_THROW(decode(masked, nullptr, {}, config_for(Strategy::greedy, 2)), ProviderError);
}

TEST(Beam, SingleBeamIsGreedy) {
  for (std::uint64_t salt = 0; salt < 20; ++salt) {
    auto v = hashed(12, salt);
    auto c = config_for(Strategy::beam, 8);
    c.num_beams = 1;
    ASSERT_EQ(decode(v, nullptr, {}, c).tokens, decode(v, nullptr, {}, config_for(Strategy::greedy, 8)).tokens);
  }
}

TEST(Beam, FullWidthMatchesBruteForceOverTwoSteps) {
  const std::size_t n = 6;
  for (std::uint64_t salt = 0; salt < 20; ++salt) {
    auto v = hashed(n, salt);
    double best = -1e300;
    std::vector<TokenId> best_seq;
    for (TokenId a = 0; a < n; ++a) {
      const auto la = oracle::softmax(hashed_logits(Context{}, n, salt));
      const auto lb = oracle::softmax(hashed_logits(Context{{a}}, n, salt));
      for (TokenId b = 0; b < n; ++b) {
        const double score = std::log(la[a]) + std::log(lb[b]);
        if (score > best) {
          best = score;
          best_seq = {a, b};
        }
      }
    }
    auto c = config_for(Strategy::beam, 2);
    c.num_beams = n;
    const auto beams = beam_search(v, {}, c);
    ASSERT_EQ(beams.front().token_ids, best_seq) << "salt " << salt;
    ASSERT_NEAR(beams.front().cum_logprob, best, 1e-12);
  }
}

TEST(Beam, FinishedHypothesesAreFrozen) {
  // eos (id 0) is likely at step 0; continuations of the other token are
  // individually unlikely, so the one-token hypothesis wins.
  LambdaProvider v(Vocabulary::placeholder(4, TokenId{0}), [](const Context& c, Side, std::size_t) {
    if (c.size() == 0) return std::vector<double>{2.0, 1.9, kNegInf, kNegInf};
    return std::vector<double>{0.0, 0.0, 0.0, 0.0};
  });
  auto c = config_for(Strategy::beam, 4);
  c.num_beams = 2;
  const auto beams = beam_search(v, {}, c);
  EXPECT_EQ(beams.front().token_ids, (std::vector<TokenId>{0}));
  EXPECT_TRUE(beams.front().finished);
  EXPECT_EQ(decode(v, nullptr, {}, c).tokens, (std::vector<TokenId>{0}));
}

TEST(Inversion, CodeRecoversTheRightBrand) {
  auto trace = std::make_shared<const TraceFile>(inversion::build_trace());
  TraceProvider v(trace);
  TraceProvider d(trace);
  const auto code = decode(v, &d, {}, config_for(Strategy::code, 10));
  ASSERT_EQ(code.tokens, (std::vector<TokenId>{inversion::kThe, inversion::kRight}));
  const auto greedy = decode(v, nullptr, {}, config_for(Strategy::greedy, 10));
  ASSERT_EQ(greedy.tokens, (std::vector<TokenId>{inversion::kThe, inversion::kWrong}));

  const auto& step1 = code.trace[1];
  EXPECT_NEAR(step1.contrasted_logits[inversion::kRight], inversion::kRightAfter, 0.01);
  EXPECT_NEAR(step1.contrasted_logits[inversion::kWrong], inversion::kWrongAfter, 0.01);
  EXPECT_NEAR(step1.logits_v[inversion::kRight], inversion::kRightBefore, 0.01);
  EXPECT_NEAR(step1.logits_v[inversion::kWrong], inversion::kWrongBefore, 0.01);
  EXPECT_NEAR(step1.controls->alpha_t, inversion::solve_alpha(), 1e-9);
}

TEST(Trace, RecordThenReplayReproducesGreedy) {
  auto v = hashed(20, 11, TokenId{0});
  auto d = hashed(20, 12, TokenId{0});
  const auto live = decode(v, nullptr, {}, config_for(Strategy::greedy, 12));
  auto trace = std::make_shared<const TraceFile>(record_trace(v, d, {}, 12, TraceHeader{}));
  ASSERT_EQ(trace->steps.size(), live.tokens.size());
  TraceProvider rv(trace);
  EXPECT_EQ(decode(rv, nullptr, {}, config_for(Strategy::greedy, 50)).tokens, live.tokens);

  // Round trip through text changes nothing.
  auto reread = std::make_shared<const TraceFile>(parse_trace(serialize_trace(*trace)));
  TraceProvider rv2(reread);
  TraceProvider rd2(reread);
  TraceProvider rd(trace);
  TraceProvider rv3(trace);
  EXPECT_EQ(decode(rv2, &rd2, {}, config_for(Strategy::code, 50)).tokens,
            decode(rv3, &rd, {}, config_for(Strategy::code, 50)).tokens);
}
