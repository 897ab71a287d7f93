// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "contrast/trace.hpp"
#include "inversion_fixture.hpp"

using namespace contrast;

namespace {

TraceFile small_trace() {
  TraceFile t;
  t.header.vocab = Vocabulary({"</s>", "a", "b"}, TokenId{0});
  t.header.model = "unit";
  t.header.prompt = "q \"quoted\"";
  t.header.k = 0.3;
  t.steps.push_back({0, LogitVector({0.1, 1.0 / 3.0, kNegInf}), LogitVector({-2.5, 1e-300, 7.0}), 1});
  t.steps.push_back({1, LogitVector({kNegInf, 2.0, 1.0}), LogitVector({0.0, 0.0, 0.0}), 0});
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(FormatReal, SeventeenSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_real(-2.0), "-2.0000000000000000e+00");
  EXPECT_EQ(format_real(kNegInf), "\"-inf\"");
}

TEST(Trace, RoundTripIsByteIdentical) {
  const auto text = serialize_trace(small_trace());
  const auto parsed = parse_trace(text);
  EXPECT_EQ(serialize_trace(parsed), text);
  EXPECT_EQ(parsed.steps[0].logits_v, small_trace().steps[0].logits_v);
  EXPECT_EQ(parsed.steps[0].logits_d[1], 1e-300);
  EXPECT_EQ(parsed.header.prompt, "q \"quoted\"");
  EXPECT_EQ(parsed.header.vocab, small_trace().header.vocab);
}

TEST(Trace, EmptyStepsRoundTrip) {
  auto t = small_trace();
  t.steps.clear();
  const auto text = serialize_trace(t);
  EXPECT_EQ(serialize_trace(parse_trace(text)), text);
}

TEST(Trace, SchemaViolations) {
  const auto text = serialize_trace(small_trace());
  const std::vector<std::pair<std::string, std::string>> edits = {
      {"\"format_version\": 1", "\"format_version\": 2"},
      {"\"n\": 3", "\"n\": 4"},
      {"\"step\": 1", "\"step\": 2"},
      {"\"recorded_choice\": 0", "\"recorded_choice\": 3"},
      {"[\"-inf\", 2.0000000000000000e+00, 1.0000000000000000e+00]", "[\"-inf\", \"-inf\", \"-inf\"]"},
      {"[\"-inf\", 2.0000000000000000e+00, 1.0000000000000000e+00]", "[2.0, 1.0]"},
      {"\"-inf\"", "\"+inf\""},
  };
  for (const auto& [from, to] : edits) {
    EXPECT_THROW(parse_trace(replace(text, from, to)), TraceFormatError) << to;
  }
  EXPECT_THROW(parse_trace("{not json"), TraceFormatError);
  EXPECT_THROW(parse_trace("{}"), TraceFormatError);
}

TEST(Trace, FormatErrorsAreConfigErrors) {
  try {
    parse_trace("[]");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(TraceProvider, ReplaysByStep) {
  auto trace = std::make_shared<const TraceFile>(small_trace());
  TraceProvider p(trace);
  EXPECT_EQ(p.max_steps(), 2u);
  EXPECT_EQ(p.next_logits({}, Side::visual, 1), trace->steps[1].logits_v);
  EXPECT_EQ(p.next_logits({}, Side::description, 0), trace->steps[0].logits_d);
  EXPECT_THROW(p.next_logits({}, Side::visual, 2), ProviderError);
}

TEST(Trace, LoadMissingFile) { EXPECT_THROW(load_trace("/nonexistent/trace.json"), ConfigError); }

TEST(InversionFixture, CommittedFileMatchesGenerator) {
  const std::string path = std::string(CONTRAST_FIXTURES) + "/inversion_trace.json";
  EXPECT_EQ(read_file(path), serialize_trace(inversion::build_trace()));
  EXPECT_NO_THROW(load_trace(path));
}
