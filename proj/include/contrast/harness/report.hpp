// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrast/decode.hpp"
#include "contrast/harness/session.hpp"

namespace contrast::harness {

struct RunReport {
  std::string strategy;
  std::vector<TokenId> tokens;
  std::string text;
  std::vector<StepRecord> steps;
  std::size_t calls_v = 0;
  std::size_t calls_d = 0;
  double wall_ms = 0.0;
  double tokens_per_second = 0.0;
  double ms_per_token = 0.0;
  double description_ms = 0.0;
};

/// Runs one decode on the session and times it. Description generation is
/// not part of wall_ms; it is reported separately.
inline RunReport run_decode(Session& session, const DecodeConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  DecodeResult result = decode(*session.provider_v, session.provider_d.get(), session.pair, config);
  const double wall = detail::elapsed_ms(start);

  RunReport r;
  r.strategy = std::string(to_string(config.strategy));
  r.tokens = std::move(result.tokens);
  r.text = session.render(r.tokens);
  r.steps = std::move(result.trace);
  r.calls_v = result.calls_v;
  r.calls_d = result.calls_d;
  r.wall_ms = wall;
  if (!r.tokens.empty() && wall > 0.0) {
    r.ms_per_token = wall / static_cast<double>(r.tokens.size());
    r.tokens_per_second = 1000.0 / r.ms_per_token;
  }
  r.description_ms = session.description_ms;
  return r;
}

inline nlohmann::json step_json(const StepRecord& s, const Vocabulary& vocab) {
  nlohmann::json j;
  j["step"] = s.step;
  j["chosen"] = s.chosen;
  j["token"] = vocab.token(s.chosen);
  if (s.controls) {
    j["divergence"] = s.controls->divergence;
    j["alpha_t"] = s.controls->alpha_t;
    j["beta_t"] = s.controls->beta_t;
  } else {
    j["divergence"] = nullptr;
    j["alpha_t"] = nullptr;
    j["beta_t"] = nullptr;
  }
  j["head_size"] = s.head_set.size();
  return j;
}

/// Machine-readable report. Timing fields are included only on request so
/// that fixed-seed runs stay byte-identical.
inline nlohmann::json to_json(const RunReport& r, const Vocabulary& vocab, bool include_timing) {
  nlohmann::json j;
  j["strategy"] = r.strategy;
  j["tokens"] = r.tokens;
  j["text"] = r.text;
  j["provider_calls"] = {{"v", r.calls_v}, {"d", r.calls_d}};
  auto steps = nlohmann::json::array();
  for (const auto& s : r.steps) steps.push_back(step_json(s, vocab));
  j["steps"] = std::move(steps);
  if (include_timing) {
    j["timing"] = {{"wall_ms", r.wall_ms},
                   {"tokens_per_second", r.tokens_per_second},
                   {"ms_per_token", r.ms_per_token},
                   {"description_ms", r.description_ms}};
  }
  return j;
}

inline std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string to_text(const RunReport& r, bool include_timing) {
  std::ostringstream out;
  out << "strategy:       " << r.strategy << "\n";
  out << "tokens:         " << r.tokens.size() << "\n";
  out << "text:           " << r.text << "\n";
  out << "provider calls: v=" << r.calls_v << " d=" << r.calls_d << "\n";
  if (!r.steps.empty() && r.steps.front().controls) {
    out << "alpha_t:       ";
    for (const auto& s : r.steps) out << ' ' << format_fixed(s.controls->alpha_t);
    out << "\n";
  }
  if (include_timing) {
    out << "wall:           " << format_fixed(r.wall_ms, 3) << " ms\n";
    out << "throughput:     " << format_fixed(r.tokens_per_second, 1) << " token/s\n";
    out << "latency:        " << format_fixed(r.ms_per_token, 4) << " ms/token\n";
    out << "description:    " << format_fixed(r.description_ms, 3) << " ms (excluded)\n";
  }
  return out.str();
}

}  // namespace contrast::harness
