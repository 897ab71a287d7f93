// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file render.hpp
 * @brief Token-level tables over a recorded trace: for each step, the top
 * tokens by visual logit, description logit, and contrasted logit, with the
 * step's divergence controls. A step is a flip when the contrast changes the
 * choice away from the visual argmax.
 */

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/strategies.hpp"
#include "contrast/trace.hpp"

namespace contrast::harness {

struct RankedToken {
  TokenId id = 0;
  double logit = 0.0;
};

struct TraceRow {
  std::size_t step = 0;
  CodeControls controls;
  TokenId argmax_v = 0;
  TokenId chosen = 0;
  TokenId recorded_choice = 0;
  bool flip = false;
  std::vector<RankedToken> top_v;
  std::vector<RankedToken> top_d;
  std::vector<RankedToken> top_code;
};

/// Parses "a:b" (half-open), "a:" or "a". Empty text means every step.
struct StepRange {
  std::size_t begin = 0;
  std::optional<std::size_t> end;

  static StepRange parse(const std::string& text) {
    StepRange r;
    if (text.empty()) return r;
    const auto colon = text.find(':');
    const auto number = [&](const std::string& part) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc{} || ptr != part.data() + part.size()) {
        throw ConfigError("steps: expected a:b, got '" + text + "'");
      }
      return v;
    };
    if (colon == std::string::npos) {
      r.begin = number(text);
      r.end = r.begin + 1;
    } else {
      r.begin = colon == 0 ? 0 : number(text.substr(0, colon));
      if (colon + 1 < text.size()) r.end = number(text.substr(colon + 1));
    }
    return r;
  }
};

inline std::vector<RankedToken> top_tokens(std::span<const double> logits, std::size_t j) {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] != kNegInf) ids.push_back(static_cast<TokenId>(i));
  }
  const auto keep = std::min(j, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(),
                    [&](TokenId a, TokenId b) { return logits[a] > logits[b] || (logits[a] == logits[b] && a < b); });
  std::vector<RankedToken> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back({ids[i], logits[ids[i]]});
  return out;
}

/// Recomputes the contrast for steps [range.begin, range.end) of `trace`.
inline std::vector<TraceRow> build_trace_rows(const TraceFile& trace, const StepRange& range, double k,
                                              std::size_t top) {
  const std::size_t length = trace.steps.size();
  const std::size_t end = range.end.value_or(length);
  if (range.begin > end) throw ConfigError("steps: range start is after its end");
  if (end > length || (range.begin >= length && range.begin != end)) {
    throw ConfigError("steps: requested step " + std::to_string(std::max(range.begin, end - 1)) +
                      " but the trace has " + std::to_string(length) + " steps");
  }
  std::vector<TraceRow> rows;
  for (std::size_t t = range.begin; t < end; ++t) {
    const auto& s = trace.steps[t];
    const CodeStep cs = code_step(s.logits_v, s.logits_d, k);
    TraceRow row;
    row.step = t;
    row.controls = *cs.record.controls;
    row.argmax_v = argmax_token(s.logits_v);
    row.chosen = cs.record.chosen;
    row.recorded_choice = s.recorded_choice;
    row.flip = row.chosen != row.argmax_v;
    row.top_v = top_tokens(s.logits_v.scores(), top);
    row.top_d = top_tokens(s.logits_d.scores(), top);
    row.top_code = top_tokens(cs.record.contrasted_logits.scores(), top);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json rows_to_json(const std::vector<TraceRow>& rows, const Vocabulary& vocab, double k) {
  const auto ranked = [&](const std::vector<RankedToken>& list) {
    auto arr = nlohmann::json::array();
    for (const auto& r : list) arr.push_back({{"id", r.id}, {"token", vocab.token(r.id)}, {"logit", r.logit}});
    return arr;
  };
  nlohmann::json doc;
  doc["k"] = k;
  doc["steps"] = nlohmann::json::array();
  for (const auto& row : rows) {
    doc["steps"].push_back({{"step", row.step},
                            {"divergence", row.controls.divergence},
                            {"alpha_t", row.controls.alpha_t},
                            {"beta_t", row.controls.beta_t},
                            {"argmax_v", row.argmax_v},
                            {"chosen", row.chosen},
                            {"recorded_choice", row.recorded_choice},
                            {"flip", row.flip},
                            {"top_v", ranked(row.top_v)},
                            {"top_d", ranked(row.top_d)},
                            {"top_code", ranked(row.top_code)}});
  }
  return doc;
}

/// Fixed-width rendering. Flipped steps are marked with "<< FLIP" and the
/// contrast winner with '*'.
inline std::string rows_to_text(const std::vector<TraceRow>& rows, const Vocabulary& vocab) {
  std::ostringstream out;
  char line[256];
  const auto cell = [&](const std::vector<RankedToken>& list, std::size_t i, TokenId mark) {
    if (i >= list.size()) return std::string(26, ' ');
    std::string name = vocab.token(list[i].id);
    if (name.size() > 14) name = name.substr(0, 13) + "~";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%c%-14s %9.2f ", list[i].id == mark ? '*' : ' ', name.c_str(),
                  list[i].logit);
    return std::string(buf);
  };
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "step %-4zu D_bd=%.4f  alpha_t=%.4f  beta_t=%.4f  greedy=%s  code=%s%s\n",
                  row.step, row.controls.divergence, row.controls.alpha_t, row.controls.beta_t,
                  vocab.token(row.argmax_v).c_str(), vocab.token(row.chosen).c_str(),
                  row.flip ? "  << FLIP" : "");
    out << line;
    std::snprintf(line, sizeof line, "  %-4s %-26s %-26s %-26s\n", "rank", "logit_v", "logit_d", "logit_code");
    out << line;
    const std::size_t depth = std::max({row.top_v.size(), row.top_d.size(), row.top_code.size()});
    for (std::size_t i = 0; i < depth; ++i) {
      out << "  " << std::to_string(i + 1) << std::string(4 - std::min<std::size_t>(4, std::to_string(i + 1).size()), ' ')
          << ' ' << cell(row.top_v, i, row.chosen) << cell(row.top_d, i, row.chosen)
          << cell(row.top_code, i, row.chosen) << "\n";
    }
  }
  return out.str();
}

}  // namespace contrast::harness
