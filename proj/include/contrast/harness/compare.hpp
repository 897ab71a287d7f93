// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrast/decode.hpp"
#include "contrast/error.hpp"
#include "contrast/harness/config.hpp"
#include "contrast/harness/report.hpp"
#include "contrast/harness/session.hpp"

namespace contrast::harness {

/// One entry of a comparison: a strategy plus optional per-run overrides,
/// written "code" or "code:k=10,alpha=0.5".
struct CompareSpec {
  std::string label;
  ConfigLayer overrides;

  static CompareSpec parse(const std::string& text) {
    CompareSpec spec;
    spec.label = text;
    const auto colon = text.find(':');
    std::map<std::string, std::string> values{{"strategy", text.substr(0, colon)}};
    if (colon != std::string::npos) {
      std::istringstream rest(text.substr(colon + 1));
      for (std::string item; std::getline(rest, item, ',');) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("compare: expected key=value in '" + item + "'");
        values[item.substr(0, eq)] = item.substr(eq + 1);
      }
    }
    spec.overrides = layer_from_strings(values);
    return spec;
  }
};

struct CompareRun {
  std::string label;
  RunReport report;
  std::optional<std::size_t> first_divergence;  // vs the first run
};

struct CompareReport {
  std::vector<CompareRun> runs;
  std::optional<std::size_t> first_divergence;  // earliest over all runs
};

/// First index at which two token sequences differ, including one ending
/// before the other.
inline std::optional<std::size_t> first_difference(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return i;
  }
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

inline CompareReport run_compare(Session& session, const RunSettings& base, const std::vector<CompareSpec>& specs) {
  if (specs.size() < 2) throw ConfigError("compare: needs at least two strategies");
  CompareReport report;
  for (const auto& spec : specs) {
    RunSettings s = base;
    // Overrides replace only what they set; everything else comes from base.
    const ConfigLayer& o = spec.overrides;
    if (o.strategy) s.strategy = *o.strategy;
    if (o.alpha) s.alpha = *o.alpha;
    if (o.beta) s.beta = *o.beta;
    if (o.k) s.k = *o.k;
    if (o.top_p) s.top_p = *o.top_p;
    if (o.temperature) s.temperature = *o.temperature;
    if (o.num_beams) s.num_beams = *o.num_beams;
    if (o.max_tokens) s.max_tokens = *o.max_tokens;
    if (o.seed) s.seed = *o.seed;
    if (o.selector) {
      s.selector = o.selector;
    } else if (s.selector) {
      // A run-wide selector that this strategy cannot use falls back to the
      // strategy's own.
      RunSettings probe = s;
      probe.selector.reset();
      if (probe.decode_config().violations().size() < s.decode_config().violations().size()) {
        s.selector.reset();
      }
    }
    if (auto bad = s.decode_config().violations(); !bad.empty()) {
      for (auto& b : bad) b = spec.label + ": " + b;
      throw ConfigError(std::move(bad));
    }
    if (is_contrastive(s.strategy) && !session.provider_d) {
      throw ConfigError(spec.label + ": strategy needs a description-side provider");
    }
    CompareRun run;
    run.label = spec.label;
    run.report = run_decode(session, s.decode_config());
    report.runs.push_back(std::move(run));
  }
  const auto& baseline = report.runs.front().report.tokens;
  for (std::size_t i = 1; i < report.runs.size(); ++i) {
    auto& run = report.runs[i];
    run.first_divergence = first_difference(baseline, run.report.tokens);
    if (run.first_divergence &&
        (!report.first_divergence || *run.first_divergence < *report.first_divergence)) {
      report.first_divergence = run.first_divergence;
    }
  }
  return report;
}

inline nlohmann::json to_json(const CompareReport& r, const Vocabulary& vocab) {
  nlohmann::json j;
  j["first_divergence"] = r.first_divergence ? nlohmann::json(*r.first_divergence) : nlohmann::json(nullptr);
  j["runs"] = nlohmann::json::array();
  for (const auto& run : r.runs) {
    auto alpha = nlohmann::json::array();
    for (const auto& s : run.report.steps) {
      alpha.push_back(s.controls ? nlohmann::json(s.controls->alpha_t) : nlohmann::json(nullptr));
    }
    nlohmann::json item = to_json(run.report, vocab, false);
    item["label"] = run.label;
    item["alpha_series"] = std::move(alpha);
    item["first_divergence"] =
        run.first_divergence ? nlohmann::json(*run.first_divergence) : nlohmann::json(nullptr);
    j["runs"].push_back(std::move(item));
  }
  return j;
}

/// Side-by-side token table; differing steps are marked with '*'.
inline std::string to_text(const CompareReport& r, const Vocabulary& vocab) {
  std::ostringstream out;
  std::size_t rows = 0;
  for (const auto& run : r.runs) rows = std::max(rows, run.report.tokens.size());
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s", "step");
  out << buf;
  for (const auto& run : r.runs) {
    std::snprintf(buf, sizeof buf, " %-18s", run.label.substr(0, 18).c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t t = 0; t < rows; ++t) {
    std::snprintf(buf, sizeof buf, "%-6zu", t);
    out << buf;
    bool differs = false;
    const auto& base = r.runs.front().report.tokens;
    for (const auto& run : r.runs) {
      const auto& toks = run.report.tokens;
      const std::string cell = t < toks.size() ? vocab.token(toks[t]) : "";
      differs |= t >= toks.size() || t >= base.size() || toks[t] != base[t];
      std::snprintf(buf, sizeof buf, " %-18s", cell.substr(0, 18).c_str());
      out << buf;
    }
    out << (differs ? " *" : "") << "\n";
  }
  out << "first divergence: " << (r.first_divergence ? std::to_string(*r.first_divergence) : "none") << "\n";
  for (const auto& run : r.runs) {
    if (run.report.steps.empty() || !run.report.steps.front().controls) continue;
    out << "alpha_t[" << run.label << "]:";
    for (const auto& s : run.report.steps) out << ' ' << format_fixed(s.controls->alpha_t);
    out << "\n";
  }
  return out.str();
}

}  // namespace contrast::harness
