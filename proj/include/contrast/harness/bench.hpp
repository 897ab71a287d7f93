// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file bench.hpp
 * @brief Decoding throughput (token/s) and latency (ms/token) per strategy.
 *
 * Each strategy gets `warmup` untimed decodes followed by `repetitions`
 * timed ones, run sequentially. Latency is reported as median and p95 over
 * repetitions; throughput is the reciprocal of the same latency quantile, so
 * tokens_per_second * ms_per_token == 1000 for each quantile. The one-time
 * description cost is measured separately and never folded into latency.
 */

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrast/decode.hpp"
#include "contrast/error.hpp"
#include "contrast/harness/session.hpp"
#include "contrast/metrics.hpp"
#include "contrast/provider.hpp"

namespace contrast::harness {

struct Quantiles {
  double median = 0.0;
  double p95 = 0.0;

  friend bool operator==(const Quantiles&, const Quantiles&) = default;
};

struct StrategyBench {
  std::string strategy;
  std::size_t repetitions = 0;
  std::size_t tokens_per_run = 0;
  std::size_t calls_v = 0;  // per run
  std::size_t calls_d = 0;  // per run
  double calls_per_token = 0.0;
  Quantiles ms_per_token;
  Quantiles tokens_per_second;
  double provider_call_ms_median = 0.0;

  friend bool operator==(const StrategyBench&, const StrategyBench&) = default;
};

struct BenchReport {
  std::string provider;
  std::size_t warmup = 0;
  double description_ms = 0.0;
  std::vector<StrategyBench> strategies;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

inline StrategyBench bench_strategy(Session& session, const DecodeConfig& config, std::size_t repetitions,
                                    std::size_t warmup) {
  if (repetitions == 0) throw ConfigError("repetitions: must be >= 1");
  InstrumentedProvider v(*session.provider_v);
  std::optional<InstrumentedProvider> d;
  if (session.provider_d) d.emplace(*session.provider_d);
  LogitProvider* d_ptr = d ? &*d : nullptr;

  for (std::size_t i = 0; i < warmup; ++i) decode(v, d_ptr, session.pair, config);
  v.reset();
  if (d) d->reset();

  StrategyBench out;
  out.strategy = std::string(to_string(config.strategy));
  out.repetitions = repetitions;
  std::vector<double> latency;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = decode(v, d_ptr, session.pair, config);
    const double wall = detail::elapsed_ms(start);
    if (result.tokens.empty()) throw ProviderError("bench: decode emitted no tokens");
    out.tokens_per_run = result.tokens.size();
    latency.push_back(wall / static_cast<double>(result.tokens.size()));
  }
  out.calls_v = v.calls() / repetitions;
  out.calls_d = d ? d->calls() / repetitions : 0;
  out.calls_per_token = static_cast<double>(out.calls_v + out.calls_d) / static_cast<double>(out.tokens_per_run);
  out.ms_per_token = {percentile(latency, 0.5), percentile(latency, 0.95)};
  out.tokens_per_second = {1000.0 / out.ms_per_token.median, 1000.0 / out.ms_per_token.p95};
  std::vector<double> call_ms = v.latency().samples();
  if (d) call_ms.insert(call_ms.end(), d->latency().samples().begin(), d->latency().samples().end());
  out.provider_call_ms_median = call_ms.empty() ? 0.0 : percentile(call_ms, 0.5);
  return out;
}

inline BenchReport run_bench(Session& session, const RunSettings& settings,
                             const std::vector<Strategy>& strategies, std::size_t repetitions,
                             std::size_t warmup) {
  BenchReport report;
  report.provider = std::string(to_string(settings.provider));
  report.warmup = warmup;
  report.description_ms = session.description_ms;
  for (Strategy s : strategies) {
    DecodeConfig config = settings.decode_config();
    config.strategy = s;
    config.selector.reset();
    report.strategies.push_back(bench_strategy(session, config, repetitions, warmup));
  }
  return report;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json j;
  j["provider"] = r.provider;
  j["warmup"] = r.warmup;
  j["description_ms"] = r.description_ms;
  j["strategies"] = nlohmann::json::array();
  for (const auto& s : r.strategies) {
    j["strategies"].push_back(
        {{"strategy", s.strategy},
         {"repetitions", s.repetitions},
         {"tokens_per_run", s.tokens_per_run},
         {"provider_calls", {{"v", s.calls_v}, {"d", s.calls_d}}},
         {"calls_per_token", s.calls_per_token},
         {"ms_per_token", {{"median", s.ms_per_token.median}, {"p95", s.ms_per_token.p95}}},
         {"tokens_per_second", {{"median", s.tokens_per_second.median}, {"p95", s.tokens_per_second.p95}}},
         {"provider_call_ms_median", s.provider_call_ms_median}});
  }
  return j;
}

inline BenchReport bench_from_json(const nlohmann::json& j) {
  try {
    BenchReport r;
    r.provider = j.at("provider").get<std::string>();
    r.warmup = j.at("warmup").get<std::size_t>();
    r.description_ms = j.at("description_ms").get<double>();
    for (const auto& s : j.at("strategies")) {
      StrategyBench b;
      b.strategy = s.at("strategy").get<std::string>();
      b.repetitions = s.at("repetitions").get<std::size_t>();
      b.tokens_per_run = s.at("tokens_per_run").get<std::size_t>();
      b.calls_v = s.at("provider_calls").at("v").get<std::size_t>();
      b.calls_d = s.at("provider_calls").at("d").get<std::size_t>();
      b.calls_per_token = s.at("calls_per_token").get<double>();
      b.ms_per_token = {s.at("ms_per_token").at("median").get<double>(), s.at("ms_per_token").at("p95").get<double>()};
      b.tokens_per_second = {s.at("tokens_per_second").at("median").get<double>(),
                             s.at("tokens_per_second").at("p95").get<double>()};
      b.provider_call_ms_median = s.at("provider_call_ms_median").get<double>();
      r.strategies.push_back(std::move(b));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bench report: ") + e.what());
  }
}

inline std::string to_text(const BenchReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "provider: %s  warmup: %zu  description: %.3f ms (excluded)\n",
                r.provider.c_str(), r.warmup, r.description_ms);
  out << line;
  std::snprintf(line, sizeof line, "%-10s %6s %7s %10s %12s %12s %12s %12s\n", "strategy", "reps", "tokens",
                "calls/tok", "tok/s med", "tok/s p95", "ms/tok med", "ms/tok p95");
  out << line;
  for (const auto& s : r.strategies) {
    std::snprintf(line, sizeof line, "%-10s %6zu %7zu %10.2f %12.1f %12.1f %12.5f %12.5f\n", s.strategy.c_str(),
                  s.repetitions, s.tokens_per_run, s.calls_per_token, s.tokens_per_second.median,
                  s.tokens_per_second.p95, s.ms_per_token.median, s.ms_per_token.p95);
    out << line;
  }
  return out.str();
}

}  // namespace contrast::harness
