// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file trace.hpp
 * @brief Recorded per-step logit streams and their replay provider.
 *
 * File layout (one JSON document, canonical form written by serialize_trace):
 *
 *   {
 *     "header": {"format_version": 1, "n": N, "vocab": [...], "eos_id": id|null,
 *                "model": "...", "prompt": "...", "k": x, "alpha": x, "beta": x,
 *                "note": "..."},
 *     "steps": [
 *       {"step": 0, "logits_v": [...], "logits_d": [...], "recorded_choice": id},
 *       ...
 *     ]
 *   }
 *
 * Reals are written in scientific notation with 17 significant digits;
 * negative infinity is written as the string "-inf".
 */

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/provider.hpp"

namespace contrast {

inline constexpr int kTraceFormatVersion = 1;

struct TraceHeader {
  Vocabulary vocab;
  std::string model;
  std::string prompt;
  double k = 0.3;
  double alpha = 1.0;
  double beta = 0.1;
  std::string note;
};

struct TraceStep {
  std::size_t step = 0;
  LogitVector logits_v;
  LogitVector logits_d;
  TokenId recorded_choice = 0;
};

struct TraceFile {
  TraceHeader header;
  std::vector<TraceStep> steps;
};

/// Error raised for a trace document that violates the schema.
class TraceFormatError : public ConfigError {
 public:
  explicit TraceFormatError(const std::string& what) : ConfigError("trace: " + what) {}
};

/// Fixed 17-significant-digit scientific form; "-inf" for negative infinity.
inline std::string format_real(double value) {
  if (value == kNegInf) return "\"-inf\"";
  std::array<char, 40> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::scientific, 16);
  if (ec != std::errc{}) throw std::runtime_error("cannot format real");
  return std::string(buf.data(), end);
}

/// Inverse of format_real for a parsed JSON value.
inline double parse_real(const nlohmann::json& value, std::string_view field) {
  if (value.is_string() && value.get<std::string>() == "-inf") return kNegInf;
  if (!value.is_number()) {
    throw TraceFormatError(std::string(field) + " must be a number or \"-inf\"");
  }
  return value.get<double>();
}

namespace detail {

inline void append_reals(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_real(values[i]);
  }
  out += ']';
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

inline std::string serialize_trace(const TraceFile& trace) {
  const auto& h = trace.header;
  std::string out = "{\n  \"header\": {\"format_version\": 1, \"n\": ";
  out += std::to_string(h.vocab.size());
  out += ", \"vocab\": [";
  for (std::size_t i = 0; i < h.vocab.size(); ++i) {
    if (i) out += ", ";
    out += detail::json_string(h.vocab.token(static_cast<TokenId>(i)));
  }
  out += "], \"eos_id\": ";
  out += h.vocab.eos_id() ? std::to_string(*h.vocab.eos_id()) : "null";
  out += ", \"model\": " + detail::json_string(h.model);
  out += ", \"prompt\": " + detail::json_string(h.prompt);
  out += ", \"k\": " + format_real(h.k);
  out += ", \"alpha\": " + format_real(h.alpha);
  out += ", \"beta\": " + format_real(h.beta);
  out += ", \"note\": " + detail::json_string(h.note);
  out += "},\n  \"steps\": [";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"step\": " + std::to_string(s.step) + ", \"logits_v\": ";
    detail::append_reals(out, s.logits_v.scores());
    out += ", \"logits_d\": ";
    detail::append_reals(out, s.logits_d.scores());
    out += ", \"recorded_choice\": " + std::to_string(s.recorded_choice) + "}";
  }
  out += trace.steps.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline TraceFile parse_trace(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TraceFormatError(std::string("malformed document: ") + e.what());
  }
  try {
    const auto& h = doc.at("header");
    if (h.at("format_version").get<int>() != kTraceFormatVersion) {
      throw TraceFormatError("unsupported format_version");
    }
    const auto n = h.at("n").get<std::size_t>();
    auto tokens = h.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() != n) throw TraceFormatError("vocab length differs from n");
    std::optional<TokenId> eos;
    if (h.contains("eos_id") && !h["eos_id"].is_null()) eos = h["eos_id"].get<TokenId>();

    TraceFile trace;
    trace.header.vocab = Vocabulary(std::move(tokens), eos);
    trace.header.model = h.value("model", "");
    trace.header.prompt = h.value("prompt", "");
    trace.header.note = h.value("note", "");
    if (h.contains("k")) trace.header.k = parse_real(h["k"], "k");
    if (h.contains("alpha")) trace.header.alpha = parse_real(h["alpha"], "alpha");
    if (h.contains("beta")) trace.header.beta = parse_real(h["beta"], "beta");

    const auto read_logits = [n](const nlohmann::json& arr, std::string_view field) {
      if (!arr.is_array() || arr.size() != n) {
        throw TraceFormatError(std::string(field) + " must hold n entries");
      }
      std::vector<double> values;
      values.reserve(n);
      for (const auto& v : arr) values.push_back(parse_real(v, field));
      LogitVector logits(std::move(values));
      if (!logits.has_finite_support()) {
        throw TraceFormatError(std::string(field) + " is fully masked");
      }
      return logits;
    };

    for (const auto& s : doc.at("steps")) {
      TraceStep step;
      step.step = s.at("step").get<std::size_t>();
      if (step.step != trace.steps.size()) throw TraceFormatError("step indices must be dense from 0");
      step.logits_v = read_logits(s.at("logits_v"), "logits_v");
      step.logits_d = read_logits(s.at("logits_d"), "logits_d");
      step.recorded_choice = s.at("recorded_choice").get<TokenId>();
      if (step.recorded_choice >= n) throw TraceFormatError("recorded_choice outside vocabulary");
      trace.steps.push_back(std::move(step));
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError(e.what());
  } catch (const std::invalid_argument& e) {
    throw TraceFormatError(e.what());
  }
}

inline TraceFile load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("trace: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

inline void save_trace(const TraceFile& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("trace: cannot write " + path);
  out << serialize_trace(trace);
}

/// Recorded logits for one side at one step.
inline const LogitVector& trace_next_logits(const TraceFile& trace, Side side, std::size_t step) {
  if (step >= trace.steps.size()) {
    throw ProviderError("trace step " + std::to_string(step) + " out of range (trace has " +
                        std::to_string(trace.steps.size()) + " steps)");
  }
  const auto& s = trace.steps[step];
  return side == Side::visual ? s.logits_v : s.logits_d;
}

/// Teacher-forced replay: logits are looked up by step index, whatever
/// tokens the decode actually emitted.
class TraceProvider final : public LogitProvider {
 public:
  explicit TraceProvider(std::shared_ptr<const TraceFile> trace) : trace_(std::move(trace)) {}

  const Vocabulary& vocabulary() const override { return trace_->header.vocab; }
  std::optional<std::size_t> max_steps() const override { return trace_->steps.size(); }

  LogitVector next_logits(const Context&, Side side, std::size_t step) override {
    return trace_next_logits(*trace_, side, step);
  }

  const TraceFile& trace() const noexcept { return *trace_; }

 private:
  std::shared_ptr<const TraceFile> trace_;
};

}  // namespace contrast
