// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file config.hpp
 * @brief Run configuration with layered precedence: command-line flags
 * override the config file, which overrides built-in defaults.
 *
 * The config file is one JSON object whose keys are the field names of
 * RunSettings (decode hyperparameters use the DecodeConfig names). Unknown
 * keys are errors, and validation reports every bad field at once.
 */

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/prompt.hpp"

namespace contrast::harness {

enum class ProviderKind { ngram, trace, remote };
enum class OutputFormat { text, machine };

inline std::string_view to_string(ProviderKind p) noexcept {
  switch (p) {
    case ProviderKind::ngram: return "ngram";
    case ProviderKind::trace: return "trace";
    case ProviderKind::remote: return "remote";
  }
  return "?";
}

struct RunSettings {
  // Decode hyperparameters; defaults mirror DecodeConfig.
  Strategy strategy = Strategy::code;
  double alpha = 1.0;
  double beta = 0.1;
  double k = 0.3;
  double top_p = 0.95;
  double temperature = 1.0;
  std::uint32_t num_beams = 5;
  std::size_t max_tokens = 32;
  std::uint64_t seed = 0;
  std::optional<Selector> selector;

  // Provider setup.
  ProviderKind provider = ProviderKind::ngram;
  std::string corpus;
  std::string trace_file;
  std::string endpoint;
  std::size_t order = 3;
  double lambda = 0.1;
  std::string scene;   // n-gram stand-in for the visual input; default: first corpus line
  std::string query;
  std::string image;   // forwarded to the server's describe method
  std::string prompt = kDescriptionPrompt;
  std::size_t description_max_tokens = 16;
  std::uint32_t timeout_ms = 30'000;

  OutputFormat output = OutputFormat::text;

  DecodeConfig decode_config() const {
    DecodeConfig c;
    c.strategy = strategy;
    c.alpha = alpha;
    c.beta = beta;
    c.k = k;
    c.top_p = top_p;
    c.temperature = temperature;
    c.num_beams = num_beams;
    c.max_tokens = max_tokens;
    c.seed = seed;
    c.selector = selector;
    return c;
  }
};

/// One source of settings; unset fields defer to lower-precedence layers.
struct ConfigLayer {
  std::optional<Strategy> strategy;
  std::optional<double> alpha, beta, k, top_p, temperature, lambda;
  std::optional<std::uint32_t> num_beams, timeout_ms;
  std::optional<std::size_t> max_tokens, order, description_max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<Selector> selector;
  std::optional<ProviderKind> provider;
  std::optional<std::string> corpus, trace_file, endpoint, scene, query, image, prompt;
  std::optional<OutputFormat> output;
};

namespace detail {

template <class T>
bool parse_number(std::string_view text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

/// Converts one textual value into the typed field named `key`. Returns
/// false for an unknown key.
inline bool assign_field(ConfigLayer& layer, std::string_view key, const std::string& value,
                         std::vector<std::string>& errors) {
  const auto bad = [&](std::string_view what) {
    errors.push_back(std::string(key) + ": " + std::string(what) + " (got '" + value + "')");
  };
  const auto real = [&](std::optional<double>& field) {
    double v = 0;
    if (parse_number(value, v)) field = v; else bad("expected a number");
  };
  const auto count = [&](auto& field) {
    typename std::remove_reference_t<decltype(field)>::value_type v{};
    if (parse_number(value, v)) field = v; else bad("expected a non-negative integer");
  };

  if (key == "strategy") {
    if (auto s = parse_strategy(value)) layer.strategy = s; else bad("expected greedy|nucleus|beam|cd_fixed|code");
  } else if (key == "selector") {
    if (auto s = parse_selector(value)) layer.selector = s; else bad("expected argmax|sample");
  } else if (key == "provider") {
    if (value == "ngram") layer.provider = ProviderKind::ngram;
    else if (value == "trace") layer.provider = ProviderKind::trace;
    else if (value == "remote") layer.provider = ProviderKind::remote;
    else bad("expected ngram|trace|remote");
  } else if (key == "output") {
    if (value == "text") layer.output = OutputFormat::text;
    else if (value == "machine") layer.output = OutputFormat::machine;
    else bad("expected text|machine");
  } else if (key == "alpha") { real(layer.alpha);
  } else if (key == "beta") { real(layer.beta);
  } else if (key == "k") { real(layer.k);
  } else if (key == "top_p") { real(layer.top_p);
  } else if (key == "temperature") { real(layer.temperature);
  } else if (key == "lambda") { real(layer.lambda);
  } else if (key == "num_beams") { count(layer.num_beams);
  } else if (key == "timeout_ms") { count(layer.timeout_ms);
  } else if (key == "max_tokens") { count(layer.max_tokens);
  } else if (key == "order") { count(layer.order);
  } else if (key == "description_max_tokens") { count(layer.description_max_tokens);
  } else if (key == "seed") { count(layer.seed);
  } else if (key == "corpus") { layer.corpus = value;
  } else if (key == "trace_file") { layer.trace_file = value;
  } else if (key == "endpoint") { layer.endpoint = value;
  } else if (key == "scene") { layer.scene = value;
  } else if (key == "query") { layer.query = value;
  } else if (key == "image") { layer.image = value;
  } else if (key == "prompt") { layer.prompt = value;
  } else {
    return false;
  }
  return true;
}

template <class T>
void pick(T& target, const std::optional<T>& flag, const std::optional<T>& file) {
  if (flag) target = *flag;
  else if (file) target = *file;
}

}  // namespace detail

/// Builds a layer from key/value text pairs (the command line).
inline ConfigLayer layer_from_strings(const std::map<std::string, std::string>& values) {
  ConfigLayer layer;
  std::vector<std::string> errors;
  for (const auto& [key, value] : values) {
    if (!detail::assign_field(layer, key, value, errors)) errors.push_back(key + ": unknown setting");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return layer;
}

/// Builds a layer from a parsed config document.
inline ConfigLayer layer_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ConfigLayer layer;
  std::vector<std::string> errors;
  for (const auto& [key, value] : doc.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number_float()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      text = os.str();
    } else if (value.is_number()) {
      text = value.dump();
    } else {
      errors.push_back(key + ": expected a string or number");
      continue;
    }
    if (!detail::assign_field(layer, key, text, errors)) errors.push_back(key + ": unknown setting");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return layer;
}

inline ConfigLayer load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  try {
    return layer_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

/// Applies precedence flags > file > defaults.
inline RunSettings resolve(const ConfigLayer& file, const ConfigLayer& flags) {
  RunSettings s;
  detail::pick(s.strategy, flags.strategy, file.strategy);
  detail::pick(s.alpha, flags.alpha, file.alpha);
  detail::pick(s.beta, flags.beta, file.beta);
  detail::pick(s.k, flags.k, file.k);
  detail::pick(s.top_p, flags.top_p, file.top_p);
  detail::pick(s.temperature, flags.temperature, file.temperature);
  detail::pick(s.num_beams, flags.num_beams, file.num_beams);
  detail::pick(s.max_tokens, flags.max_tokens, file.max_tokens);
  detail::pick(s.seed, flags.seed, file.seed);
  if (flags.selector) s.selector = flags.selector;
  else if (file.selector) s.selector = file.selector;
  detail::pick(s.provider, flags.provider, file.provider);
  detail::pick(s.corpus, flags.corpus, file.corpus);
  detail::pick(s.trace_file, flags.trace_file, file.trace_file);
  detail::pick(s.endpoint, flags.endpoint, file.endpoint);
  detail::pick(s.order, flags.order, file.order);
  detail::pick(s.lambda, flags.lambda, file.lambda);
  detail::pick(s.scene, flags.scene, file.scene);
  detail::pick(s.query, flags.query, file.query);
  detail::pick(s.image, flags.image, file.image);
  detail::pick(s.prompt, flags.prompt, file.prompt);
  detail::pick(s.description_max_tokens, flags.description_max_tokens, file.description_max_tokens);
  detail::pick(s.timeout_ms, flags.timeout_ms, file.timeout_ms);
  detail::pick(s.output, flags.output, file.output);
  return s;
}

/// Every violated field, empty when the settings are usable.
inline std::vector<std::string> violations(const RunSettings& s) {
  auto out = s.decode_config().violations();
  switch (s.provider) {
    case ProviderKind::ngram:
      if (s.corpus.empty()) out.push_back("corpus: required by the ngram provider");
      if (s.order == 0) out.push_back("order: must be >= 1");
      if (!(s.lambda > 0.0)) out.push_back("lambda: must be > 0");
      break;
    case ProviderKind::trace:
      if (s.trace_file.empty()) out.push_back("trace_file: required by the trace provider");
      break;
    case ProviderKind::remote:
      if (s.endpoint.empty()) out.push_back("endpoint: required by the remote provider");
      if (s.timeout_ms == 0) out.push_back("timeout_ms: must be >= 1");
      if (is_contrastive(s.strategy) && s.image.empty()) {
        out.push_back("image: strategy " + std::string(contrast::to_string(s.strategy)) +
                      " needs a description-side provider, which the remote provider "
                      "builds from --image");
      }
      break;
  }
  return out;
}

inline void validate(const RunSettings& s) {
  if (auto bad = violations(s); !bad.empty()) throw ConfigError(std::move(bad));
}

}  // namespace contrast::harness
