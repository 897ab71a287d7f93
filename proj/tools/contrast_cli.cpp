// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

// Command-line front end: decode, compare, trace, bench, describe.
//
// Exit codes: 0 success, 2 configuration error, 3 provider or transport
// error, 4 protocol error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "contrast/contrast.hpp"
#include "contrast/harness/bench.hpp"
#include "contrast/harness/compare.hpp"
#include "contrast/harness/config.hpp"
#include "contrast/harness/render.hpp"
#include "contrast/harness/report.hpp"
#include "contrast/harness/session.hpp"

namespace {

using namespace contrast;
using namespace contrast::harness;

/// Flags shared by every subcommand. Each is captured as text and only the
/// ones actually given become part of the flag layer.
struct CommonFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  std::string out_path;

  void attach(CLI::App* app) {
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"strategy", "greedy|nucleus|beam|cd_fixed|code"},
        {"provider", "ngram|trace|remote"},
        {"corpus", "training text for the ngram provider (one sequence per line)"},
        {"trace-file", "recorded trace for the trace provider"},
        {"endpoint", "model server: tcp://host:port or exec:<command>"},
        {"alpha", "fixed contrast weight (cd_fixed)"},
        {"beta", "fixed plausibility cutoff (cd_fixed)"},
        {"k", "divergence smoothing exponent (code)"},
        {"top-p", "nucleus mass"},
        {"temperature", "selection temperature"},
        {"num-beams", "beam width"},
        {"max-tokens", "maximum tokens to emit"},
        {"seed", "sampling seed"},
        {"selector", "argmax|sample"},
        {"output", "text|machine"},
        {"order", "ngram order"},
        {"lambda", "ngram add-lambda smoothing"},
        {"scene", "ngram visual-side conditioning text (default: first corpus line)"},
        {"query", "query text appended to both contexts"},
        {"image", "image path or URL sent to the server's describe method"},
        {"prompt", "description prompt"},
        {"description-max-tokens", "length cap for the ngram description"},
        {"timeout-ms", "remote call timeout"},
    };
    for (const auto& [name, help] : flags) {
      options[name] = app->add_option("--" + name, values[name], help);
    }
    app->add_option("--config", config_path, "JSON config file; flags override its values");
    app->add_option("--out", out_path, "write the report to this file instead of stdout");
  }

  RunSettings resolve_settings() const {
    ConfigLayer file;
    if (!config_path.empty()) file = load_config_file(config_path);
    std::map<std::string, std::string> given;
    for (const auto& [name, opt] : options) {
      if (opt->count() == 0) continue;
      std::string key = name;
      for (char& c : key) {
        if (c == '-') c = '_';
      }
      given[key] = values.at(name);
    }
    return resolve(file, layer_from_strings(given));
  }

  void emit(const std::string& text) const {
    if (out_path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("out: cannot write " + out_path);
    out << text;
  }
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::vector<Strategy> parse_strategy_list(const std::string& text) {
  std::vector<Strategy> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    auto s = parse_strategy(item);
    if (!s) throw ConfigError("strategies: unknown strategy '" + item + "'");
    out.push_back(*s);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Description-contrastive decoding engine"};
  app.require_subcommand(1);

  CommonFlags decode_flags, compare_flags, trace_flags, bench_flags, describe_flags;

  auto* decode_cmd = app.add_subcommand("decode", "Run one decode");
  decode_flags.attach(decode_cmd);
  bool timing = false;
  std::string record_path;
  decode_cmd->add_flag("--timing", timing, "include wall-time metrics in the report");
  decode_cmd->add_option("--record-trace", record_path, "also record both logit streams to a trace file (greedy)");

  auto* compare_cmd = app.add_subcommand("compare", "Run several strategies on the same input");
  compare_flags.attach(compare_cmd);
  std::vector<std::string> compare_specs;
  compare_cmd->add_option("--strategies", compare_specs, "entries like greedy or code:k=10")
      ->delimiter(';')
      ->required();

  auto* trace_cmd = app.add_subcommand("trace", "Render token-level tables from a trace file");
  trace_flags.attach(trace_cmd);
  std::string steps_text;
  std::size_t top = 5;
  trace_cmd->add_option("--steps", steps_text, "half-open step range a:b (default: all)");
  trace_cmd->add_option("--top", top, "tokens per column")->check(CLI::PositiveNumber);

  auto* bench_cmd = app.add_subcommand("bench", "Measure throughput and latency");
  bench_flags.attach(bench_cmd);
  std::size_t repetitions = 5;
  std::size_t warmup = 1;
  std::string bench_strategies = "greedy,code";
  bench_cmd->add_option("--repetitions", repetitions, "timed decodes per strategy");
  bench_cmd->add_option("--warmup", warmup, "untimed decodes per strategy");
  bench_cmd->add_option("--strategies", bench_strategies, "comma-separated strategies");

  auto* describe_cmd = app.add_subcommand("describe", "Print the description used as the contrast side");
  describe_flags.attach(describe_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (decode_cmd->parsed()) {
    const RunSettings s = decode_flags.resolve_settings();
    if (!record_path.empty() && s.strategy != Strategy::greedy) {
      throw ConfigError("record-trace: recording requires --strategy greedy");
    }
    Session session = open_session(s);
    if (!record_path.empty()) {
      if (!session.provider_d) throw ConfigError("record-trace: needs a description-side provider");
      TraceHeader header;
      header.model = std::string(harness::to_string(s.provider));
      header.prompt = s.prompt;
      header.k = s.k;
      header.alpha = s.alpha;
      header.beta = s.beta;
      header.note = "recorded by contrast decode";
      save_trace(record_trace(*session.provider_v, *session.provider_d, session.pair, s.max_tokens, header),
                 record_path);
    }
    const RunReport report = run_decode(session, s.decode_config());
    decode_flags.emit(s.output == OutputFormat::machine ? dump(to_json(report, session.vocab, timing))
                                                        : to_text(report, timing));
    return 0;
  }

  if (compare_cmd->parsed()) {
    const RunSettings s = compare_flags.resolve_settings();
    std::vector<CompareSpec> specs;
    for (const auto& text : compare_specs) specs.push_back(CompareSpec::parse(text));
    Session session = open_session(s);
    const CompareReport report = run_compare(session, s, specs);
    compare_flags.emit(s.output == OutputFormat::machine ? dump(to_json(report, session.vocab))
                                                         : to_text(report, session.vocab));
    return 0;
  }

  if (trace_cmd->parsed()) {
    RunSettings s = trace_flags.resolve_settings();
    if (s.trace_file.empty()) throw ConfigError("trace_file: required");
    const TraceFile trace = load_trace(s.trace_file);
    const bool k_given = trace_flags.options.at("k")->count() > 0 ||
                         (!trace_flags.config_path.empty() && load_config_file(trace_flags.config_path).k);
    const double k = k_given ? s.k : trace.header.k;
    if (!(k > 0.0)) throw ConfigError("k: must be > 0");
    const auto rows = build_trace_rows(trace, StepRange::parse(steps_text), k, top);
    trace_flags.emit(s.output == OutputFormat::machine ? dump(rows_to_json(rows, trace.header.vocab, k))
                                                       : rows_to_text(rows, trace.header.vocab));
    return 0;
  }

  if (bench_cmd->parsed()) {
    const RunSettings s = bench_flags.resolve_settings();
    if (repetitions == 0) throw ConfigError("repetitions: must be >= 1");
    Session session = open_session(s);
    const BenchReport report = run_bench(session, s, parse_strategy_list(bench_strategies), repetitions, warmup);
    bench_flags.emit(s.output == OutputFormat::machine ? dump(to_json(report)) : to_text(report));
    return 0;
  }

  if (describe_cmd->parsed()) {
    RunSettings s = describe_flags.resolve_settings();
    if (s.provider == ProviderKind::remote && s.image.empty()) throw ConfigError("image: required by describe");
    Session session = open_session(s);
    if (s.output == OutputFormat::machine) {
      describe_flags.emit(dump({{"description", session.description}}));
    } else {
      describe_flags.emit(session.description + "\n");
    }
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const contrast::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return contrast::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
