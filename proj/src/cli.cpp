// Copyright 2026 The PeRFICS Harness Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "perfics/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <optional>
#include <thread>

#include "perfics/benchmark.hpp"
#include "perfics/config.hpp"
#include "perfics/errors.hpp"
#include "perfics/gateway.hpp"
#include "perfics/golden.hpp"
#include "perfics/perfics.hpp"
#include "perfics/pipeline.hpp"
#include "perfics/report.hpp"
#include "perfics/run_store.hpp"

namespace perfics {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string run_dir;
  std::string backend = "replay";
  std::string fixtures;
  std::string benchmark;
  int iterations = 1;
  int workers = 0;
  std::string weights = "vicuna";
  std::string params = "default";
  std::string profiles;
  std::optional<double> budget_gb;
  int quant = 4;
  std::string category;
  std::optional<double> gamma;
  std::string format = "markdown";
  std::string data_dir;
  std::size_t fuzz = 100000;
  std::size_t pairs = 2000;
  std::uint64_t seed = 20240601;
};

fs::path data_dir(const Flags& f) {
  return f.data_dir.empty() ? default_data_dir() / "golden" : fs::path(f.data_dir);
}

HarnessConfig need_config(const Flags& f) {
  if (f.config.empty()) throw UsageError("--config is required");
  return load_config(f.config);
}

Benchmark need_benchmark(const Flags& f, const HarnessConfig& config) {
  fs::path path = f.benchmark;
  if (path.empty()) {
    if (!config.benchmark) throw UsageError("no benchmark: pass --benchmark or set it in the config");
    path = *config.benchmark;
    if (path.is_relative()) path = fs::path(f.config).parent_path() / path;
  }
  return load_benchmark(path);
}

std::string new_run_id() {
  std::string id = "run-";
  for (char c : utc_timestamp_now()) {
    if (std::isalnum(static_cast<unsigned char>(c))) id += c;
  }
  return id;
}

RunStore need_store(const Flags& f, const HarnessConfig& config) {
  if (f.run_dir.empty()) throw UsageError("--run-dir is required");
  return RunStore::open_or_create(f.run_dir, new_run_id(), config_to_json(config));
}

RunStore existing_store(const Flags& f) {
  if (f.run_dir.empty()) throw UsageError("--run-dir is required");
  return RunStore::open(f.run_dir, false);
}

void print_stage(std::ostream& out, const char* stage, const StageReport& r) {
  out << fmt::format("{}: {} completed, {} already done, {} failed\n", stage, r.completed,
                     r.skipped, r.failed);
  for (const auto& msg : r.failures) out << "  " << msg << '\n';
}

int stage_command(const Flags& f, std::ostream& out, bool judging) {
  const HarnessConfig config = need_config(f);
  const Benchmark bench = need_benchmark(f, config);
  RunStore store = need_store(f, config);
  const fs::path fixtures = f.fixtures.empty() ? store.fixtures_dir() : fs::path(f.fixtures);
  auto gateway = make_gateway(config, parse_backend_mode(f.backend), fixtures);
  const RunPlan plan = make_plan(config, bench, f.iterations);
  const int workers = f.workers > 0 ? f.workers : config.retry.max_concurrent;
  const StageReport r = judging ? run_judging(store, *gateway, config, plan, workers)
                                : run_generation(store, *gateway, config, plan, workers);
  out << fmt::format("run {} in {}\n", store.run_id(), store.dir().string());
  print_stage(out, judging ? "judgments" : "generation", r);
  return r.failed == 0 ? 0 : 1;
}

std::vector<ModelReport> run_reports(const Flags& f, const HarnessConfig& config,
                                     const Benchmark& bench, const RunStore& store) {
  std::vector<std::string> candidates;
  for (const ModelProfile* m : config.candidates()) candidates.push_back(m->name);
  const WeightVector w = WeightVector::resolve(f.weights, bench.category_names());
  return score_run(store.events(), bench, candidates, w, config.generation);
}

int score_command(const Flags& f, std::ostream& out) {
  const HarnessConfig config = need_config(f);
  const Benchmark bench = need_benchmark(f, config);
  const RunStore store = existing_store(f);
  const auto reports = run_reports(f, config, bench, store);
  const TableFormat fmt = parse_table_format(f.format);
  out << emit_table(score_table(reports, bench.category_names()), fmt) << '\n';
  out << emit_table(delta_table(reports, bench.category_names()), fmt);
  for (const auto& r : reports) {
    for (const auto& id : r.excluded) out << fmt::format("excluded {}: {}\n", r.model, id);
  }
  return 0;
}

std::vector<PerficsInput> inputs_from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profiles file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto& rows = doc.is_object() ? doc.at("rows") : doc;
  std::vector<PerficsInput> out;
  try {
    for (const auto& r : rows) {
      PerficsInput x;
      x.model = r.at("model").get<std::string>();
      x.cost = r.at("vram_cost").get<double>();
      x.baseline = r.at("baseline").get<double>();
      x.refined = r.at("refined").get<double>();
      x.external = r.at("ext_avg").get<double>();
      out.push_back(std::move(x));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return out;
}

int rank_command(const Flags& f, std::ostream& out) {
  const PerficsParams params = resolve_perfics_params(f.params);
  std::vector<PerficsInput> inputs;
  if (f.profiles == "golden" || f.profiles == "table4" ||
      (f.profiles.empty() && f.run_dir.empty())) {
    inputs = load_golden(data_dir(f)).ranking_inputs();
  } else if (!f.profiles.empty()) {
    inputs = inputs_from_file(f.profiles);
  } else {
    const HarnessConfig config = need_config(f);
    const Benchmark bench = need_benchmark(f, config);
    const RunStore store = existing_store(f);
    for (const auto& r : run_reports(f, config, bench, store)) {
      const ModelProfile* p = config.find_model(r.model);
      if (!r.weighted_zero_shot || !r.weighted_refined) {
        throw JudgmentUnavailable("no scores for '" + r.model + "'");
      }
      const auto e = p->external_average();
      if (!e) throw ConfigError("profile '" + r.model + "' lacks an external average");
      inputs.push_back({r.model, *r.weighted_zero_shot, *r.weighted_refined, *e,
                        p->vram_gb(f.quant)});
    }
  }
  out << emit_table(ranking_table(rank_models(inputs, params)), parse_table_format(f.format));
  return 0;
}

int scenario_command(const Flags& f, std::ostream& out) {
  PerficsParams params = resolve_perfics_params(f.params);
  ScenarioConstraints c;
  c.vram_budget_gb = f.budget_gb;
  c.quant_bits = f.quant;
  c.gamma_override = f.gamma;
  std::vector<CategoryPerformance> perf;
  std::vector<ModelProfile> profiles;
  std::vector<std::string> categories;
  if (f.run_dir.empty()) {
    const GoldenData g = load_golden(data_dir(f));
    perf = golden_performance(g);
    profiles = g.profiles;
    categories = g.categories;
  } else {
    const HarnessConfig config = need_config(f);
    const Benchmark bench = need_benchmark(f, config);
    const RunStore store = existing_store(f);
    for (const auto& r : run_reports(f, config, bench, store)) perf.push_back(to_performance(r));
    profiles = config.models;
    categories = bench.category_names();
  }
  if (!f.category.empty()) {
    c.focus = normalize_category(f.category);
  } else {
    c.focus = WeightVector::resolve(f.weights, categories);
  }
  out << emit_table(ranking_table(scenario_rank(perf, profiles, c, params)),
                    parse_table_format(f.format));
  return 0;
}

void emit_ledger(const CostLedger& ledger, TableFormat format, std::ostream& out) {
  ReportTable t;
  t.title = "Token usage and cost";
  t.columns = {"Model", "Role", "Calls", "Prompt tokens", "Completion tokens", "Cost"};
  auto add = [&](const std::map<std::string, UsageTotals>& m, const char* role) {
    for (const auto& [name, u] : m) {
      t.rows.push_back({ReportCell::label(name), ReportCell::label(role),
                        ReportCell::label(std::to_string(u.call_count)),
                        ReportCell::label(std::to_string(u.prompt_tokens)),
                        ReportCell::label(std::to_string(u.completion_tokens)),
                        ReportCell::number(u.estimated_cost)});
    }
  };
  add(ledger.models, "generation");
  add(ledger.oracles, "oracle");
  out << emit_table(t, format);
  out << fmt::format("Estimated total cost: {:.4f}\n", ledger.estimated_cost);
}

int report_command(const Flags& f, std::ostream& out) {
  const TableFormat format = parse_table_format(f.format);
  if (f.run_dir.empty()) {
    const GoldenData g = load_golden(data_dir(f));
    out << emit_table(category_table(g), format) << '\n';
    for (const auto& p : g.per_order) out << emit_table(per_order_table(g, p.model), format) << '\n';
    out << emit_table(ranking_table(rank_models(g.ranking_inputs(), g.params)), format);
    return 0;
  }
  const HarnessConfig config = need_config(f);
  const Benchmark bench = need_benchmark(f, config);
  const RunStore store = existing_store(f);
  const auto reports = run_reports(f, config, bench, store);
  out << emit_table(score_table(reports, bench.category_names()), format) << '\n';
  out << emit_table(delta_table(reports, bench.category_names()), format) << '\n';
  emit_ledger(cost_summary(store.events(), config.prices), format, out);
  return 0;
}

int verify_command(const Flags& f, std::ostream& out) {
  const GoldenData g = load_golden(data_dir(f));
  VerifyOptions opts;
  opts.fuzz_inputs = f.fuzz;
  opts.property_pairs = f.pairs;
  opts.seed = f.seed;
  const auto results = verify_golden(g, opts);
  for (const auto& r : results) out << format_check(r) << '\n';
  const bool ok = all_gating_pass(results);
  out << (ok ? "all golden checks passed\n" : "golden checks FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-refinement evaluation harness with PeRFICS ranking", "perfics"};
  app.require_subcommand(1, 1);
  Flags f;

  auto run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "Harness config (JSON)");
    sub->add_option("--run-dir", f.run_dir, "Run directory");
    sub->add_option("--benchmark", f.benchmark, "Benchmark file; overrides the config");
  };
  auto table_flags = [&](CLI::App* sub) {
    sub->add_option("--format", f.format, "markdown|csv")
        ->check(CLI::IsMember({"markdown", "md", "csv"}));
  };
  auto gen_flags = [&](CLI::App* sub) {
    run_flags(sub);
    sub->add_option("--backend", f.backend, "live|record|replay")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    sub->add_option("--fixtures", f.fixtures, "Fixture directory (default <run-dir>/fixtures)");
    sub->add_option("--iterations", f.iterations, "Critique/refine rounds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--workers", f.workers, "Parallel prompts (default: retry.max_concurrent)");
  };
  auto rank_flags = [&](CLI::App* sub) {
    sub->add_option("--params", f.params, "default or a JSON file of PeRFICS parameters");
    sub->add_option("--profiles", f.profiles, "golden, or a JSON file of ranking rows");
    sub->add_option("--weights", f.weights, "vicuna|uniform|PATH");
    sub->add_option("--quant", f.quant, "4 or 16")->check(CLI::IsMember({4, 16}));
    sub->add_option("--data-dir", f.data_dir, "Golden data directory");
    run_flags(sub);
    table_flags(sub);
  };

  auto* run = app.add_subcommand("run", "Generate zero-shot, critique and refined answers");
  gen_flags(run);
  auto* judge = app.add_subcommand("judge", "Judge answers against the control in both orders");
  gen_flags(judge);
  auto* score = app.add_subcommand("score", "Aggregate judgments into category scores");
  run_flags(score);
  score->add_option("--weights", f.weights, "vicuna|uniform|PATH");
  table_flags(score);
  auto* rank = app.add_subcommand("rank", "Rank models by PeRFICS");
  rank_flags(rank);
  auto* scenario = app.add_subcommand("scenario", "Rank under a VRAM budget for one task category");
  rank_flags(scenario);
  scenario->add_option("--budget-gb", f.budget_gb, "VRAM budget in GB");
  scenario->add_option("--category", f.category, "Focus category");
  scenario->add_option("--gamma", f.gamma, "Cost discount override");
  auto* report = app.add_subcommand("report", "Emit score tables (golden data or a run)");
  run_flags(report);
  report->add_option("--weights", f.weights, "vicuna|uniform|PATH");
  report->add_option("--data-dir", f.data_dir, "Golden data directory");
  table_flags(report);
  auto* verify = app.add_subcommand("verify", "Run the golden acceptance checks");
  verify->add_option("--data-dir", f.data_dir, "Golden data directory");
  verify->add_option("--fuzz", f.fuzz, "Random parser inputs");
  verify->add_option("--pairs", f.pairs, "Random pairs per property");
  verify->add_option("--seed", f.seed, "Seed for the property checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "UsageError: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run) return stage_command(f, out, false);
    if (*judge) return stage_command(f, out, true);
    if (*score) return score_command(f, out);
    if (*rank) return rank_command(f, out);
    if (*scenario) {
      if (f.category.empty() && f.weights == "vicuna" && !scenario->count("--weights")) {
        throw UsageError("scenario needs --category or --weights");
      }
      return scenario_command(f, out);
    }
    if (*report) return report_command(f, out);
    if (*verify) return verify_command(f, out);
  } catch (const UsageError& e) {
    err << "UsageError: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "Error: " << e.what() << '\n';
    return 1;
  }
  err << "UsageError: no subcommand\n";
  return 2;
}

}  // namespace perfics
