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

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "perfics/errors.hpp"
#include "perfics/golden.hpp"
#include "perfics/pipeline.hpp"
#include "perfics/synthetic.hpp"

namespace perfics {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
CheckResult timed(Fn&& fn) {
  const auto start = Clock::now();
  CheckResult r = fn();
  r.millis = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return r;
}

}  // namespace

double perfics_log_oracle(const PerficsInput& in, const PerficsParams& p) {
  using F = boost::multiprecision::cpp_bin_float_50;
  const F b(in.baseline), r(in.refined), e(in.external), c(in.cost);
  const F a = F(p.alpha) * b + F(p.beta) * (r - b);
  const F num = F(p.eta) * exp(F(p.kappa) * a) + F(p.rho) * e;
  const F den = exp(F(p.gamma) * c) + F(p.delta);
  return static_cast<double>(log(num / den));
}

CheckResult check_equal_weight_means(const GoldenData& g) {
  CheckResult r{"1", "equal-weight means", true, true, {}, 0};
  std::vector<std::string> parts;
  for (const char* m : {"Airoboros-7B", "Vicuna-13B"}) {
    const auto& row = g.row(m);
    const double got = equal_weight_mean(golden_row(g, row.zero_shot));
    const bool ok = std::fabs(got - row.eq_weight.zero_shot) <= 0.01 + 1e-9;
    r.pass = r.pass && ok;
    parts.push_back(fmt::format("{} zero-shot {:.4f} vs {:.2f} (+/-0.01){}", m, got,
                                row.eq_weight.zero_shot, ok ? "" : " MISMATCH"));
  }
  r.detail = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CheckResult check_weighted_means(const GoldenData& g) {
  CheckResult r{"2", "category-weighted means", true, true, {}, 0};
  const WeightVector w = WeightVector::vicuna();
  std::vector<std::string> parts;
  for (const char* m : {"Airoboros-7B", "Vicuna-13B"}) {
    const auto& row = g.row(m);
    const double got = weighted_mean(golden_row(g, row.zero_shot), w);
    const bool ok = std::fabs(got - row.vicuna.zero_shot) <= 0.02 + 1e-9;
    r.pass = r.pass && ok;
    parts.push_back(fmt::format("{} zero-shot {:.4f} vs {:.2f} (+/-0.02){}", m, got,
                                row.vicuna.zero_shot, ok ? "" : " MISMATCH"));
  }
  r.detail = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

namespace {

struct CellMiss {
  std::string model;
  std::string category;
  double averaged;
  double published;
};

std::vector<CellMiss> debias_misses(const GoldenData& g, bool refined, int& cells) {
  std::vector<CellMiss> out;
  cells = 0;
  for (const auto& p : g.per_order) {
    const auto& row = g.row(p.model);
    const auto& a = refined ? p.order_a.refined : p.order_a.zero_shot;
    const auto& b = refined ? p.order_b.refined : p.order_b.zero_shot;
    const auto& t = refined ? row.refined : row.zero_shot;
    for (std::size_t i = 0; i < g.categories.size(); ++i) {
      ++cells;
      const double avg = (a[i] + b[i]) / 2.0;
      if (std::fabs(avg - t[i]) > 0.05 + 1e-9) {
        out.push_back({p.model, g.categories[i], avg, t[i]});
      }
    }
  }
  return out;
}

std::string describe(const std::vector<CellMiss>& misses) {
  std::vector<std::string> parts;
  for (const auto& m : misses) {
    parts.push_back(fmt::format("{} {} {:.3f} vs {:.2f}", m.model, m.category,
                                m.averaged, m.published));
  }
  return fmt::format("{}", fmt::join(parts, "; "));
}

}  // namespace

CheckResult check_debias_averaging(const GoldenData& g) {
  CheckResult r{"3", "debias averaging (zero-shot cells)", true, true, {}, 0};
  int cells = 0;
  const auto misses = debias_misses(g, false, cells);
  r.pass = misses.empty() && cells == 36;
  r.detail = fmt::format("{}/{} cells of (A+B)/2 within +/-0.05 of the averaged table",
                         cells - static_cast<int>(misses.size()), cells);
  if (!misses.empty()) r.detail += "; off: " + describe(misses);
  return r;
}

CheckResult check_refined_debias_cells(const GoldenData& g) {
  CheckResult r{"3r", "debias averaging (refined cells)", true, false, {}, 0};
  int cells = 0;
  const auto misses = debias_misses(g, true, cells);
  r.pass = misses.empty();
  r.detail = fmt::format("{}/{} cells within +/-0.05", cells - static_cast<int>(misses.size()),
                         cells);
  if (!misses.empty()) {
    r.detail += "; published inputs disagree at: " + describe(misses);
  }
  return r;
}

CheckResult check_per_order_means(const GoldenData& g) {
  CheckResult r{"3m", "per-order equal-weight means", true, false, {}, 0};
  int cells = 0;
  std::vector<std::string> off;
  for (const auto& p : g.per_order) {
    for (const auto* t : {&p.order_a, &p.order_b}) {
      const char* label = t == &p.order_a ? "A" : "B";
      for (int v = 0; v < 2; ++v) {
        ++cells;
        const double got = equal_weight_mean(golden_row(g, v ? t->refined : t->zero_shot));
        const double want = v ? t->eq_weight.refined : t->eq_weight.zero_shot;
        if (std::fabs(got - want) > 0.01 + 1e-9) {
          off.push_back(fmt::format("{} {} {} {:.3f} vs {:.2f}", p.model, label,
                                    v ? "refined" : "zero-shot", got, want));
        }
      }
    }
  }
  r.pass = off.empty();
  r.detail = fmt::format("{}/{} means within +/-0.01", cells - static_cast<int>(off.size()),
                         cells);
  if (!off.empty()) r.detail += fmt::format("; published inputs disagree at: {}", fmt::join(off, "; "));
  return r;
}

CheckResult check_change_columns(const GoldenData& g) {
  CheckResult r{"4", "change columns", true, true, {}, 0};
  int cells = 0;
  std::vector<std::string> off;
  for (const auto& p : g.per_order) {
    for (const auto* t : {&p.order_a, &p.order_b}) {
      for (std::size_t i = 0; i < g.categories.size(); ++i) {
        ++cells;
        const CategoryScore z{g.categories[i], Variant::kZeroShot, t->zero_shot[i], 10};
        const CategoryScore f{g.categories[i], Variant::kRefined, t->refined[i], 10};
        const double d = domain_delta(z, f).delta_pct;
        if (std::fabs(d - t->change[i]) > 0.01 + 1e-9) {
          off.push_back(fmt::format("{} {} {:.2f} vs {:.2f}", p.model, g.categories[i], d,
                                    t->change[i]));
        }
      }
    }
  }
  r.pass = off.empty() && cells > 0;
  r.detail = fmt::format("{}/{} cells equal refined - zero-shot within +/-0.01",
                         cells - static_cast<int>(off.size()), cells);
  if (!off.empty()) r.detail += fmt::format("; off: {}", fmt::join(off, "; "));
  return r;
}

CheckResult check_ranking(const GoldenData& g) {
  CheckResult r{"5", "PeRFICS ranking", true, true, {}, 0};
  const auto results = rank_models(g.ranking_inputs(), g.params);
  std::vector<std::string> got;
  for (const auto& x : results) got.push_back(x.model);
  const auto want = g.ranking_order();
  const bool order_ok = got == want;

  std::string anchor = want.empty() ? std::string() : want.front();
  bool anchor_ok = false;
  double log_score = 0.0;
  double oracle = 0.0;
  for (const auto& in : g.ranking_inputs()) {
    if (in.model != anchor) continue;
    log_score = perfics_log_score(in, g.params);
    oracle = perfics_log_oracle(in, g.params);
    anchor_ok = std::fabs(log_score - oracle) <= 0.001 && std::fabs(oracle - 27.475) <= 0.001;
  }
  r.pass = order_ok && anchor_ok;
  r.detail = fmt::format("order [{}]{}; {} log score {:.6f}, 50-digit oracle {:.6f}, target 27.475 +/-0.001",
                         fmt::join(got, ", "), order_ok ? "" : " != expected", anchor,
                         log_score, oracle);
  return r;
}

CheckResult check_scenarios(const GoldenData& g) {
  CheckResult r{"6", "scenario selections", true, true, {}, 0};
  const auto perf = golden_performance(g);
  std::vector<std::string> parts;
  r.pass = !g.scenarios.empty();
  for (const auto& s : g.scenarios) {
    ScenarioConstraints c;
    c.vram_budget_gb = s.vram_budget_gb;
    c.quant_bits = s.quant_bits;
    c.focus = s.category;
    c.gamma_override = s.gamma;
    const auto ranked = scenario_rank(perf, g.profiles, c, g.params);
    const bool ok = !ranked.empty() && ranked.front().model == s.expected_top;
    r.pass = r.pass && ok;
    parts.push_back(fmt::format("{} ({}, {}, gamma {}) -> {}{}", s.name, s.category,
                                s.vram_budget_gb ? fmt::format("{} GB", *s.vram_budget_gb)
                                                 : std::string("no VRAM limit"),
                                s.gamma, ranked.front().model,
                                ok ? "" : " expected " + s.expected_top));
  }
  r.detail = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CheckResult check_monotonicity(std::size_t pairs, std::uint64_t seed) {
  CheckResult r{"7", "metric monotonicity", true, true, {}, 0};
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto random_params = [&] {
    PerficsParams p;
    if (rng() % 2) {
      p.alpha = u(0, 2);
      p.beta = u(0, 2);
      p.rho = u(0, 2);
      p.eta = u(0.01, 10);
      p.kappa = u(0.01, 1);
      p.gamma = u(0, 0.5);
      p.delta = u(0, 1e-3);
    }
    return p;
  };
  auto random_input = [&] {
    PerficsInput in;
    in.model = "m";
    in.baseline = u(0, 150);
    in.refined = u(0, 150);
    in.external = u(0, 100);
    in.cost = u(0, 200);
    return in;
  };
  std::size_t violations[4] = {0, 0, 0, 0};
  std::size_t direct_checked = 0;
  std::size_t direct_off = 0;
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const PerficsParams p = random_params();
    const PerficsInput base = random_input();
    const double step = u(1e-6, 20);
    const double l0 = perfics_log_score(base, p);

    PerficsInput b = base;  // B up, I fixed
    b.baseline += step;
    b.refined += step;
    PerficsInput im = base;  // I up, B fixed
    im.refined += step;
    PerficsInput e = base;
    e.external += step;
    PerficsInput c = base;
    c.cost += step;
    if (perfics_log_score(b, p) < l0) ++violations[0];
    if (perfics_log_score(im, p) < l0) ++violations[1];
    if (perfics_log_score(e, p) < l0) ++violations[2];
    if (perfics_log_score(c, p) > l0) ++violations[3];

    for (const PerficsInput* x : {&base, static_cast<const PerficsInput*>(&b),
                                  static_cast<const PerficsInput*>(&im),
                                  static_cast<const PerficsInput*>(&e),
                                  static_cast<const PerficsInput*>(&c)}) {
      const double direct = perfics_direct(*x, p);
      if (!std::isfinite(direct) || !std::isnormal(direct)) continue;
      ++direct_checked;
      const double rel = std::fabs(std::exp(perfics_log_score(*x, p)) - direct) / direct;
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-9) ++direct_off;
    }
  }
  r.pass = violations[0] + violations[1] + violations[2] + violations[3] == 0 &&
           direct_off == 0 && pairs >= 1000;
  r.detail = fmt::format(
      "{} pairs per property; violations B={} I={} E={} C={}; log vs direct on {} "
      "representable inputs, worst relative gap {:.2e} (limit 1e-9)",
      pairs, violations[0], violations[1], violations[2], violations[3], direct_checked,
      worst_rel);
  return r;
}

CheckResult check_parser_fuzz(std::size_t inputs, std::uint64_t seed) {
  CheckResult r{"8", "judgment parser robustness", true, true, {}, 0};
  std::mt19937_64 rng(seed);
  static constexpr std::string_view kAlphabet = "0123456789 .,+-\n\t\r";
  std::size_t parsed = 0;
  std::size_t typed = 0;
  std::size_t untyped = 0;
  std::string buf;
  for (std::size_t i = 0; i < inputs; ++i) {
    buf.clear();
    const std::size_t len = rng() % 49;
    for (std::size_t k = 0; k < len; ++k) {
      const auto x = rng();
      buf.push_back(x % 2 ? kAlphabet[(x >> 8) % kAlphabet.size()]
                          : static_cast<char>((x >> 8) & 0xff));
    }
    try {
      const ParsedJudgment j = parse_judgment(buf);
      if (!(j.score_first >= 0 && j.score_first <= 10 && j.score_second >= 0 &&
            j.score_second <= 10)) {
        ++untyped;
      } else {
        ++parsed;
      }
    } catch (const JudgmentParseError&) {
      ++typed;
    } catch (const ScoreOutOfRange&) {
      ++typed;
    } catch (...) {
      ++untyped;
    }
  }

  const std::size_t exact_cases = std::max<std::size_t>(inputs / 5, 1000);
  std::size_t inexact = 0;
  for (std::size_t i = 0; i < exact_cases; ++i) {
    auto score = [&]() {
      const int digits = static_cast<int>(rng() % 4);
      const double v = std::uniform_real_distribution<double>(0, 10)(rng);
      std::string s = fmt::format("{:.{}f}", v, digits);
      if (std::strtod(s.c_str(), nullptr) > 10.0) s = "10";
      return s;
    };
    const std::string a = score();
    const std::string b = score();
    const std::string text = a + " " + b + "\nExplanation " + std::to_string(i);
    try {
      const ParsedJudgment j = parse_judgment(text);
      if (j.score_first != std::strtod(a.c_str(), nullptr) ||
          j.score_second != std::strtod(b.c_str(), nullptr) ||
          j.explanation != "Explanation " + std::to_string(i)) {
        ++inexact;
      }
    } catch (...) {
      ++inexact;
    }
  }
  r.pass = untyped == 0 && inexact == 0 && inputs >= 100000;
  r.detail = fmt::format(
      "{} random inputs: {} parsed, {} typed errors, {} other; {} well-formed lines, {} "
      "not parsed exactly",
      inputs, parsed, typed, untyped, exact_cases, inexact);
  return r;
}

namespace {

HarnessConfig synthetic_config() {
  HarnessConfig c;
  auto add = [&](std::string name, ModelRole role) {
    ModelProfile p;
    p.name = name;
    p.role = role;
    c.models.push_back(p);
    c.model_endpoint[name] = "synthetic";
  };
  add("control-model", ModelRole::kControl);
  add("oracle-model", ModelRole::kOracle);
  add("candidate-a", ModelRole::kCandidate);
  add("candidate-b", ModelRole::kCandidate);
  EndpointConfig ep;
  ep.base_url = "http://synthetic.invalid";
  c.endpoints["synthetic"] = ep;
  return c;
}

Benchmark synthetic_benchmark(int per_category) {
  std::ostringstream lines;
  int id = 0;
  for (const auto& cat : vicuna_categories()) {
    for (int i = 0; i < per_category; ++i) {
      nlohmann::json rec = {{"id", ++id},
                            {"category", cat.name},
                            {"text", fmt::format("Synthetic {} task number {}.", cat.name, i)}};
      lines << rec.dump() << '\n';
    }
  }
  std::istringstream in(lines.str());
  return parse_benchmark(in);
}

std::unique_ptr<Gateway> replay_gateway(const HarnessConfig& config,
                                        const std::filesystem::path& fixtures,
                                        std::shared_ptr<std::atomic<int>> calls) {
  auto g = std::make_unique<Gateway>(config.retry, [](std::chrono::milliseconds) {});
  auto store = std::make_shared<FixtureStore>(fixtures);
  for (const auto& m : config.models) {
    g->register_backend(m.name, std::make_shared<CountingBackend>(
                                    std::make_shared<ReplayBackend>(store), calls));
  }
  return g;
}

std::string stripped_log(const RunStore& store) {
  std::string out;
  for (RunEvent e : store.events()) {
    e.run_id.clear();
    e.timestamp.clear();
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

void run_all(RunStore& store, Gateway& g, const HarnessConfig& config,
             const RunPlan& plan, int workers = 1) {
  const auto gen = run_generation(store, g, config, plan, workers);
  const auto judged = run_judging(store, g, config, plan, workers);
  if (gen.failed || judged.failed) {
    throw StorageError(fmt::format("synthetic run had failures: {}",
                                   fmt::join(gen.failures.empty() ? judged.failures
                                                                  : gen.failures,
                                             "; ")));
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

CheckResult check_replay_resume(const VerifyOptions& opts) {
  CheckResult r{"9", "replay determinism and resume", true, true, {}, 0};
  namespace fs = std::filesystem;
  fs::path root = opts.scratch_dir;
  bool owned = false;
  if (root.empty()) {
    root = fs::temp_directory_path() /
           fmt::format("perfics-verify-{}-{}", ::getpid(),
                       Clock::now().time_since_epoch().count());
    owned = true;
  }
  fs::remove_all(root);
  fs::create_directories(root);
  // Torn tails are expected here; keep their warnings out of the report.
  const auto level = spdlog::get_level();
  spdlog::set_level(spdlog::level::err);

  try {
    const HarnessConfig config = synthetic_config();
    const Benchmark bench = synthetic_benchmark(opts.prompts_per_category);
    const RunPlan plan = make_plan(config, bench, 1);
    const fs::path fixtures = root / "fixtures";

    auto http_calls = std::make_shared<std::atomic<int>>(0);
    {
      auto g = make_gateway(
          config, BackendMode::kRecord, fixtures,
          [&](const std::string&, const EndpointConfig&) -> std::unique_ptr<Transport> {
            return std::make_unique<SyntheticTransport>("oracle-model", http_calls);
          },
          [](std::chrono::milliseconds) {});
      RunStore rec = RunStore::create(root / "record", "record", config_to_json(config), false);
      run_all(rec, *g, config, plan);
    }

    std::string logs[2];
    int calls[2] = {0, 0};
    std::set<std::string> done;
    for (int i = 0; i < 2; ++i) {
      auto counter = std::make_shared<std::atomic<int>>(0);
      auto g = replay_gateway(config, fixtures, counter);
      RunStore s = RunStore::create(root / fmt::format("replay-{}", i + 1),
                                    fmt::format("replay-{}", i + 1), config_to_json(config),
                                    false);
      // Second replay runs parallel; the log must not change.
      run_all(s, *g, config, plan, i == 0 ? 1 : 4);
      logs[i] = stripped_log(s);
      calls[i] = *counter;
      if (i == 0) done = s.completed_keys();
    }
    const std::size_t planned = full_plan(plan).size();
    const bool identical = logs[0] == logs[1];

    const auto lines = read_lines(root / "replay-1" / "events.jsonl");
    const int n = static_cast<int>(lines.size());
    int resume_bad = 0;
    int torn = 0;
    std::string first_bad;
    for (int k = 0; k <= n; ++k) {
      const fs::path dir = root / "resume";
      fs::remove_all(dir);
      fs::create_directories(dir);
      fs::copy_file(root / "replay-1" / "manifest.json", dir / "manifest.json");
      {
        std::ofstream out(dir / "events.jsonl", std::ios::binary);
        for (int i = 0; i < k; ++i) out << lines[i] << '\n';
        if (k < n && k % 2 == 1) {
          out << lines[k].substr(0, lines[k].size() / 2);  // torn write
          ++torn;
        }
      }
      auto counter = std::make_shared<std::atomic<int>>(0);
      auto g = replay_gateway(config, fixtures, counter);
      RunStore s = RunStore::open(dir, false);
      run_all(s, *g, config, plan);
      const bool ok = *counter == n - k && s.completed_keys() == done &&
                      stripped_log(s) == logs[0];
      if (!ok) {
        ++resume_bad;
        if (first_bad.empty()) {
          first_bad = fmt::format("boundary {}: {} calls for {} missing events", k,
                                  counter->load(), n - k);
        }
      }
    }
    r.pass = identical && calls[0] == n && calls[1] == n &&
             static_cast<std::size_t>(n) == planned && done.size() == planned &&
             resume_bad == 0;
    r.detail = fmt::format(
        "{} planned units; replay logs at 1 and 4 workers {}; {} kill points ({} with a torn tail), {} resumed "
        "with duplicate or missing work{}",
        planned, identical ? "byte-identical" : "DIFFER", n + 1, torn, resume_bad,
        first_bad.empty() ? "" : " (" + first_bad + ")");
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  spdlog::set_level(level);
  if (owned) {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  return r;
}

CheckResult check_aggregation_identities(const GoldenData& g, std::size_t samples,
                                         std::uint64_t seed) {
  CheckResult r{"10", "aggregation identities", true, true, {}, 0};
  std::mt19937_64 rng(seed);
  std::vector<ScoreRow> rows;
  for (const auto& row : g.category_scores) {
    rows.push_back(golden_row(g, row.zero_shot));
    rows.push_back(golden_row(g, row.refined));
  }
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<double> v;
    for (std::size_t k = 0; k < g.categories.size(); ++k) {
      v.push_back(std::uniform_real_distribution<double>(0, 150)(rng));
    }
    rows.push_back(golden_row(g, v));
  }
  const WeightVector uniform = WeightVector::uniform(g.categories);
  double worst_uniform = 0.0;
  double worst_scale = 0.0;
  int nonzero_self_delta = 0;
  for (const auto& row : rows) {
    const double eq = equal_weight_mean(row);
    worst_uniform = std::max(worst_uniform, std::fabs(weighted_mean(row, uniform) - eq) /
                                                std::max(std::fabs(eq), 1e-300));
    std::map<std::string, double> w;
    for (const auto& c : g.categories) {
      w[c] = std::uniform_real_distribution<double>(0.01, 10)(rng);
    }
    const double base = weighted_mean(row, WeightVector(w));
    for (double s : {1e-6, 0.37, 3.0, 1e6}) {
      auto scaled = w;
      for (auto& [c, x] : scaled) x *= s;
      const double got = weighted_mean(row, WeightVector(scaled));
      worst_scale = std::max(worst_scale, std::fabs(got - base) / std::max(std::fabs(base), 1e-300));
    }
    for (const auto& [cat, v] : row) {
      const CategoryScore a{cat, Variant::kZeroShot, v, 10};
      if (domain_delta(a, a).delta_pct != 0.0) ++nonzero_self_delta;
    }
  }
  r.pass = worst_uniform <= 1e-12 && worst_scale <= 1e-12 && nonzero_self_delta == 0;
  r.detail = fmt::format(
      "{} rows: uniform vs equal-weight worst relative gap {:.1e}; rescaling worst {:.1e} "
      "(limit 1e-12); domain_delta(a,a) nonzero {} times",
      rows.size(), worst_uniform, worst_scale, nonzero_self_delta);
  return r;
}

std::vector<CheckResult> verify_golden(const GoldenData& g, const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  auto guard = [&](auto&& fn, const char* id, const char* name) {
    try {
      out.push_back(timed(fn));
    } catch (const std::exception& e) {
      out.push_back({id, name, false, true, std::string("error: ") + e.what(), 0});
    }
  };
  guard([&] { return check_equal_weight_means(g); }, "1", "equal-weight means");
  guard([&] { return check_weighted_means(g); }, "2", "category-weighted means");
  guard([&] { return check_debias_averaging(g); }, "3", "debias averaging (zero-shot cells)");
  guard([&] { return check_refined_debias_cells(g); }, "3r", "debias averaging (refined cells)");
  guard([&] { return check_per_order_means(g); }, "3m", "per-order equal-weight means");
  guard([&] { return check_change_columns(g); }, "4", "change columns");
  guard([&] { return check_ranking(g); }, "5", "PeRFICS ranking");
  guard([&] { return check_scenarios(g); }, "6", "scenario selections");
  guard([&] { return check_monotonicity(opts.property_pairs, opts.seed); }, "7",
        "metric monotonicity");
  guard([&] { return check_parser_fuzz(opts.fuzz_inputs, opts.seed + 1); }, "8",
        "judgment parser robustness");
  guard([&] { return check_replay_resume(opts); }, "9", "replay determinism and resume");
  guard([&] { return check_aggregation_identities(g, opts.property_pairs, opts.seed + 2); },
        "10", "aggregation identities");
  return out;
}

std::string format_check(const CheckResult& c) {
  const char* tag = c.gating ? (c.pass ? "PASS" : "FAIL") : (c.pass ? "INFO" : "NOTE");
  return fmt::format("[{}] {:>3} {}: {} ({:.1f} ms)", tag, c.id, c.name, c.detail, c.millis);
}

bool all_gating_pass(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& c) { return !c.gating || c.pass; });
}

}  // namespace perfics
