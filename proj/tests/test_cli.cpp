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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "perfics/cli.hpp"
#include "perfics/pipeline.hpp"
#include "perfics/synthetic.hpp"
#include "support/fakes.hpp"

namespace perfics {
namespace {

using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data_dir() { return PERFICS_TEST_DATA_DIR "/golden"; }

TEST(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("UsageError"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"rank", "--quant", "8"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, 0); }

TEST(Cli, RankPublishedOrder) {
  const auto r = run_cli({"rank", "--profiles", "table4", "--params", "default",
                          "--data-dir", data_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t pos = 0;
  for (const char* m : {"GPT4X-Alpasta-30B", "Vicuna-7B", "Vicuna-13B", "Guanaco-65B",
                        "Airoboros-7B"}) {
    const auto next = r.out.find(m, pos);
    ASSERT_NE(next, std::string::npos) << m;
    pos = next;
  }
  EXPECT_NE(r.out.find("| 1 | GPT4X-Alpasta-30B | 27.47 |"), std::string::npos);
}

TEST(Cli, RankCsv) {
  const auto r = run_cli({"rank", "--profiles", "golden", "--format", "csv",
                          "--data-dir", data_dir()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("Rank,Model", 0), 0u) << r.out;
}

TEST(Cli, ScenarioCommands) {
  auto r = run_cli({"scenario", "--budget-gb", "12", "--quant", "4", "--category", "writing",
                    "--gamma", "0.15", "--data-dir", data_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| 1 | Vicuna-7B |"), std::string::npos) << r.out;
  r = run_cli({"scenario", "--category", "coding", "--gamma", "0", "--data-dir", data_dir()});
  EXPECT_NE(r.out.find("| 1 | GPT4X-Alpasta-30B |"), std::string::npos) << r.out;
  r = run_cli({"scenario", "--budget-gb", "1", "--category", "coding", "--data-dir", data_dir()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("NoFeasibleModel"), std::string::npos);
  EXPECT_EQ(run_cli({"scenario", "--data-dir", data_dir()}).code, 2);
}

TEST(Cli, ReportGoldenIsDeterministic) {
  const auto a = run_cli({"report", "--data-dir", data_dir()});
  const auto b = run_cli({"report", "--data-dir", data_dir()});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("89.91"), std::string::npos);
}

TEST(Cli, VerifyPasses) {
  const auto r = run_cli({"verify", "--data-dir", data_dir()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("[FAIL]"), std::string::npos);
  EXPECT_NE(r.out.find("all golden checks passed"), std::string::npos);
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(run_cli({"run", "--run-dir", "/tmp/x"}).code, 2);
  const auto r = run_cli({"run", "--config", "/nonexistent/config.json", "--run-dir", "/tmp/x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
}

// Small config over two prompts; fixtures are recorded once from the
// deterministic synthetic backend and then replayed by the CLI.
class CliReplay : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ofstream(dir / "bench.jsonl")
        << R"({"id":"w1","category":"writing","text":"Write a short note."})" "\n"
        << R"({"id":"m1","category":"math","text":"What is 3*7?"})" "\n";
    nlohmann::json cfg = {
        {"benchmark", "bench.jsonl"},
        {"models",
         {{{"name", "cand"}, {"role", "candidate"}, {"endpoint", "e"},
           {"vram_16bit_gb", 2}, {"vram_4bit_gb", 1},
           {"external_scores", {{"average", 50}}}},
          {{"name", "ctrl"}, {"role", "control"}, {"endpoint", "e"}},
          {{"name", "judge"}, {"role", "oracle"}, {"endpoint", "e"}}}},
        {"endpoints", {{"e", {{"base_url", "http://127.0.0.1:1"}}}}},
        {"prices", {{"judge", {{"prompt_per_1k", 0.03}, {"completion_per_1k", 0.06}}}}},
        {"retry", {{"max_attempts", 1}, {"base_backoff_ms", 0}, {"max_concurrent", 2}}}};
    std::ofstream(dir / "config.json") << cfg.dump(2);

    const HarnessConfig config = load_config(dir / "config.json");
    const Benchmark bench = load_benchmark(dir / "bench.jsonl");
    auto gw = make_gateway(config, BackendMode::kRecord, dir / "fixtures",
                           [](const std::string&, const EndpointConfig&) {
                             return std::make_unique<SyntheticTransport>("judge");
                           });
    RunStore store = RunStore::create(dir / "seed-run", "seed", {}, false);
    const RunPlan plan = make_plan(config, bench, 1);
    ASSERT_EQ(run_generation(store, *gw, config, plan, 2).failed, 0);
    ASSERT_EQ(run_judging(store, *gw, config, plan, 2).failed, 0);
  }

  std::vector<std::string> stage(const std::string& cmd, const std::string& run) {
    return {cmd, "--config", (dir / "config.json").string(), "--run-dir",
            (dir / run).string(), "--backend", "replay", "--fixtures",
            (dir / "fixtures").string()};
  }

  static std::string stripped_log(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
      auto e = nlohmann::json::parse(line).at("event");
      e.erase("timestamp");
      e.erase("run_id");
      out += e.dump() + "\n";
    }
    return out;
  }

  TempDir dir;
};

TEST_F(CliReplay, EndToEndIsReproducible) {
  std::vector<std::string> scores;
  for (const char* run : {"r1", "r2"}) {
    auto r = run_cli(stage("run", run));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("generation: 8 completed, 0 already done, 0 failed"),
              std::string::npos)
        << r.out;
    r = run_cli(stage("judge", run));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("judgments: 8 completed"), std::string::npos) << r.out;
    r = run_cli({"score", "--config", (dir / "config.json").string(), "--run-dir",
                 (dir / run).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    scores.push_back(r.out);
  }
  EXPECT_EQ(scores[0], scores[1]);
  EXPECT_NE(scores[0].find("cand"), std::string::npos);
  EXPECT_EQ(stripped_log(dir / "r1" / "events.jsonl"), stripped_log(dir / "r2" / "events.jsonl"));

  auto again = run_cli(stage("run", "r1"));
  EXPECT_NE(again.out.find("0 completed, 8 already done"), std::string::npos) << again.out;

  const auto rep = run_cli({"report", "--config", (dir / "config.json").string(),
                            "--run-dir", (dir / "r1").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("Token usage and cost"), std::string::npos);
  EXPECT_NE(rep.out.find("| judge | oracle | 8 |"), std::string::npos) << rep.out;
}

TEST_F(CliReplay, MissingFixtureFailsTheStage) {
  std::filesystem::remove_all(dir / "fixtures");
  std::filesystem::create_directories(dir / "fixtures");
  const auto r = run_cli(stage("run", "r3"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("failed"), std::string::npos);
}

}  // namespace
}  // namespace perfics
