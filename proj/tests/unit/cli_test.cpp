// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

const std::string kCli = RELIAKIT_CLI;
const std::string kFixtures = RELIAKIT_FIXTURE_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// ctest runs each test in its own process, possibly concurrently.
fs::path root() {
  return fs::temp_directory_path() / ("reliakit_cli_test_" + std::to_string(::getpid()));
}

struct RemoveRootAtExit {
  ~RemoveRootAtExit() {
    std::error_code ec;
    fs::remove_all(root(), ec);
  }
} remove_root_at_exit;

fs::path scratch(const std::string& name) {
  auto p = root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  const auto dir = root();
  fs::create_directories(dir);
  const auto out = dir / ("out" + std::to_string(counter) + ".txt");
  const auto err = dir / ("err" + std::to_string(counter++) + ".txt");
  const std::string cmd = "env -u OPENAI_API_KEY " + kCli + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string config() { return "--config " + kFixtures + "/config.json"; }
std::string qa() { return kFixtures + "/qa.jsonl"; }

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("label --in /nonexistent.jsonl --out x").code, 2);
  EXPECT_EQ(run("--version").code, 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  auto dir = scratch("bad_config");
  std::ofstream(dir / "c.json") << R"({"typo_key": 1})";
  auto r = run("label --config " + (dir / "c.json").string() + " --in " + qa() +
               " --out " + (dir / "o.jsonl").string());
  EXPECT_EQ(r.code, 2);
  auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err["error"], "config");
}

TEST(Cli, MissingCredentialIsConfigError) {
  auto dir = scratch("no_key");
  std::ofstream(dir / "c.json") << R"({"endpoint": {"url": "http://127.0.0.1:9/v1"}})";
  auto r = run("label --config " + (dir / "c.json").string() + " --in " + qa() +
               " --out " + (dir / "o.jsonl").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("OPENAI_API_KEY"), std::string::npos);
}

TEST(Cli, MalformedInputIsRuntimeError) {
  auto dir = scratch("malformed");
  std::ofstream(dir / "in.jsonl") << "{\"id\": 1}\n";
  auto r = run("label " + config() + " --in " + (dir / "in.jsonl").string() + " --out " +
               (dir / "o.jsonl").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("in.jsonl:1"), std::string::npos) << r.err;
}

TEST(Cli, LabelThenRelabelSkips) {
  auto dir = scratch("label");
  const auto out = (dir / "labeled.jsonl").string();
  auto r = run("label " + config() + " --in " + qa() + " --out " + out);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("known=8, unknown=4"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(out + ".samples.jsonl"));
  // Already labeled: no endpoint is needed, so the default config suffices.
  auto again = run("label --in " + out + " --out " + (dir / "again.jsonl").string());
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_NE(again.out.find("skipped=12"), std::string::npos) << again.out;
}

TEST(Cli, EvalWritesReports) {
  auto dir = scratch("eval");
  auto r = run("eval " + config() + " --in " + qa() + " --out-dir " + dir.string() +
               " --runs 3 --judge-prompts");
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["runs"], 3);
  EXPECT_EQ(report["rows"].back()["source"], "average");
  EXPECT_TRUE(report.contains("pass_at_k"));
  EXPECT_TRUE(report.contains("inconsistency"));
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "responses.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "scored_outcomes.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "judge_prompts.jsonl"));

  auto pk = run("passk --in " + (dir / "responses.jsonl").string() + " --k 1,3");
  ASSERT_EQ(pk.code, 0) << pk.err;
  EXPECT_EQ(pk.out.substr(0, pk.out.find('\n')), "k,pass_at_k");
  EXPECT_EQ(run("passk --in " + (dir / "responses.jsonl").string() + " --k 9").code, 2);
}

TEST(Cli, GrpoSimAblationRefusesLess) {
  auto dir = scratch("grpo");
  auto base = run("grpo-sim " + config() + " --out " + (dir / "a.csv").string());
  auto abl = run("grpo-sim " + config() + " --rs -1 --out " + (dir / "b.csv").string());
  ASSERT_EQ(base.code, 0) << base.err;
  ASSERT_EQ(abl.code, 0) << abl.err;
  auto a = nlohmann::json::parse(slurp(dir / "a.csv.summary.json"));
  auto b = nlohmann::json::parse(slurp(dir / "b.csv.summary.json"));
  EXPECT_GT(a["classes"]["unknown"]["refusal_rate"].get<double>(),
            b["classes"]["unknown"]["refusal_rate"].get<double>());
  EXPECT_TRUE(b["reward"]["ablation"].get<bool>());
  EXPECT_EQ(run("grpo-sim " + config() + " --rs 3 --out " + (dir / "c.csv").string()).code, 2);
}

TEST(Cli, RewardSweepAndCalibrate) {
  auto dir = scratch("sweep");
  auto r = run("reward-sweep " + config() + " --epochs 50 --out " + (dir / "s.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir / "s.csv").find("r_s,acc,truth,rel,abstain"), std::string::npos);

  std::ofstream(dir / "scored.jsonl")
      << "{\"id\":\"a\",\"confidence\":0.9,\"verdict\":\"correct\"}\n"
         "{\"id\":\"b\",\"confidence\":0.2,\"verdict\":\"wrong\"}\n";
  auto c = run("calibrate --in " + (dir / "scored.jsonl").string() + " --out-dir " +
               (dir / "cal").string());
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("auc=1.0000"), std::string::npos) << c.out;
  EXPECT_TRUE(fs::exists(dir / "cal" / "threshold_sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "cal" / "roc.csv"));
  EXPECT_TRUE(fs::exists(dir / "cal" / "calibration.csv"));
}

TEST(Cli, PipelineIsByteReproducible) {
  auto a = scratch("pipe_a");
  auto b = scratch("pipe_b");
  auto ra = run("pipeline " + config() + " --in " + qa() + " --out-dir " + a.string());
  auto rb = run("pipeline " + config() + " --workers 1 --in " + qa() + " --out-dir " +
                b.string());
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++files;
  }
  EXPECT_GE(files, 10u);
  auto c = scratch("pipe_c");
  auto rc = run("pipeline " + config() + " --seed 99 --in " + qa() + " --out-dir " + c.string());
  ASSERT_EQ(rc.code, 0) << rc.err;
  EXPECT_NE(slurp(a / "labeled.jsonl"), slurp(c / "labeled.jsonl"));
}

}  // namespace
