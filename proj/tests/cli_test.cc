/*
 * Copyright 2026 The FastCal Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fastcal/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fastcal/eval.h"
#include "fastcal/rng.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace fastcal {
namespace {

namespace fs = std::filesystem;

const std::string kSourceDir = FASTCAL_SOURCE_DIR;
const std::string kSample = kSourceDir + "/data/sample_binary.csv";
const std::string kGolden =
    kSourceDir + "/tests/golden/sample_binary_explain.jsonl";

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fastcal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun run;
  run.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  run.out = out.str();
  run.err = err.str();
  return run;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<nlohmann::json> JsonLines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("fastcal_cli_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  // Regression data with targets near 500.
  std::string WriteRegression() const {
    const std::string path = Path("regression.csv");
    std::ofstream out(path);
    out << "a,b,y\n";
    Rng rng(3);
    for (int i = 0; i < 400; ++i) {
      const double a = rng.StandardNormal(), b = rng.StandardNormal();
      out << a << "," << b << "," << 490 + 20 * a - 5 * b + 5 * rng.StandardNormal()
          << "\n";
    }
    return path;
  }

  fs::path dir_;
};

TEST_F(CliTest, UnknownFlagIsConfigError) {
  const CliRun run = Cli({"explain", "--data", kSample, "--bogus"});
  EXPECT_EQ(run.code, kExitConfig);
  EXPECT_NE(run.err.find("--bogus"), std::string::npos);
  EXPECT_NE(run.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Cli({"explain"}).code, kExitConfig);
  EXPECT_EQ(Cli({"explain", "--data", Path("missing.csv")}).code, kExitData);
  EXPECT_EQ(Cli({"explain", "--data", kSample, "--noise-type", "laplace"}).code,
            kExitConfig);
  EXPECT_EQ(Cli({"explain", "--data", kSample, "--percentiles", "90,10"}).code,
            kExitConfig);
  EXPECT_EQ(Cli({"explain", "--data", kSample, "--task", "binary",
                 "--threshold", "1"})
                .code,
            kExitConfig);
  {
    std::ofstream ragged(Path("ragged.csv"));
    ragged << "a,y\n1,0\n2\n";
  }
  const CliRun ragged = Cli({"explain", "--data", Path("ragged.csv")});
  EXPECT_EQ(ragged.code, kExitData);
  EXPECT_NE(ragged.err.find("line 3"), std::string::npos) << ragged.err;
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, PerturbationDefaults) {
  const RunConfig defaults;
  EXPECT_EQ(defaults.noise_type, "uniform");
  EXPECT_EQ(defaults.scale_factor, 5u);
  EXPECT_EQ(defaults.severity, 0.5);
  const CliRun implicit = Cli({"explain", "--data", kSample, "--task", "binary",
                            "--limit", "10"});
  const CliRun explicit_flags =
      Cli({"explain", "--data", kSample, "--task", "binary", "--limit", "10",
           "--noise-type", "uniform", "--scale-factor", "5", "--severity",
           "0.5"});
  ASSERT_EQ(implicit.code, kExitOk) << implicit.err;
  EXPECT_EQ(implicit.out, explicit_flags.out);
}

TEST_F(CliTest, ThresholdMetadata) {
  const CliRun run = Cli({"explain", "--data", WriteRegression(), "--threshold",
                       "490", "--direction", "above", "--limit", "20"});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  const auto lines = JsonLines(run.out);
  ASSERT_EQ(lines.size(), 20u);
  for (const auto& j : lines) {
    EXPECT_EQ(j.at("task"), "thresholded");
    EXPECT_EQ(j.at("threshold").at("t"), 490.0);
    EXPECT_EQ(j.at("threshold").at("direction"), "above");
    const double p = j.at("prediction").at("value");
    EXPECT_GE(p, 0);
    EXPECT_LE(p, 1);
  }
}

TEST_F(CliTest, SameSeedIsByteIdentical) {
  const std::vector<std::string> args = {"explain", "--data", kSample,
                                         "--task", "binary", "--out"};
  auto a = args, b = args;
  a.push_back(Path("a.jsonl"));
  b.push_back(Path("b.jsonl"));
  ASSERT_EQ(Cli(a).code, kExitOk);
  ASSERT_EQ(Cli(b).code, kExitOk);
  const std::string first = ReadFile(Path("a.jsonl"));
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, ReadFile(Path("b.jsonl")));
  const CliRun other = Cli({"explain", "--data", kSample, "--task", "binary",
                         "--seed", "7"});
  EXPECT_NE(other.out, first);
  const CliRun threaded = Cli({"explain", "--data", kSample, "--task", "binary",
                            "--jobs", "4"});
  EXPECT_EQ(threaded.out, first);
}

TEST_F(CliTest, EnvironmentSeed) {
  const CliRun flag = Cli({"explain", "--data", kSample, "--task", "binary",
                        "--limit", "5", "--seed", "9"});
  setenv("FASTCAL_SEED", "9", 1);
  const CliRun env = Cli({"explain", "--data", kSample, "--task", "binary",
                       "--limit", "5"});
  const CliRun overridden = Cli({"explain", "--data", kSample, "--task",
                              "binary", "--limit", "5", "--seed", "42"});
  unsetenv("FASTCAL_SEED");
  const CliRun plain = Cli({"explain", "--data", kSample, "--task", "binary",
                         "--limit", "5"});
  EXPECT_EQ(env.out, flag.out);
  EXPECT_EQ(overridden.out, plain.out);
}

TEST_F(CliTest, GoldenSampleExplanations) {
  const CliRun run = Cli({"explain", "--data", kSample, "--task", "binary",
                       "--limit", "5"});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  EXPECT_EQ(run.out, ReadFile(kGolden));
}

TEST_F(CliTest, PlotGoesToErrorStreamWithoutOut) {
  const CliRun run = Cli({"explain", "--data", kSample, "--task", "binary",
                       "--limit", "1", "--plot", "--explainer", "baseline"});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  EXPECT_NE(run.err.find("P(1) = "), std::string::npos);
  EXPECT_NE(run.err.find("color = "), std::string::npos);
  EXPECT_EQ(JsonLines(run.out).size(), 1u);
  EXPECT_TRUE(JsonLines(run.out)[0].at("features")[0].contains("condition"));
}

TEST_F(CliTest, ConfigRoundTripAndOverride) {
  RunConfig config;
  config.command = "explain";
  config.data = kSample;
  config.task = "binary";
  config.severity = 0.25;
  config.threshold = 3.5;
  config.limit = 4;
  auto back = RunConfig::FromJson(nlohmann::json::parse(config.ToJson().dump()));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ToJson(), config.ToJson());
  EXPECT_FALSE(
      RunConfig::FromJson(nlohmann::json::parse("{\"severty\": 1}")).ok());

  config.threshold.reset();
  {
    std::ofstream file(Path("config.json"));
    file << config.ToJson().dump(2);
  }
  const CliRun from_file = Cli({"explain", "--config", Path("config.json")});
  const CliRun from_flags = Cli({"explain", "--data", kSample, "--task", "binary",
                              "--severity", "0.25", "--limit", "4"});
  ASSERT_EQ(from_file.code, kExitOk) << from_file.err;
  EXPECT_EQ(from_file.out, from_flags.out);
  const CliRun overridden = Cli({"explain", "--config", Path("config.json"),
                              "--limit", "2"});
  EXPECT_EQ(JsonLines(overridden.out).size(), 2u);
}

TEST_F(CliTest, BenchReportsSpeedup) {
  const std::string prefix = Path("report");
  const CliRun run = Cli({"bench", "--synthetic", "binary", "--n", "300",
                       "--max-test", "20", "--runs", "2", "--out", prefix});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  EXPECT_NE(run.out.find("speedup (baseline mean / fast mean): "),
            std::string::npos)
      << run.out;
  auto report = ReportFromJson(nlohmann::json::parse(ReadFile(prefix + ".json")));
  ASSERT_TRUE(report.ok()) << report.status();
  ASSERT_EQ(report->records.size(), 2u);
  EXPECT_EQ(report->records[0].explainer, "fast");
  EXPECT_EQ(report->records[1].explainer, "baseline");
  EXPECT_EQ(ReadFile(prefix + ".csv"), ReportToCsv(*report));
}

TEST_F(CliTest, ExternalScoresWithoutPerturbedTablesFails) {
  const std::string scores = Path("scores.csv");
  {
    std::ofstream out(scores);
    out << "row,s0,s1\n";
    for (int i = 0; i < 400; ++i) out << i << ",0.5,0.5\n";
  }
  const CliRun run = Cli({"explain", "--data", kSample, "--task", "binary",
                       "--model", "external:" + scores});
  EXPECT_EQ(run.code, kExitConfig);
  EXPECT_NE(run.err.find("perturbed"), std::string::npos) << run.err;
}

TEST_F(CliTest, PerturbAndGenerate) {
  const CliRun gen = Cli({"generate", "--synthetic", "mixed", "--n", "40"});
  ASSERT_EQ(gen.code, kExitOk);
  EXPECT_EQ(gen.out.substr(0, gen.out.find('\n')), "x1,x2,x3,color,y");
  EXPECT_EQ(Cli({"generate", "--synthetic", "nope"}).code, kExitConfig);

  const CliRun perturb = Cli({"perturb", "--data", kSample, "--task", "binary",
                           "--scale-factor", "2"});
  ASSERT_EQ(perturb.code, kExitOk) << perturb.err;
  std::istringstream in(perturb.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "feature,row,x1,x2,x3,color");
  size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4u * 2 * 100);
}

}  // namespace
}  // namespace fastcal
