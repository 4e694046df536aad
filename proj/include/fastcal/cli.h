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

#ifndef FASTCAL_CLI_H_
#define FASTCAL_CLI_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace fastcal {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Every user-facing parameter. Fields map one-to-one to long flags
// (underscores become dashes) and to keys of the --config JSON file.
struct RunConfig {
  std::string command;
  std::string data;
  // Synthetic generator name, used instead of --data by bench and generate.
  std::string synthetic;
  size_t n = 800;
  std::string target;
  // auto, binary, multiclass, regression or thresholded.
  std::string task = "auto";
  // knn:K or external:PATH.
  std::string model = "knn:10";
  std::string perturbed_scores;
  double train_frac = 0.5;
  double cal_frac = 0.25;
  std::string noise_type = "uniform";
  size_t scale_factor = 5;
  double severity = 0.5;
  std::string mode = "permute-noise";
  double low_percentile = 5;
  double high_percentile = 95;
  std::optional<double> threshold;
  std::string direction = "above";
  // fixed or random tau in the conformal predictive distribution.
  std::string tau = "fixed";
  // leave-one-out or in-sample scoring for the thresholded composite.
  std::string threshold_scoring = "leave-one-out";
  uint64_t seed = 42;
  std::string out;
  std::string explainer = "fast";
  bool plot = false;
  size_t jobs = 1;
  // 0 explains the whole test partition.
  size_t limit = 0;
  // bench
  std::string explainers = "fast,baseline";
  size_t runs = 5;
  bool grid = false;
  size_t max_test = 100;
  bool skip_stability = false;
  bool skip_robustness = false;

  nlohmann::ordered_json ToJson() const;
  static absl::StatusOr<RunConfig> FromJson(const nlohmann::json& json);
};

// Parses arguments (argv[0] is the program name) and runs the command.
// Explanations and reports go to `out` unless --out names a file; messages
// go to `err`. Returns one of the exit codes above.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

// Runs an already resolved configuration.
int RunCommand(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace fastcal

#endif  // FASTCAL_CLI_H_
