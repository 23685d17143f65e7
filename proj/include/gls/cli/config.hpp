/*
 * Copyright 2026 The GLS Correction Authors.
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

#ifndef GLS_CLI_CONFIG_HPP_
#define GLS_CLI_CONFIG_HPP_

// ExperimentConfig: one JSON document holding the scenario, sampling,
// training, verification and comparison settings of a run.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gls/learner.hpp"
#include "gls/serialization.hpp"
#include "gls/shiftgen.hpp"

namespace gls::cli {

struct SampleConfig {
  int source = 2000;
  int target = 2000;
  // Class-subsampling protocol applied to `subsample_domain`.
  int k1 = 0;
  double rate = 1.0;
  DomainTag subsample_domain = DomainTag::kSource;
};

struct VerifyConfig {
  // Empty: sufficiency, necessity, zhao, bayes_gap, plus impossibility in 1-D.
  std::vector<std::string> checks;
  int mc_samples = 200000;
  double a = 0.5;
  // "oracle", "ones", or a weights JSON path.
  std::string weights = "oracle";
  double loss_bound = 1.0;
  double tolerance = 1e-4;
};

struct CompareConfig {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Framework> frameworks = {Framework::kLabelOnly,
                                       Framework::kCovariate,
                                       Framework::kConditionalOnly,
                                       Framework::kGls};
  std::vector<double> rates;  // empty: the sampling config's rate only
  int threads = 1;
};

struct InputPaths {
  std::string scenario;
  std::string source;
  std::string target;
  std::string model;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  ScenarioParams scenario;
  SampleConfig samples;
  TrainConfig train;
  VerifyConfig verify;
  CompareConfig compare;
  InputPaths inputs;
};

// Strict parse: unknown keys, wrong types and out-of-range values throw
// ValidationError naming the offending key.
ExperimentConfig parse_config(const Json& doc);
Json to_json(const ExperimentConfig& cfg);

// Applies "dotted.key=value" to a config document. The value is read as JSON
// when it parses, otherwise as a string.
void apply_override(Json& doc, const std::string& assignment);

ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides,
                             const std::optional<std::uint64_t>& seed,
                             const std::optional<std::string>& out_dir);

}  // namespace gls::cli

#endif  // GLS_CLI_CONFIG_HPP_
