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

#ifndef GLS_CLI_COMMANDS_HPP_
#define GLS_CLI_COMMANDS_HPP_

// The glsctl subcommands. Each is a pure function of the configuration and
// its input files and writes its outputs under cfg.out_dir.

#include <iosfwd>
#include <string>
#include <vector>

#include "gls/cli/config.hpp"

namespace gls::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitDivergence = 3,
  kExitBoundViolation = 4,
};

struct ExperimentData {
  ShiftScenario scenario;
  SampleSet source;
  SampleSet target;
};

// Scenario from inputs.scenario or the scenario section; samples from
// inputs.source / inputs.target or drawn with seeds derived from `seed`,
// then subsampled at `rate` per the sampling config.
ExperimentData load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed,
                                double rate);

// Seed handed to train() for a run with top-level seed `seed`.
std::uint64_t train_seed(std::uint64_t seed);

int cmd_gen(const ExperimentConfig& cfg, std::ostream& log);
int cmd_train(const ExperimentConfig& cfg, std::ostream& log);
int cmd_weights(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& log);

// Parses argv (program name first) and dispatches. Errors are reported on
// `err` and mapped to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace gls::cli

#endif  // GLS_CLI_COMMANDS_HPP_
