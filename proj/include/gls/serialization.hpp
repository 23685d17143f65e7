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

#ifndef GLS_SERIALIZATION_HPP_
#define GLS_SERIALIZATION_HPP_

// JSON and CSV forms of scenarios, weights, models, training traces and
// bound reports. Layouts are listed in docs/FORMATS.md.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gls/bounds.hpp"
#include "gls/learner.hpp"
#include "gls/shiftgen.hpp"
#include "gls/weights.hpp"

namespace gls {

using Json = nlohmann::json;

Json to_json(const DiscreteDistribution& d);
DiscreteDistribution distribution_from_json(const Json& j);

Json to_json(const MixtureDensity& m);
MixtureDensity mixture_from_json(const Json& j);

Json to_json(const DomainSpec& d);
DomainSpec domain_from_json(const Json& j);

Json to_json(const ScenarioParams& p);
ScenarioParams scenario_params_from_json(const Json& j);

Json to_json(const ShiftScenario& s);
ShiftScenario scenario_from_json(const Json& j);

Json to_json(const ImportanceWeights& w);
ImportanceWeights weights_from_json(const Json& j);

Json to_json(const ModelParams& m);
ModelParams model_from_json(const Json& j);

Json to_json(const TrainTrace& t);
TrainTrace trace_from_json(const Json& j);

void write_trace_csv(std::ostream& out, const TrainTrace& t);

Json to_json(const BoundReport& r);
BoundReport bound_report_from_json(const Json& j);

// One JSON document per line.
void write_json_lines(std::ostream& out, const std::vector<BoundReport>& reports);
std::vector<BoundReport> read_json_lines(std::istream& in);

// name,lhs,rhs,slack,holds,status
void write_bound_summary_csv(std::ostream& out,
                             const std::vector<BoundReport>& reports);

// File helpers. JSON is written with two-space indentation and a trailing
// newline.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gls

#endif  // GLS_SERIALIZATION_HPP_
