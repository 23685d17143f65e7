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

#include "gls/serialization.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gls/dataset_io.hpp"
#include "gls/error.hpp"

namespace gls {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(std::string("missing JSON field '") + key + "'");
  }
  return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("JSON field '") + key + "': " + e.what());
  }
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ValidationError(std::string(what) + ": expected a nested array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ValidationError(std::string(what) + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

Json to_json(const DiscreteDistribution& d) { return d.probs(); }

DiscreteDistribution distribution_from_json(const Json& j) {
  return DiscreteDistribution(j.get<std::vector<double>>());
}

Json to_json(const MixtureDensity& m) {
  Json comps = Json::array();
  for (const auto& c : m.components()) {
    comps.push_back({{"weight", c.weight},
                     {"mean", vector_to_json(c.mean)},
                     {"covariance", matrix_to_json(c.covariance)}});
  }
  return {{"components", comps}};
}

MixtureDensity mixture_from_json(const Json& j) {
  std::vector<GaussianComponent> comps;
  for (const Json& c : field(j, "components")) {
    comps.push_back({get<double>(c, "weight"), vector_from_json(field(c, "mean")),
                     matrix_from_json(field(c, "covariance"), "covariance")});
  }
  return MixtureDensity(std::move(comps));
}

Json to_json(const DomainSpec& d) {
  Json conds = Json::array();
  for (const auto& c : d.class_conditionals) conds.push_back(to_json(c));
  return {{"label_dist", to_json(d.label_dist)}, {"class_conditionals", conds}};
}

DomainSpec domain_from_json(const Json& j) {
  DomainSpec d;
  d.label_dist = distribution_from_json(field(j, "label_dist"));
  for (const Json& c : field(j, "class_conditionals")) {
    d.class_conditionals.push_back(mixture_from_json(c));
  }
  d.validate();
  return d;
}

Json to_json(const ScenarioParams& p) {
  return {{"num_classes", p.num_classes},
          {"dim", p.dim},
          {"shift", p.shift},
          {"source_labels", to_json(p.source_labels)},
          {"target_labels", to_json(p.target_labels)},
          {"seed", p.seed},
          {"variance", p.variance},
          {"directions", to_string(p.directions)}};
}

ScenarioParams scenario_params_from_json(const Json& j) {
  ScenarioParams p;
  p.num_classes = get<int>(j, "num_classes");
  p.dim = get<int>(j, "dim");
  p.shift = get<double>(j, "shift");
  p.source_labels = distribution_from_json(field(j, "source_labels"));
  p.target_labels = distribution_from_json(field(j, "target_labels"));
  p.seed = get<std::uint64_t>(j, "seed");
  p.variance = get<double>(j, "variance");
  p.directions = shift_directions_from_string(get<std::string>(j, "directions"));
  return p;
}

Json to_json(const ShiftScenario& s) {
  return {{"params", to_json(s.params)},
          {"source", to_json(s.source)},
          {"target", to_json(s.target)},
          {"directions", matrix_to_json(s.directions)}};
}

ShiftScenario scenario_from_json(const Json& j) {
  ShiftScenario s;
  s.params = scenario_params_from_json(field(j, "params"));
  s.source = domain_from_json(field(j, "source"));
  s.target = domain_from_json(field(j, "target"));
  s.directions = matrix_from_json(field(j, "directions"), "directions");
  return s;
}

Json to_json(const ImportanceWeights& w) {
  return {{"w", w.w},
          {"p_y", to_json(w.reference_labels)},
          {"method", w.method},
          {"kkt_residual", w.kkt_residual},
          {"iterations", w.iterations}};
}

ImportanceWeights weights_from_json(const Json& j) {
  ImportanceWeights w;
  w.w = get<std::vector<double>>(j, "w");
  w.reference_labels = distribution_from_json(field(j, "p_y"));
  w.method = get<std::string>(j, "method");
  w.kkt_residual = get<double>(j, "kkt_residual");
  w.iterations = j.contains("iterations") ? get<int>(j, "iterations") : 0;
  w.validate();
  return w;
}

Json to_json(const ModelParams& m) {
  Json layers = Json::array();
  for (const auto& l : m.g_layers) {
    layers.push_back({{"activation", to_string(l.activation)},
                      {"weight", matrix_to_json(l.weight)},
                      {"bias", vector_to_json(l.bias)}});
  }
  Json j = {{"g_layers", layers},
            {"h_weight", matrix_to_json(m.h_weight)},
            {"h_bias", vector_to_json(m.h_bias)}};
  if (m.input_mean.size() > 0) {
    j["input_mean"] = vector_to_json(m.input_mean);
    j["input_scale"] = vector_to_json(m.input_scale);
  }
  return j;
}

ModelParams model_from_json(const Json& j) {
  ModelParams m;
  for (const Json& l : field(j, "g_layers")) {
    m.g_layers.push_back(
        {matrix_from_json(field(l, "weight"), "weight"),
         vector_from_json(field(l, "bias")),
         activation_from_string(get<std::string>(l, "activation"))});
  }
  m.h_weight = matrix_from_json(field(j, "h_weight"), "h_weight");
  m.h_bias = vector_from_json(field(j, "h_bias"));
  if (j.contains("input_mean") || j.contains("input_scale")) {
    m.input_mean = vector_from_json(field(j, "input_mean"));
    m.input_scale = vector_from_json(field(j, "input_scale"));
  }
  m.validate();
  return m;
}

Json to_json(const TrainTrace& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"epoch", r.epoch},
                    {"warmup", r.warmup},
                    {"loss", r.loss},
                    {"src_acc", r.src_acc},
                    {"tgt_acc", r.tgt_acc},
                    {"tv_label", r.tv_label},
                    {"cond_disc", r.cond_disc},
                    {"dropped_classes", r.dropped_classes}});
  }
  return {{"warmup_epochs", t.warmup_epochs},
          {"bandwidth", t.bandwidth},
          {"weight_failures", t.weight_failures},
          {"dropped_class_steps", t.dropped_class_steps},
          {"rows", rows}};
}

TrainTrace trace_from_json(const Json& j) {
  TrainTrace t;
  t.warmup_epochs = get<int>(j, "warmup_epochs");
  t.bandwidth = get<double>(j, "bandwidth");
  t.weight_failures = get<int>(j, "weight_failures");
  t.dropped_class_steps = get<int>(j, "dropped_class_steps");
  for (const Json& r : field(j, "rows")) {
    TrainTraceRow row;
    row.epoch = get<int>(r, "epoch");
    row.warmup = get<bool>(r, "warmup");
    row.loss = get<double>(r, "loss");
    row.src_acc = get<double>(r, "src_acc");
    row.tgt_acc = get<double>(r, "tgt_acc");
    row.tv_label = get<double>(r, "tv_label");
    row.cond_disc = get<double>(r, "cond_disc");
    row.dropped_classes = get<int>(r, "dropped_classes");
    t.rows.push_back(row);
  }
  return t;
}

namespace {

// Traces of diverged runs can hold overflowed metrics; those are written as
// nan, inf or -inf.
std::string trace_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_float9(v);
}

}  // namespace

void write_trace_csv(std::ostream& out, const TrainTrace& t) {
  out << "epoch,loss,src_acc,tgt_acc,tv_label,cond_disc\n";
  for (const auto& r : t.rows) {
    out << r.epoch << ',' << trace_float(r.loss) << ','
        << trace_float(r.src_acc) << ',' << trace_float(r.tgt_acc) << ','
        << trace_float(r.tv_label) << ',' << trace_float(r.cond_disc) << '\n';
  }
}

Json to_json(const BoundReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back({{"name", t.name}, {"value", t.value}});
  return {{"name", r.name},
          {"kind", r.kind == BoundKind::kUpper ? "upper" : "lower"},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"tolerance", r.tolerance},
          {"holds", r.holds},
          {"status", to_string(r.status)},
          {"digest", r.digest},
          {"terms", terms}};
}

BoundReport bound_report_from_json(const Json& j) {
  BoundReport r;
  r.name = get<std::string>(j, "name");
  const std::string kind = get<std::string>(j, "kind");
  if (kind != "upper" && kind != "lower") {
    throw ValidationError("bound report: kind must be upper or lower");
  }
  r.kind = kind == "upper" ? BoundKind::kUpper : BoundKind::kLower;
  r.lhs = get<double>(j, "lhs");
  r.rhs = get<double>(j, "rhs");
  r.slack = get<double>(j, "slack");
  r.tolerance = get<double>(j, "tolerance");
  r.holds = get<bool>(j, "holds");
  const std::string status = get<std::string>(j, "status");
  if (status == "holds") {
    r.status = BoundStatus::kHolds;
  } else if (status == "violated") {
    r.status = BoundStatus::kViolated;
  } else if (status == "assumption-unmet") {
    r.status = BoundStatus::kAssumptionUnmet;
  } else {
    throw ValidationError("bound report: unknown status '" + status + "'");
  }
  r.digest = get<std::string>(j, "digest");
  for (const Json& t : field(j, "terms")) {
    r.terms.push_back({get<std::string>(t, "name"), get<double>(t, "value")});
  }
  return r;
}

void write_json_lines(std::ostream& out,
                      const std::vector<BoundReport>& reports) {
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

std::vector<BoundReport> read_json_lines(std::istream& in) {
  std::vector<BoundReport> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(bound_report_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ValidationError("json line " + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("json line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return out;
}

void write_bound_summary_csv(std::ostream& out,
                             const std::vector<BoundReport>& reports) {
  out << "name,lhs,rhs,slack,holds,status\n";
  for (const auto& r : reports) {
    out << r.name << ',' << format_float9(r.lhs) << ',' << format_float9(r.rhs)
        << ',' << format_float9(r.slack) << ',' << (r.holds ? "true" : "false")
        << ',' << to_string(r.status) << '\n';
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace gls
