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

#include "gls/cli/config.hpp"

#include <set>

#include "gls/error.hpp"

namespace gls::cli {

namespace {

// Reads keys of one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ValidationError(name(key) + ": wrong type");
    }
  }

  const Json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string name(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ValidationError("unknown config key '" +
                              (path_.empty() ? it.key() : path_ + "." + it.key()) +
                              "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum, typename Parse>
void read_enum(Section& s, const char* key, Enum& out, Parse parse) {
  std::string name;
  if (!s.has(key)) return;
  s.read(key, name);
  try {
    out = parse(name);
  } catch (const ValidationError& e) {
    throw ValidationError(s.name(key) + ": " + e.what());
  }
}

void parse_scenario(const Json& j, ScenarioParams& p) {
  Section s(j, "scenario");
  s.read("num_classes", p.num_classes);
  s.read("dim", p.dim);
  s.read("shift", p.shift);
  s.read("seed", p.seed);
  s.read("variance", p.variance);
  read_enum(s, "directions", p.directions, shift_directions_from_string);
  if (p.num_classes < 1) throw ValidationError("scenario.num_classes must be >= 1");
  p.source_labels = DiscreteDistribution::uniform(p.num_classes);
  p.target_labels = DiscreteDistribution::uniform(p.num_classes);
  std::vector<double> v;
  if (s.has("source_labels")) {
    s.read("source_labels", v);
    p.source_labels = DiscreteDistribution(v);
  }
  if (s.has("target_labels")) {
    s.read("target_labels", v);
    p.target_labels = DiscreteDistribution(v);
  }
  s.finish();
}

void parse_samples(const Json& j, SampleConfig& c) {
  Section s(j, "samples");
  s.read("source", c.source);
  s.read("target", c.target);
  s.read("k1", c.k1);
  s.read("rate", c.rate);
  read_enum(s, "subsample_domain", c.subsample_domain, domain_tag_from_string);
  s.finish();
  if (c.source < 1 || c.target < 1) {
    throw ValidationError("samples.source and samples.target must be >= 1");
  }
  if (!(c.rate > 0.0 && c.rate <= 1.0)) {
    throw ValidationError("samples.rate must lie in (0, 1]");
  }
  if (c.k1 < 0) throw ValidationError("samples.k1 must be >= 0");
}

void parse_train(const Json& j, TrainConfig& t) {
  Section s(j, "train");
  read_enum(s, "framework", t.framework, framework_from_string);
  s.read("lambda_g", t.lambda_g);
  s.read("learning_rate", t.learning_rate);
  s.read("warmup_epochs", t.warmup_epochs);
  s.read("max_iters", t.max_iters);
  s.read("batch_size", t.batch_size);
  read_enum(s, "kernel", t.kernel, kernel_kind_from_string);
  s.read("bandwidth", t.bandwidth);
  read_enum(s, "weight_method", t.weight_method, weight_method_from_string);
  s.read("weight_smoothing", t.weight_smoothing);
  s.read("w_max", t.w_max);
  std::string cs;
  if (s.has("confusion_source")) {
    s.read("confusion_source", cs);
    if (cs == "live") {
      t.confusion_source = ConfusionSource::kLive;
    } else if (cs == "warmup_frozen") {
      t.confusion_source = ConfusionSource::kWarmupFrozen;
    } else {
      throw ValidationError("train.confusion_source must be live or warmup_frozen");
    }
  }
  read_enum(s, "conditional_weights", t.conditional_weighting,
            conditional_weighting_from_string);
  s.read("pseudo_label_threshold", t.pseudo_label_threshold);
  s.read("hidden", t.hidden);
  s.read("z_dim", t.z_dim);
  read_enum(s, "activation", t.activation, activation_from_string);
  s.read("loss_bound", t.loss_bound);
  s.finish();
  try {
    t.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("train.") + e.what());
  }
}

const std::set<std::string> kChecks = {"sufficiency", "necessity", "zhao",
                                       "bayes_gap", "impossibility"};

void parse_verify(const Json& j, VerifyConfig& v) {
  Section s(j, "verify");
  s.read("checks", v.checks);
  s.read("mc_samples", v.mc_samples);
  s.read("a", v.a);
  s.read("weights", v.weights);
  s.read("loss_bound", v.loss_bound);
  s.read("tolerance", v.tolerance);
  s.finish();
  for (const auto& c : v.checks) {
    if (!kChecks.count(c)) throw ValidationError("verify.checks: unknown check '" + c + "'");
  }
  if (v.mc_samples < 2) throw ValidationError("verify.mc_samples must be >= 2");
  if (!(v.a > 0.0 && v.a < 1.0)) throw ValidationError("verify.a must lie in (0, 1)");
  if (!(v.loss_bound >= 1.0)) throw ValidationError("verify.loss_bound must be >= 1");
  if (!(v.tolerance >= 0.0)) throw ValidationError("verify.tolerance must be >= 0");
}

void parse_compare(const Json& j, CompareConfig& c) {
  Section s(j, "compare");
  s.read("seeds", c.seeds);
  if (s.has("frameworks")) {
    std::vector<std::string> names;
    s.read("frameworks", names);
    c.frameworks.clear();
    for (const auto& n : names) c.frameworks.push_back(framework_from_string(n));
  }
  s.read("rates", c.rates);
  s.read("threads", c.threads);
  s.finish();
  if (c.seeds.empty()) throw ValidationError("compare.seeds must not be empty");
  if (c.frameworks.empty()) throw ValidationError("compare.frameworks must not be empty");
  for (double r : c.rates) {
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("compare.rates must lie in (0, 1]");
  }
  if (c.threads < 1) throw ValidationError("compare.threads must be >= 1");
}

void parse_inputs(const Json& j, InputPaths& p) {
  Section s(j, "inputs");
  s.read("scenario", p.scenario);
  s.read("source", p.source);
  s.read("target", p.target);
  s.read("model", p.model);
  s.finish();
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig cfg;
  Section s(doc, "");
  s.read("seed", cfg.seed);
  s.read("out_dir", cfg.out_dir);
  parse_scenario(s.has("scenario") ? s.sub("scenario") : Json::object(),
                 cfg.scenario);
  if (s.has("samples")) parse_samples(s.sub("samples"), cfg.samples);
  if (s.has("train")) parse_train(s.sub("train"), cfg.train);
  if (s.has("verify")) parse_verify(s.sub("verify"), cfg.verify);
  if (s.has("compare")) parse_compare(s.sub("compare"), cfg.compare);
  if (s.has("inputs")) parse_inputs(s.sub("inputs"), cfg.inputs);
  s.finish();
  if (cfg.scenario.source_labels.size() != cfg.scenario.num_classes ||
      cfg.scenario.target_labels.size() != cfg.scenario.num_classes) {
    throw ValidationError("scenario label distributions must have num_classes entries");
  }
  if (cfg.samples.k1 > cfg.scenario.num_classes) {
    throw ValidationError("samples.k1 exceeds scenario.num_classes");
  }
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> frameworks;
  for (Framework f : cfg.compare.frameworks) frameworks.push_back(to_string(f));
  const TrainConfig& t = cfg.train;
  Json scenario = gls::to_json(cfg.scenario);
  return {
      {"seed", cfg.seed},
      {"out_dir", cfg.out_dir},
      {"scenario", scenario},
      {"samples",
       {{"source", cfg.samples.source},
        {"target", cfg.samples.target},
        {"k1", cfg.samples.k1},
        {"rate", cfg.samples.rate},
        {"subsample_domain", to_string(cfg.samples.subsample_domain)}}},
      {"train",
       {{"framework", to_string(t.framework)},
        {"lambda_g", t.lambda_g},
        {"learning_rate", t.learning_rate},
        {"warmup_epochs", t.warmup_epochs},
        {"max_iters", t.max_iters},
        {"batch_size", t.batch_size},
        {"kernel", to_string(t.kernel)},
        {"bandwidth", t.bandwidth},
        {"weight_method", to_string(t.weight_method)},
        {"weight_smoothing", t.weight_smoothing},
        {"w_max", t.w_max},
        {"confusion_source", t.confusion_source == ConfusionSource::kLive
                                 ? "live"
                                 : "warmup_frozen"},
        {"conditional_weights", to_string(t.conditional_weighting)},
        {"pseudo_label_threshold", t.pseudo_label_threshold},
        {"hidden", t.hidden},
        {"z_dim", t.z_dim},
        {"activation", to_string(t.activation)},
        {"loss_bound", t.loss_bound}}},
      {"verify",
       {{"checks", cfg.verify.checks},
        {"mc_samples", cfg.verify.mc_samples},
        {"a", cfg.verify.a},
        {"weights", cfg.verify.weights},
        {"loss_bound", cfg.verify.loss_bound},
        {"tolerance", cfg.verify.tolerance}}},
      {"compare",
       {{"seeds", cfg.compare.seeds},
        {"frameworks", frameworks},
        {"rates", cfg.compare.rates},
        {"threads", cfg.compare.threads}}},
      {"inputs",
       {{"scenario", cfg.inputs.scenario},
        {"source", cfg.inputs.source},
        {"target", cfg.inputs.target},
        {"model", cfg.inputs.model}}}};
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ValidationError("--set: empty key segment in '" + key + "'");
    if (!node->is_object()) throw ValidationError("--set: '" + key + "' is not an object path");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides,
                             const std::optional<std::uint64_t>& seed,
                             const std::optional<std::string>& out_dir) {
  Json doc = path ? read_json_file(*path) : Json::object();
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed) doc["seed"] = *seed;
  if (out_dir) doc["out_dir"] = *out_dir;
  return parse_config(doc);
}

}  // namespace gls::cli
