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

#include "gls/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gls/bounds.hpp"
#include "gls/dataset_io.hpp"
#include "gls/error.hpp"
#include "gls/random.hpp"

namespace gls::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t derived_seed(std::uint64_t seed, const char* purpose) {
  return Rng(seed).child(purpose).next_u64();
}

std::string out_path(const ExperimentConfig& cfg, const char* name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

template <typename Writer>
void write_stream_file(const std::string& path, Writer&& write) {
  std::ostringstream ss;
  write(ss);
  write_text_file(path, ss.str());
}

TrainConfig train_config_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.seed = train_seed(seed);
  return t;
}

}  // namespace

std::uint64_t train_seed(std::uint64_t seed) { return derived_seed(seed, "train"); }

ExperimentData load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed,
                                double rate) {
  ExperimentData d;
  d.scenario = cfg.inputs.scenario.empty()
                   ? make_scenario(cfg.scenario)
                   : scenario_from_json(read_json_file(cfg.inputs.scenario));
  const int k = d.scenario.source.num_classes();
  d.source = cfg.inputs.source.empty()
                 ? sample(d.scenario.source, cfg.samples.source,
                          derived_seed(seed, "source"), DomainTag::kSource)
                 : read_csv_file(cfg.inputs.source, k);
  d.target = cfg.inputs.target.empty()
                 ? sample(d.scenario.target, cfg.samples.target,
                          derived_seed(seed, "target"), DomainTag::kTarget)
                 : read_csv_file(cfg.inputs.target, k);
  if (cfg.samples.k1 > 0 && rate < 1.0) {
    SampleSet& s = cfg.samples.subsample_domain == DomainTag::kSource ? d.source
                                                                      : d.target;
    s = subsample_protocol(s, cfg.samples.k1, rate,
                           derived_seed(seed, "subsample"));
  }
  return d;
}

int cmd_gen(const ExperimentConfig& cfg, std::ostream& log) {
  const ExperimentData d = load_or_generate(cfg, cfg.seed, cfg.samples.rate);
  write_json_file(out_path(cfg, "scenario.json"), to_json(d.scenario));
  write_csv_file(out_path(cfg, "source.csv"), d.source);
  write_csv_file(out_path(cfg, "target.csv"), d.target);
  log << "d_TV(P_Y,Q_Y) = "
      << format_float9(tv_distance(d.scenario.source.label_dist,
                                   d.scenario.target.label_dist))
      << " (sampled: "
      << format_float9(tv_distance(d.source.label_frequencies(),
                                   d.target.label_frequencies()))
      << ")\n";
  log << "source " << d.source.size() << " rows, target " << d.target.size()
      << " rows -> " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const ExperimentData d = load_or_generate(cfg, cfg.seed, cfg.samples.rate);
  const TrainConfig t = train_config_for(cfg, cfg.seed);
  try {
    const TrainResult r = train(d.source, d.target, t);
    write_json_file(out_path(cfg, "model.json"), to_json(r.model));
    write_json_file(out_path(cfg, "weights.json"), to_json(r.weights));
    write_stream_file(out_path(cfg, "trace.csv"),
                      [&](std::ostream& o) { write_trace_csv(o, r.trace); });
    write_json_file(out_path(cfg, "trace.json"), to_json(r.trace));
    const TrainTraceRow& last = r.trace.rows.back();
    log << "framework " << to_string(t.framework) << ": " << r.trace.rows.size()
        << " epochs, source acc " << format_float9(last.src_acc)
        << ", target acc " << format_float9(last.tgt_acc) << ", tv_label "
        << format_float9(last.tv_label) << "\n";
    return kExitOk;
  } catch (const TrainingDiverged& e) {
    write_stream_file(out_path(cfg, "trace.csv"),
                      [&](std::ostream& o) { write_trace_csv(o, e.trace()); });
    throw;
  }
}

int cmd_weights(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.inputs.source.empty() || cfg.inputs.target.empty()) {
    throw ValidationError(
        "weights: inputs.source and inputs.target (CSV with a pseudo column) "
        "are required");
  }
  const SampleSet source = read_csv_file(cfg.inputs.source);
  const SampleSet target = read_csv_file(cfg.inputs.target);
  if (!source.pseudo_labels || !target.pseudo_labels) {
    throw ValidationError("weights: both CSV files need a pseudo column");
  }
  const int k = std::max(source.num_classes, target.num_classes);
  const ImportanceWeights w = bbse_solve(
      pred_marginal(*target.pseudo_labels, k),
      confusion_plugin(*source.pseudo_labels, source.labels, k),
      DiscreteDistribution::normalized(
          [&] {
            std::vector<double> c(k, 0.0);
            for (int y : source.labels) c[y] += 1.0;
            return c;
          }()),
      cfg.train.weight_method);
  write_json_file(out_path(cfg, "weights.json"), to_json(w));
  log << "w =";
  for (double v : w.w) log << ' ' << format_float9(v);
  log << " (" << w.method << ", kkt " << format_float9(w.kkt_residual) << ")\n";
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log) {
  const ShiftScenario scenario =
      cfg.inputs.scenario.empty()
          ? make_scenario(cfg.scenario)
          : scenario_from_json(read_json_file(cfg.inputs.scenario));
  const VerifyConfig& v = cfg.verify;
  const int k = scenario.source.num_classes();
  const int dim = scenario.source.dim();

  std::vector<double> w;
  if (v.weights == "oracle") {
    w = oracle_weights(scenario.source.label_dist, scenario.target.label_dist).w;
  } else if (v.weights == "ones") {
    w.assign(k, 1.0);
  } else {
    w = weights_from_json(read_json_file(v.weights)).w;
  }
  if (static_cast<int>(w.size()) != k) {
    throw ValidationError("verify: weight vector does not match the class count");
  }

  ProbabilityFn h;
  std::vector<double> model_digest;
  if (!cfg.inputs.model.empty()) {
    const ModelParams m = model_from_json(read_json_file(cfg.inputs.model));
    if (m.input_dim() != dim || m.num_classes() != k) {
      throw ValidationError("verify: model does not match the scenario shape");
    }
    h = probabilities_of(m);
    const Eigen::VectorXd flat = m.flatten();
    model_digest.assign(flat.data(), flat.data() + flat.size());
  } else {
    h = probabilities_of(bayes_classifier(scenario.source.reweighted(w)));
  }

  std::vector<std::string> checks = v.checks;
  if (checks.empty()) {
    checks = {"sufficiency", "necessity", "zhao", "bayes_gap"};
    if (dim == 1) checks.push_back("impossibility");
  }
  const MonteCarloConfig mc{v.mc_samples, derived_seed(cfg.seed, "verify")};
  const AffineMap identity = AffineMap::identity(dim);
  std::vector<BoundReport> reports;
  for (const auto& c : checks) {
    if (c == "sufficiency") {
      reports.push_back(sufficiency_check(scenario, h, w, v.loss_bound, mc,
                                          model_digest));
    } else if (c == "necessity") {
      reports.push_back(necessity_check(scenario, w, v.a, identity, v.tolerance));
    } else if (c == "zhao") {
      reports.push_back(
          zhao_lower_bound_check(scenario, h, identity, mc, model_digest));
    } else if (c == "bayes_gap") {
      reports.push_back(bayes_gap_check(scenario, w, v.loss_bound, identity));
    } else if (c == "impossibility") {
      const ImpossibilityReport probe = impossibility_probe(scenario);
      reports.push_back(probe.as_bound(0.05, inputs_digest(scenario, w)));
    }
  }

  write_stream_file(out_path(cfg, "bounds.jsonl"),
                    [&](std::ostream& o) { write_json_lines(o, reports); });
  write_stream_file(out_path(cfg, "bounds_summary.csv"), [&](std::ostream& o) {
    write_bound_summary_csv(o, reports);
  });
  bool violated = false;
  for (const auto& r : reports) {
    log << r.name << ": lhs " << format_float9(r.lhs) << ", rhs "
        << format_float9(r.rhs) << ", slack " << format_float9(r.slack) << " -> "
        << to_string(r.status) << "\n";
    violated |= r.status == BoundStatus::kViolated;
  }
  return violated ? kExitBoundViolation : kExitOk;
}

namespace {

struct CompareCell {
  Framework framework;
  double rate;
  std::uint64_t seed;
  double target_acc;
};

std::vector<CompareCell> compare_seed(const ExperimentConfig& cfg,
                                      std::uint64_t seed,
                                      const std::vector<double>& rates) {
  std::vector<CompareCell> cells;
  for (double rate : rates) {
    const ExperimentData d = load_or_generate(cfg, seed, rate);
    for (Framework f : cfg.compare.frameworks) {
      TrainConfig t = train_config_for(cfg, seed);
      t.framework = f;
      const TrainResult r = train(d.source, d.target, t);
      cells.push_back({f, rate, seed, r.trace.rows.back().tgt_acc});
    }
  }
  return cells;
}

}  // namespace

int cmd_compare(const ExperimentConfig& cfg, std::ostream& log) {
  const std::vector<double> rates =
      cfg.compare.rates.empty() ? std::vector<double>{cfg.samples.rate}
                                : cfg.compare.rates;
  const auto& seeds = cfg.compare.seeds;
  std::vector<std::vector<CompareCell>> per_seed(seeds.size());
  const std::size_t threads = static_cast<std::size_t>(cfg.compare.threads);
  for (std::size_t start = 0; start < seeds.size(); start += threads) {
    std::vector<std::future<std::vector<CompareCell>>> jobs;
    const std::size_t end = std::min(seeds.size(), start + threads);
    for (std::size_t i = start; i < end; ++i) {
      jobs.push_back(std::async(threads > 1 ? std::launch::async
                                            : std::launch::deferred,
                                compare_seed, std::cref(cfg), seeds[i],
                                std::cref(rates)));
    }
    for (std::size_t i = start; i < end; ++i) per_seed[i] = jobs[i - start].get();
  }

  std::ostringstream out;
  out << "framework,rate,seed,target_acc,ci95\n";
  for (const auto& cells : per_seed) {
    for (const auto& c : cells) {
      out << to_string(c.framework) << ',' << format_float9(c.rate) << ','
          << c.seed << ',' << format_float9(c.target_acc) << ",\n";
    }
  }
  for (double rate : rates) {
    for (Framework f : cfg.compare.frameworks) {
      std::vector<double> acc;
      for (const auto& cells : per_seed) {
        for (const auto& c : cells) {
          if (c.framework == f && c.rate == rate) acc.push_back(c.target_acc);
        }
      }
      double mean = 0.0;
      for (double a : acc) mean += a;
      mean /= acc.size();
      double var = 0.0;
      for (double a : acc) var += (a - mean) * (a - mean);
      const double sd = acc.size() > 1 ? std::sqrt(var / (acc.size() - 1)) : 0.0;
      const double ci = 1.96 * sd / std::sqrt(static_cast<double>(acc.size()));
      out << to_string(f) << ',' << format_float9(rate) << ",mean,"
          << format_float9(mean) << ',' << format_float9(ci) << '\n';
      log << to_string(f) << " rate " << format_float9(rate) << ": mean "
          << format_float9(mean) << " +/- " << format_float9(ci) << "\n";
    }
  }
  write_text_file(out_path(cfg, "compare.csv"), out.str());
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"glsctl: label and conditional shift experiments"};
  app.require_subcommand(1);
  std::optional<std::string> config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const ExperimentConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"gen", "generate a scenario and source/target samples", cmd_gen},
      {"train", "train a model and write model, weights and trace", cmd_train},
      {"weights", "estimate importance weights from prediction CSVs",
       cmd_weights},
      {"verify", "check generalization bounds on the scenario", cmd_verify},
      {"compare", "compare frameworks across seeds", cmd_compare},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "experiment config JSON");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--seed", seed, "top-level seed");
    sub->add_option("--set", overrides, "override, dotted.key=value")
        ->take_all();
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    const ExperimentConfig cfg =
        load_config(config_path, overrides, seed, out_dir);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].fn(cfg, out);
    }
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ClassAbsentError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace gls::cli
