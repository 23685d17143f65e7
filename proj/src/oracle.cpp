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

#include "gls/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gls/error.hpp"

namespace gls {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// Per-class log(prior_k · f_k) at every node, indexed [k][node].
std::vector<std::vector<double>> weighted_log_terms(const DomainSpec& spec,
                                                    const QuadratureGrid& grid) {
  std::vector<std::vector<double>> terms(spec.num_classes());
  for (int k = 0; k < spec.num_classes(); ++k) {
    const double lp = safe_log(spec.label_dist[k]);
    if (lp == kNegInf) {
      terms[k].assign(static_cast<std::size_t>(grid.size()), kNegInf);
      continue;
    }
    terms[k] = spec.class_conditionals[k].evaluate_log(grid);
    for (double& v : terms[k]) v += lp;
  }
  return terms;
}

void require_grid_dim(const QuadratureGrid& grid, int dim) {
  if (grid.dim() != dim) {
    throw ValidationError("oracle: grid dimension " + std::to_string(grid.dim()) +
                          " does not match data dimension " +
                          std::to_string(dim));
  }
}

QuadratureGrid spec_grid(const DomainSpec& spec) {
  std::vector<const MixtureDensity*> parts;
  for (const auto& c : spec.class_conditionals) parts.push_back(&c);
  return covering_grid(parts);
}

}  // namespace

// --- Bayes classifier / error ------------------------------------------------

BayesClassifier::BayesClassifier(DomainSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (int k = 0; k < spec_.num_classes(); ++k) {
    log_priors_.push_back(safe_log(spec_.label_dist[k]));
  }
}

int BayesClassifier::operator()(const Eigen::VectorXd& x) const {
  int best = 0;
  double best_score = kNegInf;
  for (int k = 0; k < spec_.num_classes(); ++k) {
    if (log_priors_[k] == kNegInf) continue;
    const double s = log_priors_[k] + spec_.class_conditionals[k].log_density(x);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

std::vector<int> BayesClassifier::predict(const Eigen::MatrixXd& x) const {
  std::vector<int> out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = (*this)(x.row(i).transpose());
  }
  return out;
}

BayesClassifier bayes_classifier(const DomainSpec& spec) {
  return BayesClassifier(spec);
}

QuadratureResult bayes_error(const DomainSpec& spec, const QuadratureGrid& grid) {
  spec.validate();
  require_grid_dim(grid, spec.dim());
  const auto terms = weighted_log_terms(spec, grid);
  const std::size_t n = static_cast<std::size_t>(grid.size());
  std::vector<double> values(n, 0.0), mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < terms.size(); ++k) {
      if (terms[k][i] > terms[best][i]) best = k;
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const double v = std::exp(terms[k][i]);
      mass[i] += v;
      if (k != best) values[i] += v;
    }
  }
  check_grid_mass(grid, mass, "the domain marginal");
  QuadratureResult r = integrate(grid, values);
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

QuadratureResult bayes_error(const DomainSpec& spec) {
  return bayes_error(spec, spec_grid(spec));
}

// --- true risk -----------------------------------------------------------------

ProbabilityFn probabilities_of(const ModelParams& m) {
  return [m](const Eigen::MatrixXd& x) { return forward(m, x).probs; };
}

ProbabilityFn probabilities_of(const BayesClassifier& f) {
  return [f](const Eigen::MatrixXd& x) {
    const std::vector<int> pred = f.predict(x);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), f.spec().num_classes());
    for (std::size_t i = 0; i < pred.size(); ++i) p(i, pred[i]) = 1.0;
    return p;
  };
}

ProbabilityFn constant_classifier(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw ValidationError("constant classifier: label out of range");
  }
  return [label, num_classes](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), num_classes);
    p.col(label).setOnes();
    return p;
  };
}

ProbabilityFn compose(const ProbabilityFn& inner, const AffineMap& g) {
  return [inner, g](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = x * g.linear.transpose();
    z.rowwise() += g.offset.transpose();
    return inner(z);
  };
}

RiskEstimate true_risk(const DomainSpec& spec, const ProbabilityFn& h,
                       LossKind loss, const MonteCarloConfig& mc) {
  if (mc.samples < 2) throw ValidationError("true risk: need >= 2 samples");
  const SampleSet s = sample(spec, mc.samples, mc.seed);
  const Eigen::MatrixXd probs = h(s.features);
  if (probs.rows() != s.features.rows() || probs.cols() != spec.num_classes()) {
    throw ValidationError("true risk: classifier output has wrong shape");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const int y = s.labels[i];
    double l;
    if (loss == LossKind::kZeroOne) {
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < probs.cols(); ++k) {
        if (probs(i, k) > probs(i, best)) best = k;
      }
      l = best == y ? 0.0 : 1.0;
    } else {
      l = -std::log(std::max(probs(i, y), 1e-12));
    }
    sum += l;
    sum_sq += l * l;
  }
  const double n = s.size();
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

RiskEstimate true_risk(const DomainSpec& spec, const ModelParams& m,
                       LossKind loss, const MonteCarloConfig& mc) {
  if (m.input_dim() != spec.dim() || m.num_classes() != spec.num_classes()) {
    throw ValidationError("true risk: model does not match scenario shape");
  }
  return true_risk(spec, probabilities_of(m), loss, mc);
}

// --- representation-space quantities ----------------------------------------

ZSpaceScenario z_space(const ShiftScenario& scenario,
                       const std::vector<double>& w, const AffineMap& g) {
  return {scenario.source.reweighted(w).pushforward(g),
          scenario.target.pushforward(g)};
}

QuadratureGrid scenario_grid(const ZSpaceScenario& z, int points) {
  std::vector<const MixtureDensity*> parts;
  for (const auto& c : z.source_w.class_conditionals) parts.push_back(&c);
  for (const auto& c : z.target.class_conditionals) parts.push_back(&c);
  return covering_grid(parts, points);
}

QuadratureResult posterior_disagreement(const ShiftScenario& scenario,
                                        const std::vector<double>& w,
                                        const AffineMap& g,
                                        const QuadratureGrid& grid) {
  const ZSpaceScenario z = z_space(scenario, w, g);
  require_grid_dim(grid, z.target.dim());
  const auto lp = weighted_log_terms(z.source_w, grid);
  const auto lq = weighted_log_terms(z.target, grid);
  const std::size_t n = static_cast<std::size_t>(grid.size());
  const std::size_t k = lp.size();
  std::vector<double> values(n), mp(n), mq(n);
  std::vector<double> a(k), b(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      a[c] = lp[c][i];
      b[c] = lq[c][i];
    }
    const double la = log_sum_exp(a);
    const double lb = log_sum_exp(b);
    mp[i] = std::exp(la);
    mq[i] = std::exp(lb);
    double js = 0.0;
    if (la != kNegInf && lb != kNegInf) {
      for (std::size_t c = 0; c < k; ++c) {
        js += generalized_js_point(std::exp(a[c] - la), std::exp(b[c] - lb), 0.5);
      }
    }
    values[i] = std::exp(std::max(la, lb)) * std::max(js, 0.0);
  }
  check_grid_mass(grid, mp, "the reweighted source marginal");
  check_grid_mass(grid, mq, "the target marginal");
  return integrate(grid, values);
}

QuadratureResult posterior_disagreement(const ShiftScenario& scenario,
                                        const std::vector<double>& w,
                                        const AffineMap& g) {
  return posterior_disagreement(scenario, w, g,
                                scenario_grid(z_space(scenario, w, g)));
}

namespace {

void check_mixing(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    throw ValidationError("domain mass a must lie in (0, 1)");
  }
}

}  // namespace

QuadratureResult conditional_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g,
                                         const QuadratureGrid& grid) {
  check_mixing(a);
  const ZSpaceScenario z = z_space(scenario, w, g);
  QuadratureResult total;
  for (int y = 0; y < z.target.num_classes(); ++y) {
    const double r = (1.0 - a) * z.source_w.label_dist[y] + a * z.target.label_dist[y];
    if (r == 0.0) continue;
    const QuadratureResult js =
        js_continuous(z.source_w.class_conditionals[y],
                      z.target.class_conditionals[y], a, grid);
    total.value += r * js.value;
    total.error += r * js.error;
  }
  return total;
}

QuadratureResult conditional_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g) {
  return conditional_mutual_info(scenario, w, a, g,
                                 scenario_grid(z_space(scenario, w, g)));
}

MarginalDivergences marginal_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g,
                                         const QuadratureGrid& grid) {
  check_mixing(a);
  const ZSpaceScenario z = z_space(scenario, w, g);
  MarginalDivergences out;
  out.label_term = generalized_js(z.source_w.label_dist, z.target.label_dist, a);
  out.z_term = js_continuous(z.source_w.marginal(), z.target.marginal(), a, grid);
  return out;
}

MarginalDivergences marginal_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g) {
  return marginal_mutual_info(scenario, w, a, g,
                              scenario_grid(z_space(scenario, w, g)));
}

QuadratureResult joint_tv(const ShiftScenario& scenario,
                          const std::vector<double>& w, const AffineMap& g,
                          const QuadratureGrid& grid) {
  const ZSpaceScenario z = z_space(scenario, w, g);
  require_grid_dim(grid, z.target.dim());
  const auto lp = weighted_log_terms(z.source_w, grid);
  const auto lq = weighted_log_terms(z.target, grid);
  const std::size_t n = static_cast<std::size_t>(grid.size());
  std::vector<double> mp(n, 0.0), mq(n, 0.0), diff(n);
  QuadratureResult total;
  for (std::size_t y = 0; y < lp.size(); ++y) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = std::exp(lp[y][i]);
      const double v = std::exp(lq[y][i]);
      mp[i] += u;
      mq[i] += v;
      diff[i] = u - v;
    }
    const QuadratureResult r = integrate_abs(grid, diff);
    total.value += 0.5 * r.value;
    total.error += 0.5 * r.error;
  }
  check_grid_mass(grid, mp, "the reweighted source joint");
  check_grid_mass(grid, mq, "the target joint");
  return total;
}

QuadratureResult joint_tv(const ShiftScenario& scenario,
                          const std::vector<double>& w, const AffineMap& g) {
  return joint_tv(scenario, w, g, scenario_grid(z_space(scenario, w, g)));
}

}  // namespace gls
