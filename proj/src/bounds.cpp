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

#include "gls/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "gls/divergences.hpp"
#include "gls/error.hpp"
#include "gls/random.hpp"

namespace gls {

std::string to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::kHolds:
      return "holds";
    case BoundStatus::kViolated:
      return "violated";
    case BoundStatus::kAssumptionUnmet:
      return "assumption-unmet";
  }
  return "unknown";
}

BoundReport make_report(std::string name, BoundKind kind, double lhs, double rhs,
                        double tolerance, std::string digest,
                        std::vector<BoundTerm> terms, bool assumption_met) {
  BoundReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = kind == BoundKind::kUpper ? rhs - lhs : lhs - rhs;
  r.tolerance = tolerance;
  r.holds = r.slack >= -tolerance;
  r.status = !assumption_met ? BoundStatus::kAssumptionUnmet
             : r.holds       ? BoundStatus::kHolds
                             : BoundStatus::kViolated;
  r.digest = std::move(digest);
  r.terms = std::move(terms);
  return r;
}

namespace {

class Digest {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h_ ^= (bits >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(const DomainSpec& d) {
    for (double p : d.label_dist.probs()) add(p);
    for (const auto& c : d.class_conditionals) {
      for (const auto& g : c.components()) {
        add(g.weight);
        for (Eigen::Index i = 0; i < g.mean.size(); ++i) add(g.mean[i]);
        for (Eigen::Index i = 0; i < g.covariance.size(); ++i) {
          add(g.covariance.data()[i]);
        }
      }
    }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::vector<double> flatten_model(const ModelParams& m) {
  const Eigen::VectorXd f = m.flatten();
  return std::vector<double>(f.data(), f.data() + f.size());
}

double expectation(const DiscreteDistribution& p, const std::vector<double>& v) {
  double s = 0.0;
  for (int y = 0; y < p.size(); ++y) s += p[y] * v[y];
  return s;
}

}  // namespace

std::string inputs_digest(const ShiftScenario& scenario,
                          const std::vector<double>& w,
                          const std::vector<double>& extra) {
  Digest d;
  d.add(scenario.source);
  d.add(scenario.target);
  for (double v : w) d.add(v);
  for (double v : extra) d.add(v);
  return d.hex();
}

// --- sufficiency ---------------------------------------------------------------

BoundReport sufficiency_check(const ShiftScenario& scenario,
                              const ProbabilityFn& h,
                              const std::vector<double>& w, double loss_bound,
                              const MonteCarloConfig& mc,
                              const std::vector<double>& model_digest) {
  if (!(loss_bound >= 1.0)) {
    throw ValidationError("sufficiency: zero-one loss needs M >= 1");
  }
  const DomainSpec pw = scenario.source.reweighted(w);
  const DomainSpec& q = scenario.target;
  Rng root(mc.seed);
  const MonteCarloConfig mc_s{mc.samples, root.child("source").next_u64()};
  const MonteCarloConfig mc_t{mc.samples, root.child("target").next_u64()};
  const RiskEstimate rs = true_risk(pw, h, LossKind::kZeroOne, mc_s);
  const RiskEstimate rt = true_risk(q, h, LossKind::kZeroOne, mc_t);

  const int k = q.num_classes();
  std::vector<double> cond(k);
  double quad_err = 0.0;
  for (int y = 0; y < k; ++y) {
    const QuadratureResult t =
        tv_continuous(pw.class_conditionals[y], q.class_conditionals[y]);
    cond[y] = t.value;
    quad_err = std::max(quad_err, t.error);
  }
  const double label_tv = tv_distance(pw.label_dist, q.label_dist);
  const double cond_p = expectation(pw.label_dist, cond);
  const double cond_q = expectation(q.label_dist, cond);
  const double rhs = 2.0 * loss_bound * (label_tv + std::min(cond_p, cond_q));
  const double mc_tol = 3.0 * std::hypot(rs.std_error, rt.std_error);
  const double quad_tol = 2.0 * loss_bound * quad_err;

  std::vector<double> extra = model_digest;
  extra.push_back(loss_bound);
  extra.push_back(static_cast<double>(mc.samples));
  extra.push_back(static_cast<double>(mc.seed));
  return make_report(
      "sufficiency", BoundKind::kUpper, std::fabs(rs.value - rt.value), rhs,
      mc_tol + quad_tol, inputs_digest(scenario, w, extra),
      {{"risk_source_w", rs.value},
       {"risk_target", rt.value},
       {"label_tv", label_tv},
       {"conditional_tv_source_w", cond_p},
       {"conditional_tv_target", cond_q},
       {"mc_tolerance", mc_tol},
       {"quadrature_tolerance", quad_tol}});
}

BoundReport sufficiency_check(const ShiftScenario& scenario,
                              const ModelParams& m,
                              const std::vector<double>& w, double loss_bound,
                              const MonteCarloConfig& mc) {
  return sufficiency_check(scenario, probabilities_of(m), w, loss_bound, mc,
                           flatten_model(m));
}

// --- necessity -----------------------------------------------------------------

BoundReport necessity_check(const ShiftScenario& scenario,
                            const std::vector<double>& w, double a,
                            const AffineMap& g, double tolerance) {
  const ZSpaceScenario z = z_space(scenario, w, g);
  const QuadratureGrid grid = scenario_grid(z);
  const MarginalDivergences md = marginal_mutual_info(scenario, w, a, g, grid);
  const bool assumption =
      md.label_term >= md.z_term.value - md.z_term.error - 1e-12;
  const QuadratureResult lhs = posterior_disagreement(scenario, w, g, grid);
  const QuadratureResult cmi = conditional_mutual_info(scenario, w, a, g, grid);
  const double b = std::min(a, 1.0 - a);
  const double scale = 1.0 / (2.0 * (1.0 - b));
  const double quad_tol = lhs.error + scale * cmi.error;
  std::vector<double> extra = {a};
  extra.insert(extra.end(), g.linear.data(), g.linear.data() + g.linear.size());
  extra.insert(extra.end(), g.offset.data(), g.offset.data() + g.offset.size());
  return make_report("necessity", BoundKind::kLower, lhs.value,
                     scale * cmi.value, tolerance + quad_tol,
                     inputs_digest(scenario, w, extra),
                     {{"conditional_mutual_info", cmi.value},
                      {"b", b},
                      {"label_js_a", md.label_term},
                      {"z_js_a", md.z_term.value},
                      {"quadrature_tolerance", quad_tol}},
                     assumption);
}

// --- Zhao et al. lower bound ---------------------------------------------------

BoundReport zhao_lower_bound_check(const ShiftScenario& scenario,
                                   const ProbabilityFn& h_on_z,
                                   const AffineMap& g,
                                   const MonteCarloConfig& mc,
                                   const std::vector<double>& model_digest) {
  const std::vector<double> ones(scenario.source.num_classes(), 1.0);
  const ZSpaceScenario z = z_space(scenario, ones, g);
  const double js_y = js_divergence(z.source_w.label_dist, z.target.label_dist);
  const QuadratureResult js_z =
      js_continuous(z.source_w.marginal(), z.target.marginal(), 0.5,
                    scenario_grid(z));
  const bool assumption = js_y >= js_z.value - js_z.error - 1e-12;
  const double gap = std::max(js_y - js_z.value, 0.0);
  const double rhs = 0.5 * gap * gap;
  const double sqrt_gap =
      std::max(std::sqrt(js_y) - std::sqrt(std::max(js_z.value, 0.0)), 0.0);

  Rng root(mc.seed);
  const MonteCarloConfig mc_s{mc.samples, root.child("source").next_u64()};
  const MonteCarloConfig mc_t{mc.samples, root.child("target").next_u64()};
  const ProbabilityFn h = compose(h_on_z, g);
  const RiskEstimate rs = true_risk(scenario.source, h, LossKind::kZeroOne, mc_s);
  const RiskEstimate rt = true_risk(scenario.target, h, LossKind::kZeroOne, mc_t);
  const double mc_tol = 3.0 * std::hypot(rs.std_error, rt.std_error);
  const double quad_tol = gap * js_z.error;

  std::vector<double> extra = model_digest;
  extra.insert(extra.end(), g.linear.data(), g.linear.data() + g.linear.size());
  extra.insert(extra.end(), g.offset.data(), g.offset.data() + g.offset.size());
  extra.push_back(static_cast<double>(mc.samples));
  extra.push_back(static_cast<double>(mc.seed));
  return make_report("zhao", BoundKind::kLower, rs.value + rt.value, rhs,
                     mc_tol + quad_tol, inputs_digest(scenario, ones, extra),
                     {{"risk_source", rs.value},
                      {"risk_target", rt.value},
                      {"js_labels", js_y},
                      {"js_z", js_z.value},
                      {"rhs_sqrt_form", 0.5 * sqrt_gap * sqrt_gap},
                      {"mc_tolerance", mc_tol},
                      {"quadrature_tolerance", quad_tol}},
                     assumption);
}

// --- Bayes gap -----------------------------------------------------------------

BoundReport bayes_gap_check(const ShiftScenario& scenario,
                            const std::vector<double>& w, double loss_bound,
                            const AffineMap& g) {
  const ZSpaceScenario z = z_space(scenario, w, g);
  const QuadratureGrid grid = scenario_grid(z);
  const QuadratureResult ep = bayes_error(z.source_w, grid);
  const QuadratureResult eq = bayes_error(z.target, grid);
  const QuadratureResult tv = joint_tv(scenario, w, g, grid);
  const double quad_tol = ep.error + eq.error + 2.0 * loss_bound * tv.error;
  std::vector<double> extra = {loss_bound};
  extra.insert(extra.end(), g.linear.data(), g.linear.data() + g.linear.size());
  extra.insert(extra.end(), g.offset.data(), g.offset.data() + g.offset.size());
  return make_report("bayes_gap", BoundKind::kUpper,
                     std::fabs(ep.value - eq.value), 2.0 * loss_bound * tv.value,
                     quad_tol, inputs_digest(scenario, w, extra),
                     {{"bayes_error_source_w", ep.value},
                      {"bayes_error_target", eq.value},
                      {"joint_tv", tv.value},
                      {"quadrature_tolerance", quad_tol}});
}

// --- impossibility probe -------------------------------------------------------

BoundReport ImpossibilityReport::as_bound(double threshold,
                                          const std::string& digest) const {
  return make_report("impossibility", BoundKind::kLower, best_value, threshold,
                     0.0, digest,
                     {{"label_tv", label_tv},
                      {"min_pairwise_l1", min_pairwise_l1},
                      {"best_scale", best.scale},
                      {"best_shift", best.shift},
                      {"best_marginal_tv", best.marginal_tv},
                      {"best_conditional_tv", best.conditional_tv}});
}

ImpossibilityReport impossibility_probe(const ShiftScenario& scenario,
                                        const ProbeOptions& options) {
  const DomainSpec& p = scenario.source;
  const DomainSpec& q = scenario.target;
  if (p.dim() != 1) throw ValidationError("impossibility probe needs 1-D data");
  std::vector<double> scales = options.scales;
  std::vector<double> shifts = options.shifts;
  if (scales.empty()) {
    for (int i = 0; i < 25; ++i) scales.push_back(0.5 * std::pow(4.0, i / 24.0));
  }
  if (shifts.empty()) {
    for (int i = 0; i <= 160; ++i) shifts.push_back(-8.0 + 0.1 * i);
  }
  auto grid_for = [&](const MixtureDensity& a, const MixtureDensity& b) {
    const MixtureDensity* parts[] = {&a, &b};
    return covering_grid(parts, options.points);
  };

  ImpossibilityReport out;
  out.label_tv = tv_distance(p.label_dist, q.label_dist);
  out.min_pairwise_l1 = std::numeric_limits<double>::infinity();
  for (const DomainSpec* d : {&p, &q}) {
    for (int i = 0; i < d->num_classes(); ++i) {
      for (int j = i + 1; j < d->num_classes(); ++j) {
        const auto& a = d->class_conditionals[i];
        const auto& b = d->class_conditionals[j];
        out.min_pairwise_l1 = std::min(
            out.min_pairwise_l1, 2.0 * tv_continuous(a, b, grid_for(a, b)).value);
      }
    }
  }
  if (out.min_pairwise_l1 < 0.1) {
    throw ValidationError(
        "impossibility probe: class conditionals are not separated (pairwise "
        "L1 distance below 0.1)");
  }

  const MixtureDensity p_marginal = p.marginal();
  out.best_value = std::numeric_limits<double>::infinity();
  for (double scale : scales) {
    for (double shift : shifts) {
      const DomainSpec qg = q.pushforward(AffineMap::scalar(scale, shift));
      ProbeCandidate c{scale, shift, 0.0, 0.0};
      const MixtureDensity q_marginal = qg.marginal();
      c.marginal_tv =
          tv_continuous(p_marginal, q_marginal, grid_for(p_marginal, q_marginal))
              .value;
      for (int y = 0; y < q.num_classes(); ++y) {
        const auto& a = p.class_conditionals[y];
        const auto& b = qg.class_conditionals[y];
        c.conditional_tv +=
            q.label_dist[y] * tv_continuous(a, b, grid_for(a, b)).value;
      }
      const double v = std::max(c.marginal_tv, c.conditional_tv);
      if (v < out.best_value) {
        out.best_value = v;
        out.best = c;
      }
      if (c.marginal_tv < options.threshold &&
          c.conditional_tv < options.threshold) {
        out.joint_match_found = true;
      }
      out.candidates.push_back(c);
    }
  }

  std::vector<ProbeCandidate> sorted = out.candidates;
  std::sort(sorted.begin(), sorted.end(),
            [](const ProbeCandidate& a, const ProbeCandidate& b) {
              return a.marginal_tv != b.marginal_tv
                         ? a.marginal_tv < b.marginal_tv
                         : a.conditional_tv < b.conditional_tv;
            });
  double best_cond = std::numeric_limits<double>::infinity();
  for (const auto& c : sorted) {
    if (c.conditional_tv < best_cond) {
      out.pareto.push_back(c);
      best_cond = c.conditional_tv;
    }
  }
  return out;
}

}  // namespace gls
