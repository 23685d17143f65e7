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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "gls/bounds.hpp"
#include "gls/error.hpp"

using gls::BoundStatus;
using gls::DiscreteDistribution;

namespace {

gls::ShiftScenario scenario(int dim, double shift, std::vector<double> p,
                            std::vector<double> q,
                            gls::ShiftDirections dirs = gls::ShiftDirections::kPerClass) {
  gls::ScenarioParams params;
  params.num_classes = static_cast<int>(p.size());
  params.dim = dim;
  params.shift = shift;
  params.source_labels = DiscreteDistribution(std::move(p));
  params.target_labels = DiscreteDistribution(std::move(q));
  params.directions = dirs;
  params.seed = 17;
  return gls::make_scenario(params);
}

std::vector<double> oracle_w(const gls::ShiftScenario& s) {
  std::vector<double> w(s.source.num_classes());
  for (int y = 0; y < s.source.num_classes(); ++y) {
    w[y] = s.target.label_dist[y] / s.source.label_dist[y];
  }
  return w;
}

double term(const gls::BoundReport& r, const std::string& name) {
  for (const auto& t : r.terms) {
    if (t.name == name) return t.value;
  }
  FAIL("missing term " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("report wiring") {
  const auto up = gls::make_report("x", gls::BoundKind::kUpper, 1.0, 0.9, 0.2, "d", {});
  CHECK(up.slack == doctest::Approx(-0.1));
  CHECK(up.holds);
  CHECK(up.status == BoundStatus::kHolds);
  const auto low = gls::make_report("y", gls::BoundKind::kLower, 0.5, 0.9, 0.1, "d", {});
  CHECK(low.slack == doctest::Approx(-0.4));
  CHECK_FALSE(low.holds);
  CHECK(low.status == BoundStatus::kViolated);
  const auto unmet =
      gls::make_report("z", gls::BoundKind::kLower, 0.5, 0.9, 0.1, "d", {}, false);
  CHECK(unmet.status == BoundStatus::kAssumptionUnmet);
  CHECK_FALSE(unmet.counted());
  CHECK(gls::to_string(BoundStatus::kAssumptionUnmet) == "assumption-unmet");
}

TEST_CASE("inputs digest tracks the inputs") {
  const auto s = scenario(1, 0.5, {0.6, 0.4}, {0.4, 0.6});
  const auto d = gls::inputs_digest(s, {1.0, 1.0});
  CHECK(d.size() == 16);
  CHECK(d == gls::inputs_digest(s, {1.0, 1.0}));
  CHECK(d != gls::inputs_digest(s, {1.0, 1.0 + 1e-12}));
  CHECK(d != gls::inputs_digest(s, {1.0, 1.0}, {3.0}));
}

TEST_CASE("sufficiency at the exact correction") {
  const auto s = scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto h = gls::probabilities_of(gls::bayes_classifier(s.source));
  const auto r = gls::sufficiency_check(s, h, oracle_w(s), 1.0, {50000, 3});
  CHECK(r.holds);
  CHECK(r.rhs < 1e-9);
  CHECK(r.lhs <= 3.0 * std::hypot(0.0022, 0.0022));
  CHECK(r.name == "sufficiency");
}

TEST_CASE("sufficiency under pure label shift with unit weights") {
  const auto s = scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto h = gls::probabilities_of(gls::bayes_classifier(s.source));
  const auto r = gls::sufficiency_check(s, h, {1.0, 1.0}, 1.0, {50000, 4});
  CHECK(r.holds);
  CHECK(r.slack > 0.0);
  CHECK(r.rhs >= 2.0 * 0.2 - 1e-9);
  CHECK(term(r, "label_tv") == doctest::Approx(0.2));
  CHECK(term(r, "conditional_tv_target") < 1e-9);
  CHECK_THROWS_AS(gls::sufficiency_check(s, h, {1.0, 1.0}, 0.5, {1000, 1}),
                  gls::ValidationError);
}

TEST_CASE("necessity over a delta sweep at the oracle weights") {
  for (int i = 0; i < 5; ++i) {
    const auto s = scenario(1, 0.3 * (i + 1), {0.6, 0.4}, {0.4, 0.6});
    const auto r = gls::necessity_check(s, oracle_w(s), 0.5,
                                        gls::AffineMap::identity(1));
    CHECK(term(r, "b") == 0.5);
    CHECK(term(r, "label_js_a") == doctest::Approx(0.0));
    // P^w_Y = Q_Y while the marginals differ, so the premise fails.
    CHECK(term(r, "z_js_a") > 1e-6);
    CHECK(r.status == BoundStatus::kAssumptionUnmet);
    CHECK_FALSE(r.counted());
  }
}

TEST_CASE("necessity with the premise met under conditional shift") {
  for (int i = 0; i < 5; ++i) {
    const auto s = scenario(1, 0.2 * (i + 1), {0.7, 0.3}, {0.3, 0.7});
    const auto r = gls::necessity_check(s, {1.0, 1.0}, 0.5,
                                        gls::AffineMap::identity(1));
    CHECK(term(r, "label_js_a") >= term(r, "z_js_a"));
    CHECK(r.status == BoundStatus::kHolds);
    CHECK(r.rhs > 0.0);
  }
}

TEST_CASE("necessity at delta zero") {
  const auto s = scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto id = gls::AffineMap::identity(1);
  const auto exact = gls::necessity_check(s, oracle_w(s), 0.5, id);
  CHECK(exact.status == BoundStatus::kHolds);
  CHECK(exact.lhs < 1e-6);
  CHECK(exact.rhs < 1e-9);
  const auto off = gls::necessity_check(s, {1.0, 1.0}, 0.5, id);
  CHECK(off.status == BoundStatus::kHolds);
  CHECK(off.lhs > 0.0);
  CHECK(off.rhs < 1e-9);
}

TEST_CASE("zhao bound") {
  const auto none = scenario(1, 0.0, {0.5, 0.5}, {0.5, 0.5});
  const auto r0 = gls::zhao_lower_bound_check(none, gls::constant_classifier(0, 2),
                                              gls::AffineMap::identity(1), {20000, 1});
  CHECK(r0.rhs == doctest::Approx(0.0));
  CHECK(r0.holds);

  // Projection onto (1, 1)/√2 merges the lattice means 3e₀ and 3e₁, so the
  // representation marginals coincide across domains.
  const auto s = scenario(2, 0.0, {0.6, 0.4}, {0.4, 0.6});
  gls::AffineMap g;
  g.linear = Eigen::MatrixXd::Constant(1, 2, 1.0 / std::sqrt(2.0));
  g.offset = Eigen::VectorXd::Zero(1);
  const auto r = gls::zhao_lower_bound_check(s, gls::constant_classifier(1, 2), g,
                                             {20000, 2});
  const double js = gls::js_divergence(s.source.label_dist, s.target.label_dist);
  CHECK(term(r, "js_z") < 1e-9);
  CHECK(r.rhs == doctest::Approx(0.5 * js * js).epsilon(1e-6));
  CHECK(r.rhs > 0.0);
  CHECK(r.status == BoundStatus::kHolds);
  CHECK(term(r, "rhs_sqrt_form") == doctest::Approx(0.5 * js).epsilon(1e-6));
}

TEST_CASE("bayes gap") {
  const auto id = gls::AffineMap::identity(1);
  const auto s = scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto exact = gls::bayes_gap_check(s, oracle_w(s), 1.0, id);
  CHECK(exact.lhs < 1e-9);
  CHECK(exact.rhs < 1e-6);
  CHECK(exact.holds);
  const auto ones = gls::bayes_gap_check(s, {1.0, 1.0}, 1.0, id);
  CHECK(ones.rhs > 0.1);
  CHECK(ones.holds);
  double previous = -1.0;
  for (int i = 0; i < 5; ++i) {
    const auto sd = scenario(1, 0.4 * i, {0.6, 0.4}, {0.4, 0.6});
    const auto r = gls::bayes_gap_check(sd, oracle_w(sd), 1.0, id);
    CHECK(r.holds);
    CHECK(r.rhs >= previous - 1e-9);
    previous = r.rhs;
  }
}

TEST_CASE("impossibility probe on a small grid") {
  gls::ProbeOptions opt;
  opt.scales = {0.8, 1.0, 1.25};
  for (int i = 0; i <= 40; ++i) opt.shifts.push_back(-2.0 + 0.1 * i);
  const auto shifted = scenario(1, 1.0, {0.6, 0.4}, {0.4, 0.6});
  const auto r = gls::impossibility_probe(shifted, opt);
  CHECK(r.candidates.size() == 3 * 41);
  CHECK(r.label_tv == doctest::Approx(0.2));
  CHECK_FALSE(r.joint_match_found);
  CHECK(r.best_value >= 0.05);
  CHECK(r.as_bound(0.05, "d").holds);
  REQUIRE_FALSE(r.pareto.empty());
  for (std::size_t i = 1; i < r.pareto.size(); ++i) {
    CHECK(r.pareto[i].marginal_tv >= r.pareto[i - 1].marginal_tv);
    CHECK(r.pareto[i].conditional_tv < r.pareto[i - 1].conditional_tv);
  }

  const auto control =
      scenario(1, 1.0, {0.5, 0.5}, {0.5, 0.5}, gls::ShiftDirections::kShared);
  const auto c = gls::impossibility_probe(control, opt);
  CHECK(c.joint_match_found);
  CHECK(c.best_value < 1e-3);

  gls::ScenarioParams merged;
  merged.num_classes = 2;
  merged.variance = 10000.0;
  CHECK_THROWS_AS(gls::impossibility_probe(gls::make_scenario(merged), opt),
                  gls::ValidationError);
  CHECK_THROWS_AS(gls::impossibility_probe(scenario(2, 0.0, {0.5, 0.5}, {0.5, 0.5})),
                  gls::ValidationError);
}
