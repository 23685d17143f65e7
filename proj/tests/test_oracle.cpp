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

#include "gls/error.hpp"
#include "gls/oracle.hpp"

using gls::DiscreteDistribution;
using gls::DomainSpec;
using gls::MixtureDensity;

namespace {

MixtureDensity unit(double mean) {
  return MixtureDensity::isotropic(Eigen::VectorXd::Constant(1, mean), 1.0);
}

DomainSpec two_gaussians(double m0, double m1, double p0) {
  DomainSpec s;
  s.class_conditionals = {unit(m0), unit(m1)};
  s.label_dist = DiscreteDistribution({p0, 1.0 - p0});
  return s;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

gls::ShiftScenario label_shift_scenario(int dim, double shift,
                                        std::vector<double> p,
                                        std::vector<double> q) {
  gls::ScenarioParams params;
  params.num_classes = static_cast<int>(p.size());
  params.dim = dim;
  params.shift = shift;
  params.source_labels = DiscreteDistribution(std::move(p));
  params.target_labels = DiscreteDistribution(std::move(q));
  params.seed = 11;
  return gls::make_scenario(params);
}

std::vector<double> oracle_w(const gls::ShiftScenario& s) {
  std::vector<double> w(s.source.num_classes());
  for (int y = 0; y < s.source.num_classes(); ++y) {
    w[y] = s.target.label_dist[y] / s.source.label_dist[y];
  }
  return w;
}

// Locates the sign change of the Bayes decision on [lo, hi].
double decision_threshold(const gls::BayesClassifier& f, double lo, double hi) {
  Eigen::VectorXd x(1);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    x[0] = mid;
    (f(x) == 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("bayes classifier thresholds") {
  const auto eq = gls::bayes_classifier(two_gaussians(0.0, 2.0, 0.5));
  CHECK(decision_threshold(eq, -5.0, 5.0) == doctest::Approx(1.0).epsilon(1e-10));
  const auto uneq = gls::bayes_classifier(two_gaussians(0.0, 2.0, 0.6));
  const double expected = 1.0 + 0.5 * std::log(0.6 / 0.4);
  CHECK(std::fabs(decision_threshold(uneq, -5.0, 5.0) - expected) < 1e-6);
  CHECK(expected == doctest::Approx(1.2027).epsilon(1e-4));
  Eigen::VectorXd x(1);
  x[0] = 1.0;
  CHECK(eq(x) == 0);  // tie goes to the smaller index

  DomainSpec single;
  single.class_conditionals = {unit(0.0)};
  single.label_dist = DiscreteDistribution({1.0});
  const auto constant = gls::bayes_classifier(single);
  for (double v : {-10.0, 0.0, 10.0}) {
    x[0] = v;
    CHECK(constant(x) == 0);
  }
}

TEST_CASE("bayes error closed forms") {
  const auto r = gls::bayes_error(two_gaussians(0.0, 2.0, 0.5));
  CHECK(std::fabs(r.value - phi(-1.0)) < 1e-4);
  CHECK(r.value == doctest::Approx(0.15866).epsilon(1e-4));
  CHECK(gls::bayes_error(two_gaussians(-20.0, 20.0, 0.5)).value < 1e-9);
  CHECK(gls::bayes_error(two_gaussians(0.0, 0.0, 0.5)).value ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(gls::bayes_error(DomainSpec{
                      {MixtureDensity::isotropic(Eigen::VectorXd::Zero(4), 1.0),
                       MixtureDensity::isotropic(Eigen::VectorXd::Ones(4), 1.0)},
                      DiscreteDistribution::uniform(2)}),
                  gls::ValidationError);
}

TEST_CASE("bayes error is below every perturbed threshold classifier") {
  gls::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double m1 = rng.uniform(0.5, 3.0);
    const double p0 = rng.uniform(0.2, 0.8);
    const double be = gls::bayes_error(two_gaussians(0.0, m1, p0)).value;
    for (int i = 0; i < 100; ++i) {
      const double t = -1.0 + (m1 + 2.0) * i / 99.0;
      // Predict class 1 above t.
      const double risk = p0 * (1.0 - phi(t)) + (1.0 - p0) * phi(t - m1);
      CHECK(be <= risk + 1e-6);
    }
  }
}

TEST_CASE("monte carlo risks agree with the exact oracles") {
  const auto spec = two_gaussians(0.0, 2.0, 0.6);
  const auto be = gls::bayes_error(spec).value;
  const auto mc = gls::true_risk(spec, gls::probabilities_of(gls::bayes_classifier(spec)),
                                 gls::LossKind::kZeroOne, {100000, 5});
  CHECK(mc.std_error > 0.0);
  CHECK(std::fabs(mc.value - be) <= 3.0 * mc.std_error);
  const auto c1 = gls::true_risk(spec, gls::constant_classifier(1, 2),
                                 gls::LossKind::kZeroOne, {100000, 5});
  CHECK(std::fabs(c1.value - 0.6) <= 3.0 * c1.std_error);
  CHECK(c1.value >= be - 3.0 * c1.std_error);
  // Same seed, same estimate.
  const auto again = gls::true_risk(spec, gls::constant_classifier(1, 2),
                                    gls::LossKind::kZeroOne, {100000, 5});
  CHECK(again.value == c1.value);
  // Uniform probabilities give cross-entropy ln 2 exactly.
  const gls::ProbabilityFn half = [](const Eigen::MatrixXd& x) {
    return Eigen::MatrixXd::Constant(x.rows(), 2, 0.5);
  };
  CHECK(gls::true_risk(spec, half, gls::LossKind::kCrossEntropy, {1000, 1}).value ==
        doctest::Approx(std::log(2.0)));
  // Composition with a shift moves the decision boundary.
  const auto shifted = gls::compose(gls::probabilities_of(gls::bayes_classifier(spec)),
                                    gls::AffineMap::scalar(1.0, 100.0));
  CHECK(gls::true_risk(spec, shifted, gls::LossKind::kZeroOne, {20000, 2}).value ==
        doctest::Approx(0.6).epsilon(0.03));
}

TEST_CASE("posterior disagreement vanishes at the oracle weights") {
  const auto s = label_shift_scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto id = gls::AffineMap::identity(1);
  CHECK(gls::posterior_disagreement(s, oracle_w(s), id).value < 1e-6);
  CHECK(gls::posterior_disagreement(s, {1.0, 1.0}, id).value > 1e-3);
  const auto s2 = label_shift_scenario(2, 0.0, {0.5, 0.3, 0.2}, {0.2, 0.3, 0.5});
  CHECK(gls::posterior_disagreement(s2, oracle_w(s2), gls::AffineMap::identity(2))
            .value < 1e-6);
}

TEST_CASE("posterior disagreement grows with the conditional shift") {
  double previous = -1.0;
  for (int i = 0; i <= 8; ++i) {
    const auto s = label_shift_scenario(1, 0.25 * i, {0.6, 0.4}, {0.4, 0.6});
    const double v = gls::posterior_disagreement(s, oracle_w(s),
                                                 gls::AffineMap::identity(1))
                         .value;
    CHECK(v >= previous - 1e-9);
    previous = v;
  }
  CHECK(previous > 1e-2);
}

TEST_CASE("conditional mutual information") {
  const auto id = gls::AffineMap::identity(1);
  const auto none = label_shift_scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  for (double a : {0.25, 0.5, 0.75}) {
    CHECK(gls::conditional_mutual_info(none, {1.0, 1.0}, a, id).value < 1e-9);
    CHECK(gls::conditional_mutual_info(none, oracle_w(none), a, id).value < 1e-9);
  }
  const auto far = label_shift_scenario(1, 40.0, {0.6, 0.4}, {0.4, 0.6});
  CHECK(std::fabs(gls::conditional_mutual_info(far, oracle_w(far), 0.5, id).value -
                  std::log(2.0)) < 1e-4);
  CHECK_THROWS_AS(gls::conditional_mutual_info(none, {1.0, 1.0}, 1.0, id),
                  gls::ValidationError);
}

TEST_CASE("marginal mutual information terms") {
  const auto id = gls::AffineMap::identity(1);
  const auto s = label_shift_scenario(1, 0.0, {0.6, 0.4}, {0.4, 0.6});
  const auto at_oracle = gls::marginal_mutual_info(s, oracle_w(s), 0.5, id);
  CHECK(at_oracle.label_term == doctest::Approx(0.0));
  CHECK(at_oracle.z_term.value < 1e-9);
  const auto ones = gls::marginal_mutual_info(s, {1.0, 1.0}, 0.5, id);
  CHECK(ones.label_term >= ones.z_term.value - 1e-6);
  CHECK(ones.label_term > 0.0);
  const auto flat = label_shift_scenario(1, 0.0, {0.5, 0.5}, {0.5, 0.5});
  const auto zero = gls::marginal_mutual_info(flat, {1.0, 1.0}, 0.3, id);
  CHECK(zero.label_term == 0.0);
  CHECK(zero.z_term.value < 1e-9);
}

TEST_CASE("label divergence dominates the representation divergence under conditional invariance") {
  gls::Rng rng(21);
  for (int t = 0; t < 8; ++t) {
    const int k = 2 + static_cast<int>(rng.below(2));
    const int dim = 1 + static_cast<int>(rng.below(2));
    std::vector<double> p(k), q(k), w(k);
    for (int y = 0; y < k; ++y) {
      p[y] = rng.uniform(0.1, 1.0);
      q[y] = rng.uniform(0.1, 1.0);
      w[y] = rng.uniform(0.0, 3.0);
    }
    auto s = label_shift_scenario(dim, 0.0, DiscreteDistribution::normalized(p).probs(),
                                  DiscreteDistribution::normalized(q).probs());
    double dot = 0.0;
    for (int y = 0; y < k; ++y) dot += w[y] * s.source.label_dist[y];
    for (double& v : w) v /= dot;
    for (double a : {0.25, 0.5, 0.75}) {
      const auto m = gls::marginal_mutual_info(s, w, a, gls::AffineMap::identity(dim));
      CHECK(m.label_term >= m.z_term.value - 1e-6);
    }
  }
}

TEST_CASE("joint tv at the reweighting fixed point") {
  const auto s = label_shift_scenario(2, 0.0, {0.5, 0.3, 0.2}, {0.2, 0.3, 0.5});
  const auto id = gls::AffineMap::identity(2);
  CHECK(gls::joint_tv(s, oracle_w(s), id).value < 1e-6);
  // With w = 1 only the label part differs: TV equals d_TV(P_Y, Q_Y).
  CHECK(gls::joint_tv(s, {1.0, 1.0, 1.0}, id).value == doctest::Approx(0.3).epsilon(1e-6));
}
