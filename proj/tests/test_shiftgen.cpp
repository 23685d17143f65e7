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

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "gls/divergences.hpp"
#include "gls/error.hpp"
#include "gls/shiftgen.hpp"

using gls::DiscreteDistribution;

namespace {

gls::ScenarioParams params(int k, int dim, double shift, std::vector<double> p,
                           std::vector<double> q, std::uint64_t seed = 1) {
  gls::ScenarioParams sp;
  sp.num_classes = k;
  sp.dim = dim;
  sp.shift = shift;
  sp.source_labels = DiscreteDistribution(std::move(p));
  sp.target_labels = DiscreteDistribution(std::move(q));
  sp.seed = seed;
  return sp;
}

}  // namespace

TEST_CASE("lattice means are pairwise at least three apart") {
  for (int dim : {1, 2, 3}) {
    for (int a = 0; a < 7; ++a) {
      for (int b = a + 1; b < 7; ++b) {
        CHECK((gls::lattice_mean(a, dim) - gls::lattice_mean(b, dim)).norm() >=
              3.0 - 1e-12);
      }
    }
  }
  CHECK(gls::lattice_mean(4, 2)[0] == doctest::Approx(9.0));
  CHECK(gls::lattice_mean(3, 2)[1] == doctest::Approx(6.0));
}

TEST_CASE("scenario construction") {
  const auto sc = gls::make_scenario(params(3, 2, 1.5, {0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}));
  for (int y = 0; y < 3; ++y) {
    const Eigen::VectorXd d = sc.target.class_conditionals[y].components()[0].mean -
                              sc.source.class_conditionals[y].components()[0].mean;
    CHECK(d.norm() == doctest::Approx(1.5));
    CHECK(sc.directions.row(y).norm() == doctest::Approx(1.0));
  }
  // Same seed: identical specs; exact TV wiring check.
  const auto again = gls::make_scenario(sc.params);
  CHECK(again.directions == sc.directions);
  CHECK(gls::tv_distance(sc.source.label_dist, sc.target.label_dist) ==
        gls::tv_distance(DiscreteDistribution({0.5, 0.3, 0.2}),
                         DiscreteDistribution({0.2, 0.3, 0.5})));
  auto shared = sc.params;
  shared.directions = gls::ShiftDirections::kShared;
  const auto sh = gls::make_scenario(shared);
  CHECK(sh.directions.row(0) == sh.directions.row(2));
  CHECK_THROWS_AS(gls::make_scenario(params(2, 1, -1.0, {0.5, 0.5}, {0.5, 0.5})),
                  gls::ValidationError);
  CHECK_THROWS_AS(gls::make_scenario(params(3, 1, 0.0, {0.5, 0.5}, {0.5, 0.5})),
                  gls::ValidationError);
}

TEST_CASE("zero shift gives matching conditionals") {
  const auto sc = gls::make_scenario(params(2, 1, 0.0, {0.6, 0.4}, {0.4, 0.6}));
  for (int y = 0; y < 2; ++y) {
    CHECK(gls::tv_continuous(sc.source.class_conditionals[y],
                             sc.target.class_conditionals[y])
              .value < 1e-9);
  }
}

TEST_CASE("sampling matches the label distribution and is deterministic") {
  const auto sc = gls::make_scenario(params(2, 1, 0.0, {0.6, 0.4}, {0.4, 0.6}));
  const auto s = gls::sample(sc.source, 100000, 3);
  CHECK(std::fabs(s.label_frequencies()[0] - 0.6) <= 0.005);
  CHECK(s == gls::sample(sc.source, 100000, 3));
  CHECK_FALSE(s == gls::sample(sc.source, 100000, 4));
  const auto one = gls::sample(sc.target, 1, 3, gls::DomainTag::kTarget);
  CHECK(one.size() == 1);
  CHECK(one.domain == gls::DomainTag::kTarget);
  CHECK_UNARY(one.labels[0] >= 0 && one.labels[0] < 2);
  // Class-0 features centre on the lattice mean (3, 0, ...).
  double m = 0.0;
  int n0 = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s.labels[i] == 0) {
      m += s.features(i, 0);
      ++n0;
    }
  }
  CHECK(std::fabs(m / n0 - gls::lattice_mean(0, 1)[0]) < 0.02);
  CHECK(gls::lattice_mean(0, 1)[0] == 3.0);
}

TEST_CASE("subsampling protocol") {
  gls::SampleSet s;
  s.num_classes = 2;
  s.features.resize(2000, 1);
  for (int i = 0; i < 2000; ++i) {
    s.features(i, 0) = i;
    s.labels.push_back(i % 2);
  }
  const auto sub = gls::subsample_protocol(s, 1, 0.3, 5);
  const auto counts = sub.class_counts();
  CHECK(counts[0] == 300);
  CHECK(counts[1] == 1000);
  CHECK(sub.label_frequencies()[0] == doctest::Approx(300.0 / 1300.0));
  // Rows are a subset in original order with untouched features.
  for (int i = 0; i < sub.size(); ++i) {
    const int orig = static_cast<int>(sub.features(i, 0));
    CHECK(s.labels[orig] == sub.labels[i]);
    if (i > 0) CHECK(sub.features(i, 0) > sub.features(i - 1, 0));
  }
  CHECK(gls::subsample_protocol(s, 1, 1.0, 5) == s);
  CHECK(gls::subsample_protocol(s, 0, 0.3, 5) == s);
  CHECK(gls::subsample_protocol(s, 1, 0.3, 5) == sub);
}
