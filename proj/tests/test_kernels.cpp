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

#include <doctest.h>

#include "gls/error.hpp"
#include "gls/kernels.hpp"
#include "gls/random.hpp"

using gls::KernelKind;
using gls::KernelSpec;
using gls::MmdEstimator;

namespace {

Eigen::MatrixXd random_block(gls::Rng& rng, int n, int d, double shift = 0.0) {
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal() + shift;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("kernel spot values") {
  const KernelSpec g{KernelKind::kGaussian, 1.0};
  CHECK(gls::kernel_eval(g, vec({0.3}), vec({0.3})) == 1.0);
  CHECK(gls::kernel_eval(g, vec({0.0}), vec({1.0})) ==
        doctest::Approx(std::exp(-1.0)));
  const KernelSpec p{KernelKind::kPolynomial2, 1.0};
  CHECK(gls::kernel_eval(p, vec({1, 0}), vec({0, 1})) == doctest::Approx(1.0));
  CHECK(gls::kernel_eval(p, vec({1, 2}), vec({3, 1})) == doctest::Approx(36.0));
  const KernelSpec l{KernelKind::kLaplacian, 2.0};
  CHECK(gls::kernel_eval(l, vec({0, 0}), vec({1, -1})) ==
        doctest::Approx(std::exp(-1.0)));
  const KernelSpec lin{KernelKind::kLinear, 1.0};
  CHECK(gls::kernel_eval(lin, vec({1, 2}), vec({3, 4})) == doctest::Approx(11.0));
  CHECK_THROWS_AS(KernelSpec({KernelKind::kGaussian, 0.0}).validate(),
                  gls::ValidationError);
  CHECK(gls::kernel_kind_from_string(gls::to_string(KernelKind::kLaplacian)) ==
        KernelKind::kLaplacian);
  CHECK_THROWS_AS(gls::kernel_kind_from_string("rbf"), gls::ValidationError);
}

TEST_CASE("gram matrices agree with elementwise evaluation") {
  gls::Rng rng(3);
  const Eigen::MatrixXd a = random_block(rng, 4, 3);
  const Eigen::MatrixXd b = random_block(rng, 5, 3);
  for (KernelKind k : {KernelKind::kLinear, KernelKind::kPolynomial2,
                       KernelKind::kLaplacian, KernelKind::kGaussian}) {
    const KernelSpec spec{k, 1.7};
    const Eigen::MatrixXd g = gls::gram(spec, a, b);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(g(i, j) == doctest::Approx(gls::kernel_eval(
                             spec, a.row(i).transpose(), b.row(j).transpose())));
    CHECK((gls::gram(spec, b, a) - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  CHECK(gls::gram({KernelKind::kGaussian, 1.0}, zero, zero)(0, 0) == 1.0);
}

TEST_CASE("mmd2 values") {
  const KernelSpec g{KernelKind::kGaussian, 1.0};
  Eigen::MatrixXd s(1, 1), t(1, 1);
  s << 0.0;
  t << 1.0;
  CHECK(gls::mmd2(g, s, t) == doctest::Approx(2.0 - 2.0 * std::exp(-1.0)));
  gls::Rng rng(5);
  const Eigen::MatrixXd a = random_block(rng, 30, 2);
  CHECK(gls::mmd2(g, a, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(gls::mmd2(g, s, t, MmdEstimator::kUnbiased), gls::ValidationError);
}

TEST_CASE("unbiased mmd2 on identical gaussians is centred at zero") {
  const KernelSpec g{KernelKind::kGaussian, 2.0};
  gls::Rng rng(11);
  const int reps = 30;
  std::vector<double> v(reps);
  for (double& x : v) {
    x = gls::mmd2(g, random_block(rng, 400, 2), random_block(rng, 400, 2),
                  MmdEstimator::kUnbiased);
  }
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x / reps;
  for (double x : v) var += (x - mean) * (x - mean) / (reps - 1);
  const double sd = std::sqrt(var);
  CHECK(std::fabs(v.front()) <= 3.0 * sd);
  CHECK(std::fabs(mean) <= 3.0 * sd / std::sqrt(reps));
}

TEST_CASE("mmd2 gradients match central differences") {
  gls::Rng rng(17);
  for (KernelKind k : {KernelKind::kLinear, KernelKind::kPolynomial2,
                       KernelKind::kLaplacian, KernelKind::kGaussian}) {
    for (MmdEstimator e : {MmdEstimator::kBiased, MmdEstimator::kUnbiased}) {
      const KernelSpec spec{k, 1.3};
      Eigen::MatrixXd s = random_block(rng, 5, 2);
      Eigen::MatrixXd t = random_block(rng, 4, 2, 0.5);
      const auto g = gls::mmd2_with_gradient(spec, s, t, e);
      CHECK(g.value == doctest::Approx(gls::mmd2(spec, s, t, e)));
      const double h = 1e-6;
      auto fd = [&](Eigen::MatrixXd& m, int i, int j) {
        const double old = m(i, j);
        m(i, j) = old + h;
        const double up = gls::mmd2(spec, s, t, e);
        m(i, j) = old - h;
        const double dn = gls::mmd2(spec, s, t, e);
        m(i, j) = old;
        return (up - dn) / (2 * h);
      };
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(g.d_source(i, j) == doctest::Approx(fd(s, i, j)).epsilon(1e-5));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(g.d_target(i, j) == doctest::Approx(fd(t, i, j)).epsilon(1e-5));
    }
  }
}

TEST_CASE("conditional discrepancy composes per-class mmd2") {
  const KernelSpec g{KernelKind::kGaussian, 1.0};
  Eigen::MatrixXd s(2, 1), t(2, 1);
  s << 0.5, 0.0;
  t << 0.5, 1.0;
  const std::vector<int> ys = {0, 1}, yt = {0, 1};
  CHECK(gls::conditional_discrepancy(g, s, ys, t, yt,
                                     gls::DiscreteDistribution({0.5, 0.5})) ==
        doctest::Approx(0.5 * (2.0 - 2.0 * std::exp(-1.0))));
  CHECK(gls::conditional_discrepancy(g, s, ys, t, yt,
                                     gls::DiscreteDistribution({1.0, 0.0})) ==
        doctest::Approx(0.0));
  const std::vector<int> only0 = {0, 0};
  CHECK_THROWS_AS(gls::conditional_discrepancy(
                      g, s, ys, t, only0, gls::DiscreteDistribution({0.5, 0.5})),
                  gls::ClassAbsentError);
  try {
    gls::conditional_discrepancy(g, s, ys, t, only0,
                                 gls::DiscreteDistribution({0.5, 0.5}));
  } catch (const gls::ClassAbsentError& e) {
    CHECK(e.label() == 1);
  }
}

TEST_CASE("dropping variant renormalizes the remaining classes") {
  const KernelSpec g{KernelKind::kGaussian, 1.0};
  gls::Rng rng(23);
  const Eigen::MatrixXd s = random_block(rng, 6, 2);
  const Eigen::MatrixXd t = random_block(rng, 6, 2, 0.3);
  const std::vector<int> ys = {0, 1, 2, 0, 1, 2};
  const std::vector<int> yt = {0, 0, 1, 1, 0, 1};
  const gls::DiscreteDistribution w({0.2, 0.3, 0.5});
  const auto c = gls::conditional_discrepancy_dropping(
      g, s, ys, t, yt, w, MmdEstimator::kBiased, true);
  REQUIRE(c.dropped == std::vector<int>{2});
  const double full = gls::conditional_discrepancy(
      g, s, ys, t, yt, gls::DiscreteDistribution({0.4, 0.6, 0.0}));
  CHECK(c.value == doctest::Approx(full));
  // Gradient check through the dropping path.
  Eigen::MatrixXd sp = s;
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    sp(i, 0) = s(i, 0) + h;
    const double up = gls::conditional_discrepancy_dropping(
                          g, sp, ys, t, yt, w, MmdEstimator::kBiased, false)
                          .value;
    sp(i, 0) = s(i, 0) - h;
    const double dn = gls::conditional_discrepancy_dropping(
                          g, sp, ys, t, yt, w, MmdEstimator::kBiased, false)
                          .value;
    sp(i, 0) = s(i, 0);
    CHECK(c.d_source(i, 0) == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("median heuristic") {
  Eigen::MatrixXd z(3, 1);
  z << 0.0, 1.0, 3.0;
  gls::Rng rng(1);
  // Squared distances 1, 9, 4 → median 4.
  CHECK(gls::median_heuristic(KernelKind::kGaussian, z, rng) == doctest::Approx(4.0));
  // L1 distances 1, 3, 2 → median 2.
  CHECK(gls::median_heuristic(KernelKind::kLaplacian, z, rng) == doctest::Approx(2.0));
  const Eigen::MatrixXd same = Eigen::MatrixXd::Zero(4, 2);
  CHECK(gls::median_heuristic(KernelKind::kGaussian, same, rng) == 1.0);
}
