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

#ifndef GLS_TESTS_GRADCHECK_HPP_
#define GLS_TESTS_GRADCHECK_HPP_

// Central finite-difference oracle for the framework objectives.

#include <algorithm>
#include <cmath>

#include "gls/learner.hpp"
#include "gls/random.hpp"

namespace gls::testing {

struct GradCheckInstance {
  ModelParams model;
  Eigen::MatrixXd xs, xt;
  std::vector<int> ys, yt;
  ImportanceWeights w;
  KernelSpec kernel;
  double lambda = 1.0;
};

inline GradCheckInstance random_instance(Rng& rng) {
  GradCheckInstance g;
  const int d = 1 + static_cast<int>(rng.below(3));
  const int k = 2 + static_cast<int>(rng.below(2));
  const int hidden = 2 + static_cast<int>(rng.below(3));
  const int z = 1 + static_cast<int>(rng.below(3));
  const Activation acts[] = {Activation::kTanh, Activation::kLeakyRelu,
                             Activation::kIdentity};
  g.model = ModelParams::init(d, {hidden}, z, k, acts[rng.below(3)], rng);
  for (auto& layer : g.model.g_layers) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = rng.uniform(-0.5, 0.5);
    }
  }
  const int ns = 6 + static_cast<int>(rng.below(6));
  const int nt = 6 + static_cast<int>(rng.below(6));
  g.xs = Eigen::MatrixXd::NullaryExpr(ns, d, [&] { return rng.normal(); });
  g.xt = Eigen::MatrixXd::NullaryExpr(nt, d, [&] { return rng.normal() + 0.5; });
  for (int i = 0; i < ns; ++i) g.ys.push_back(i % k);
  for (int i = 0; i < nt; ++i) g.yt.push_back(static_cast<int>(rng.below(k)));
  std::vector<double> counts(k, 0.0);
  for (int y : g.ys) counts[y] += 1.0;
  const auto p = DiscreteDistribution::normalized(counts);
  std::vector<double> raw(k);
  for (double& v : raw) v = rng.uniform(0.2, 2.0);
  double dot = 0.0;
  for (int y = 0; y < k; ++y) dot += raw[y] * p[y];
  for (double& v : raw) v /= dot;
  g.w = ImportanceWeights::ones(p);
  g.w.w = raw;
  const KernelKind kinds[] = {KernelKind::kLinear, KernelKind::kPolynomial2,
                              KernelKind::kLaplacian, KernelKind::kGaussian};
  g.kernel = {kinds[rng.below(4)], rng.uniform(0.5, 3.0)};
  g.lambda = rng.uniform(0.1, 2.0);
  return g;
}

// ‖analytic − numeric‖₂ / max(‖analytic‖₂, ‖numeric‖₂).
inline double gradient_relative_error(Framework f, const GradCheckInstance& g) {
  const ObjectiveInputs in{&g.xs, &g.ys, &g.xt, &g.yt};
  const ObjectiveValue v = objective(f, g.model, in, g.w, g.kernel, g.lambda);
  const Eigen::VectorXd analytic = v.grads.flatten();
  Eigen::VectorXd theta = g.model.flatten();
  Eigen::VectorXd numeric(theta.size());
  ModelParams probe = g.model;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::fabs(theta[i]));
    const double old = theta[i];
    theta[i] = old + h;
    probe.assign(theta);
    const double up = objective(f, probe, in, g.w, g.kernel, g.lambda).loss;
    theta[i] = old - h;
    probe.assign(theta);
    const double dn = objective(f, probe, in, g.w, g.kernel, g.lambda).loss;
    theta[i] = old;
    numeric[i] = (up - dn) / (2 * h);
  }
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

}  // namespace gls::testing

#endif  // GLS_TESTS_GRADCHECK_HPP_
