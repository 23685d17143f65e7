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

#include "gls/divergences.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gls/error.hpp"

namespace gls {

namespace {

void check_same_size(const DiscreteDistribution& p,
                     const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    throw ValidationError("distributions differ in size: " +
                          std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()));
  }
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw ValidationError("distribution must have at least one class");
  }
  double total = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("distribution entries must be finite and >= 0");
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ValidationError("distribution entries must sum to 1 (got " +
                          std::to_string(total) + ")");
  }
}

DiscreteDistribution DiscreteDistribution::normalized(
    std::vector<double> masses) {
  double total = 0.0;
  for (double v : masses) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("masses must be finite and >= 0");
    }
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("masses sum to zero");
  for (double& v : masses) v /= total;
  return DiscreteDistribution(std::move(masses));
}

DiscreteDistribution DiscreteDistribution::uniform(int k) {
  if (k < 1) throw ValidationError("uniform distribution needs k >= 1");
  return DiscreteDistribution(std::vector<double>(k, 1.0 / k));
}

double kl_divergence(const DiscreteDistribution& p,
                     const DiscreteDistribution& q) {
  check_same_size(p, q);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(s, 0.0);
}

double generalized_js_point(double a, double b, double c) {
  // Log-space mixture so subnormal densities cannot round m to zero.
  const double la = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
  const double lb = b > 0.0 ? std::log(b) : -std::numeric_limits<double>::infinity();
  const double ta = std::log1p(-c) + la;
  const double tb = std::log(c) + lb;
  const double hi = std::max(ta, tb);
  if (hi == -std::numeric_limits<double>::infinity()) return 0.0;
  const double lm = hi + std::log1p(std::exp(std::min(ta, tb) - hi));
  double s = 0.0;
  if (a > 0.0) s += (1.0 - c) * a * (la - lm);
  if (b > 0.0) s += c * b * (lb - lm);
  return s;
}

double generalized_js(const DiscreteDistribution& p,
                      const DiscreteDistribution& q, double c) {
  check_same_size(p, q);
  if (!(c > 0.0 && c < 1.0)) {
    throw ValidationError("mixing constant c must lie in (0, 1)");
  }
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += generalized_js_point(p[i], q[i], c);
  return std::max(s, 0.0);
}

double tv_distance(const DiscreteDistribution& p,
                   const DiscreteDistribution& q) {
  check_same_size(p, q);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

void check_grid_mass(const QuadratureGrid& grid, std::span<const double> values,
                     const char* what) {
  const double mass = integrate(grid, values).value;
  if (mass < 1.0 - 1e-6) {
    throw ValidationError(std::string("quadrature grid misses mass of ") +
                          what + ": covered " + std::to_string(mass));
  }
}

namespace {

void check_pair(const MixtureDensity& a, const MixtureDensity& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("densities differ in dimension");
  }
  if (a.dim() > kMaxQuadratureDim) {
    throw ValidationError("quadrature oracle is restricted to dim <= 3");
  }
}

QuadratureGrid pair_grid(const MixtureDensity& a, const MixtureDensity& b) {
  const MixtureDensity* both[] = {&a, &b};
  return covering_grid(both);
}

}  // namespace

QuadratureResult tv_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               const QuadratureGrid& grid) {
  check_pair(a, b);
  const std::vector<double> fa = a.evaluate(grid);
  const std::vector<double> fb = b.evaluate(grid);
  check_grid_mass(grid, fa, "first density");
  check_grid_mass(grid, fb, "second density");
  std::vector<double> diff(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) diff[i] = fa[i] - fb[i];
  QuadratureResult r = integrate_abs(grid, diff);
  r.value *= 0.5;
  r.error *= 0.5;
  return r;
}

QuadratureResult tv_continuous(const MixtureDensity& a,
                               const MixtureDensity& b) {
  check_pair(a, b);
  return tv_continuous(a, b, pair_grid(a, b));
}

QuadratureResult js_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               double c, const QuadratureGrid& grid) {
  check_pair(a, b);
  if (!(c > 0.0 && c < 1.0)) {
    throw ValidationError("mixing constant c must lie in (0, 1)");
  }
  const std::vector<double> fa = a.evaluate(grid);
  const std::vector<double> fb = b.evaluate(grid);
  check_grid_mass(grid, fa, "first density");
  check_grid_mass(grid, fb, "second density");
  std::vector<double> integrand(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    integrand[i] = generalized_js_point(fa[i], fb[i], c);
  }
  QuadratureResult r = integrate(grid, integrand);
  r.value = std::max(r.value, 0.0);
  return r;
}

QuadratureResult js_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               double c) {
  check_pair(a, b);
  return js_continuous(a, b, c, pair_grid(a, b));
}

}  // namespace gls
