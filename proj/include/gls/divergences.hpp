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

#ifndef GLS_DIVERGENCES_HPP_
#define GLS_DIVERGENCES_HPP_

// Divergences between label distributions (exact) and between
// low-dimensional mixture densities (tensor-grid quadrature). Natural log
// throughout.

#include <span>
#include <vector>

#include "gls/mixture.hpp"
#include "gls/quadrature.hpp"

namespace gls {

// Probability vector over K classes. Entries are nonnegative and sum to one
// within 1e-12.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> probs);

  // Rescales nonnegative masses to sum to one.
  static DiscreteDistribution normalized(std::vector<double> masses);
  static DiscreteDistribution uniform(int k);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  std::span<const double> span() const { return probs_; }

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

// Σ p_i ln(p_i / q_i). Returns +infinity when some q_i = 0 < p_i.
double kl_divergence(const DiscreteDistribution& p,
                     const DiscreteDistribution& q);

// (1 - c) KL(p || m) + c KL(q || m) with m = (1 - c) p + c q, c in (0, 1).
double generalized_js(const DiscreteDistribution& p,
                      const DiscreteDistribution& q, double c);

inline double js_divergence(const DiscreteDistribution& p,
                            const DiscreteDistribution& q) {
  return generalized_js(p, q, 0.5);
}

double tv_distance(const DiscreteDistribution& p,
                   const DiscreteDistribution& q);

// (1/2) ∫ |a - b|. Throws ValidationError when dim > 3, when the
// dimensions differ, or when the grid misses more than 1e-6 of either mass.
QuadratureResult tv_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               const QuadratureGrid& grid);
QuadratureResult tv_continuous(const MixtureDensity& a,
                               const MixtureDensity& b);

// Generalized JS divergence between two densities.
QuadratureResult js_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               double c, const QuadratureGrid& grid);
QuadratureResult js_continuous(const MixtureDensity& a, const MixtureDensity& b,
                               double c);

// Pointwise integrand helpers shared with the oracle.
double generalized_js_point(double a, double b, double c);
void check_grid_mass(const QuadratureGrid& grid, std::span<const double> values,
                     const char* what);

}  // namespace gls

#endif  // GLS_DIVERGENCES_HPP_
