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

#ifndef GLS_MIXTURE_HPP_
#define GLS_MIXTURE_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gls/quadrature.hpp"

namespace gls {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// z -> A z + b.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  static AffineMap identity(int dim);
  static AffineMap scalar(double scale, double shift);
  int in_dim() const { return static_cast<int>(linear.cols()); }
  int out_dim() const { return static_cast<int>(linear.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const {
    return linear * z + offset;
  }
};

// Finite Gaussian mixture. Weights must form a probability vector and every
// covariance must admit a Cholesky factorization.
class MixtureDensity {
 public:
  explicit MixtureDensity(std::vector<GaussianComponent> components);

  static MixtureDensity gaussian(Eigen::VectorXd mean,
                                 Eigen::MatrixXd covariance);
  static MixtureDensity isotropic(Eigen::VectorXd mean, double variance);

  // Σ_k weights[k] · parts[k], flattened into a single mixture.
  static MixtureDensity combine(std::span<const double> weights,
                                std::span<const MixtureDensity> parts);

  int dim() const { return dim_; }
  const std::vector<GaussianComponent>& components() const {
    return components_;
  }

  double density(const Eigen::VectorXd& z) const;
  double log_density(const Eigen::VectorXd& z) const;
  std::vector<double> evaluate(const QuadratureGrid& grid) const;
  // Log density at every node.
  std::vector<double> evaluate_log(const QuadratureGrid& grid) const;

  // Gaussian pushforward through z -> A z + b. A must have full row rank.
  MixtureDensity pushforward(const AffineMap& map) const;

  // Box [min mean - 8 max sd, max mean + 8 max sd] per axis.
  QuadratureGrid covering_grid(int points = 0) const;

 private:
  struct Factor {
    Eigen::MatrixXd chol;  // lower triangular
    double log_norm;       // log weight - log((2π)^{d/2} |Σ|^{1/2})
  };

  std::vector<GaussianComponent> components_;
  std::vector<Factor> factors_;
  int dim_ = 0;
};

// Smallest grid covering all of the given densities.
QuadratureGrid covering_grid(std::span<const MixtureDensity* const> densities,
                             int points = 0);

double log_sum_exp(std::span<const double> values);

}  // namespace gls

#endif  // GLS_MIXTURE_HPP_
