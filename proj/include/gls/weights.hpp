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

#ifndef GLS_WEIGHTS_HPP_
#define GLS_WEIGHTS_HPP_

// Black-box shift estimation of per-class importance weights.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gls/divergences.hpp"

namespace gls {

// entries(i, j) = p(Ŷ = i, Y = j) on the source sample.
struct ConfusionJoint {
  Eigen::MatrixXd entries;

  int num_classes() const { return static_cast<int>(entries.rows()); }
  // Column sums, i.e. the empirical source label distribution.
  DiscreteDistribution label_marginal() const;
};

enum class WeightMethod { kQp, kPinv };

std::string to_string(WeightMethod m);
WeightMethod weight_method_from_string(const std::string& name);

// Nonnegative per-class weights w with wᵀ p_Y = 1.
struct ImportanceWeights {
  std::vector<double> w;
  DiscreteDistribution reference_labels = DiscreteDistribution::uniform(2);
  std::string method = "oracle";
  double kkt_residual = 0.0;
  int iterations = 0;

  int num_classes() const { return static_cast<int>(w.size()); }
  // w ∘ p_Y as a distribution.
  DiscreteDistribution reweighted_labels() const;
  void validate(double tol = 1e-9) const;

  static ImportanceWeights ones(const DiscreteDistribution& p);
};

ConfusionJoint confusion_plugin(const std::vector<int>& predictions,
                                const std::vector<int>& labels, int k);

DiscreteDistribution pred_marginal(const std::vector<int>& predictions, int k);

struct QpOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  // stop once the KKT residual drops below
};

// Solves min ‖q̂ − C w‖² s.t. w ≥ 0, wᵀ p = 1 (kQp), or takes the clipped and
// rescaled pseudo-inverse solution (kPinv). Throws NumericError if the QP
// misses a KKT residual of 1e-8 within the iteration budget.
ImportanceWeights bbse_solve(const DiscreteDistribution& q_hat,
                             const ConfusionJoint& c,
                             const DiscreteDistribution& p_y,
                             WeightMethod method = WeightMethod::kQp,
                             const QpOptions& options = {});

// BBSE objective ‖q̂ − C w‖².
double bbse_objective(const DiscreteDistribution& q_hat,
                      const ConfusionJoint& c, const std::vector<double>& w);

// Projected-gradient fixed-point residual ‖w − Π(w − ∇f(w)/L)‖∞ · L, zero
// exactly at the constrained optimum.
double bbse_kkt_residual(const DiscreteDistribution& q_hat,
                         const ConfusionJoint& c,
                         const DiscreteDistribution& p_y,
                         const std::vector<double>& w);

// Euclidean projection onto {w ≥ 0, wᵀ p = 1}.
std::vector<double> project_weight_set(const std::vector<double>& v,
                                       const DiscreteDistribution& p);

// w* = q_Y / p_Y. Throws ValidationError on a zero entry of p_Y.
ImportanceWeights oracle_weights(const DiscreteDistribution& p_y,
                                 const DiscreteDistribution& q_y);

// Caps weights at w_max and rescales the uncapped ones so wᵀ p = 1 again.
// Throws NumericError when the cap makes the constraint unreachable.
ImportanceWeights clip_weights(const ImportanceWeights& w, double w_max);

// s · previous + (1 − s) · update; stays feasible since the set is convex.
ImportanceWeights smooth_weights(const ImportanceWeights& previous,
                                 const ImportanceWeights& update,
                                 double smoothing);

}  // namespace gls

#endif  // GLS_WEIGHTS_HPP_
