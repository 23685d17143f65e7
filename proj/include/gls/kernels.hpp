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

#ifndef GLS_KERNELS_HPP_
#define GLS_KERNELS_HPP_

// Kernels, Gram matrices, MMD², and the class-weighted conditional
// discrepancy. Sample blocks are row-major: one sample per row.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gls/divergences.hpp"
#include "gls/random.hpp"

namespace gls {

enum class KernelKind { kLinear, kPolynomial2, kLaplacian, kGaussian };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  // σ: divides the squared L2 distance (gaussian) or the L1 distance
  // (laplacian). Unused by linear and polynomial2.
  double bandwidth = 1.0;

  bool needs_bandwidth() const {
    return kind == KernelKind::kGaussian || kind == KernelKind::kLaplacian;
  }
  void validate() const;
};

using GramMatrix = Eigen::MatrixXd;

enum class MmdEstimator { kBiased, kUnbiased };

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& z1,
                   const Eigen::VectorXd& z2);

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& a,
                const Eigen::MatrixXd& b);

double mmd2(const KernelSpec& spec, const Eigen::MatrixXd& s,
            const Eigen::MatrixXd& t,
            MmdEstimator estimator = MmdEstimator::kBiased);

// MMD² together with its gradient with respect to every sample coordinate.
struct Mmd2WithGradient {
  double value = 0.0;
  Eigen::MatrixXd d_source;  // same shape as s
  Eigen::MatrixXd d_target;  // same shape as t
};

Mmd2WithGradient mmd2_with_gradient(
    const KernelSpec& spec, const Eigen::MatrixXd& s, const Eigen::MatrixXd& t,
    MmdEstimator estimator = MmdEstimator::kBiased);

// Σ_y w[y] · MMD²(S | Y = y, T | Y = y). Classes with zero weight are
// skipped. A weighted class missing from either side throws
// ClassAbsentError.
double conditional_discrepancy(const KernelSpec& spec,
                               const Eigen::MatrixXd& s,
                               const std::vector<int>& s_labels,
                               const Eigen::MatrixXd& t,
                               const std::vector<int>& t_labels,
                               const DiscreteDistribution& class_weights,
                               MmdEstimator estimator = MmdEstimator::kBiased);

struct ConditionalDiscrepancy {
  double value = 0.0;
  Eigen::MatrixXd d_source;
  Eigen::MatrixXd d_target;
  // Classes removed from the sum because a side had too few samples; the
  // remaining weights were renormalized.
  std::vector<int> dropped;
};

// Training variant: drops absent classes and renormalizes the remaining
// weights instead of throwing. Gradients are filled when requested.
ConditionalDiscrepancy conditional_discrepancy_dropping(
    const KernelSpec& spec, const Eigen::MatrixXd& s,
    const std::vector<int>& s_labels, const Eigen::MatrixXd& t,
    const std::vector<int>& t_labels, const DiscreteDistribution& class_weights,
    MmdEstimator estimator, bool with_gradient);

// Median of pairwise squared L2 distances (gaussian) or L1 distances
// (laplacian) over at most `subsample` rows drawn with `rng`. Falls back to 1
// when the median is zero.
double median_heuristic(KernelKind kind, const Eigen::MatrixXd& z, Rng& rng,
                        int subsample = 512);

}  // namespace gls

#endif  // GLS_KERNELS_HPP_
