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

#ifndef GLS_SHIFTGEN_HPP_
#define GLS_SHIFTGEN_HPP_

// Synthetic source/target domain pairs with controllable label shift and
// conditional shift, plus the class-subsampling protocol.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gls/divergences.hpp"
#include "gls/mixture.hpp"

namespace gls {

enum class DomainTag { kSource, kTarget };

std::string to_string(DomainTag tag);
DomainTag domain_tag_from_string(const std::string& name);

// Class conditionals P_{X|Y=y} and label distribution P_Y of one domain.
struct DomainSpec {
  std::vector<MixtureDensity> class_conditionals;
  DiscreteDistribution label_dist = DiscreteDistribution::uniform(2);

  int num_classes() const {
    return static_cast<int>(class_conditionals.size());
  }
  int dim() const { return class_conditionals.front().dim(); }
  void validate() const;

  // Same conditionals, label distribution replaced by w ∘ p_Y.
  DomainSpec reweighted(const std::vector<double>& w) const;
  // Same labels, conditionals pushed through an affine map.
  DomainSpec pushforward(const AffineMap& map) const;
  // Σ_y p_Y(y) P_{X|Y=y}.
  MixtureDensity marginal() const;
};

enum class ShiftDirections {
  kPerClass,  // one seeded unit direction per class
  kShared,    // a single seeded unit direction for every class
};

std::string to_string(ShiftDirections d);
ShiftDirections shift_directions_from_string(const std::string& name);

struct ScenarioParams {
  int num_classes = 2;
  int dim = 1;
  double shift = 0.0;  // mean translation per class, feature units
  DiscreteDistribution source_labels = DiscreteDistribution::uniform(2);
  DiscreteDistribution target_labels = DiscreteDistribution::uniform(2);
  std::uint64_t seed = 0;
  double variance = 1.0;  // isotropic class covariance scale
  ShiftDirections directions = ShiftDirections::kPerClass;
};

struct ShiftScenario {
  ScenarioParams params;
  DomainSpec source;
  DomainSpec target;
  // Unit translation direction of each class (rows).
  Eigen::MatrixXd directions;

  double shift() const { return params.shift; }
};

// Source means sit on the lattice 3·e_{y mod d}·(1 + ⌊y/d⌋); target means are
// source means + shift · direction_y. Fully determined by the params.
ShiftScenario make_scenario(const ScenarioParams& params);

// Lattice mean of class y in dimension dim.
Eigen::VectorXd lattice_mean(int y, int dim);

struct SampleSet {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;
  DomainTag domain = DomainTag::kSource;
  std::optional<std::vector<int>> pseudo_labels;
  int num_classes = 2;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
  std::vector<int> class_counts() const;
  DiscreteDistribution label_frequencies() const;

  bool operator==(const SampleSet& other) const;
};

// n i.i.d. draws: labels from label_dist, features from the conditional.
// Child streams "labels" and "features" of Rng(seed) drive the two parts.
SampleSet sample(const DomainSpec& spec, int n, std::uint64_t seed,
                 DomainTag domain = DomainTag::kSource);

// Keeps ⌈rate · n_y⌉ uniformly chosen rows of each class y < k1 and every row
// of the remaining classes. Row order is preserved.
SampleSet subsample_protocol(const SampleSet& s, int k1, double rate,
                             std::uint64_t seed);

}  // namespace gls

#endif  // GLS_SHIFTGEN_HPP_
