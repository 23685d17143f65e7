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

#ifndef GLS_BOUNDS_HPP_
#define GLS_BOUNDS_HPP_

// End-to-end checks of the generalization inequalities on scenarios and
// models. Each check returns a BoundReport carrying both sides, the slack,
// and the tolerance decomposition.

#include <string>
#include <vector>

#include "gls/mixture.hpp"
#include "gls/oracle.hpp"
#include "gls/shiftgen.hpp"

namespace gls {

enum class BoundKind { kUpper, kLower };

enum class BoundStatus { kHolds, kViolated, kAssumptionUnmet };

std::string to_string(BoundStatus s);

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string name;
  BoundKind kind = BoundKind::kUpper;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs − lhs (upper) or lhs − rhs (lower)
  double tolerance = 0.0;
  bool holds = false;  // slack ≥ −tolerance
  BoundStatus status = BoundStatus::kViolated;
  std::string digest;            // hex FNV-1a of the inputs
  std::vector<BoundTerm> terms;  // rhs pieces and tolerance components

  // Reports whose premise failed are excluded from pass/fail tallies.
  bool counted() const { return status != BoundStatus::kAssumptionUnmet; }
};

// Fills slack, holds and status from the two sides. `assumption_met` false
// marks the report kAssumptionUnmet regardless of the slack.
BoundReport make_report(std::string name, BoundKind kind, double lhs, double rhs,
                        double tolerance, std::string digest,
                        std::vector<BoundTerm> terms, bool assumption_met = true);

// Digest of a scenario's specs, a weight vector, and extra parameters.
std::string inputs_digest(const ShiftScenario& scenario,
                          const std::vector<double>& w,
                          const std::vector<double>& extra = {});

// |ε_{P^w}(h) − ε_Q(h)| ≤ 2M [d_TV(P^w_Y, Q_Y) + min{E_{P^w_Y} c_y, E_{Q_Y} c_y}]
// with zero-one loss and c_y = d_TV(P_{X|Y=y}, Q_{X|Y=y}). Risks are Monte
// Carlo with independent streams per domain.
BoundReport sufficiency_check(const ShiftScenario& scenario,
                              const ProbabilityFn& h,
                              const std::vector<double>& w, double loss_bound,
                              const MonteCarloConfig& mc,
                              const std::vector<double>& model_digest = {});
BoundReport sufficiency_check(const ShiftScenario& scenario,
                              const ModelParams& m,
                              const std::vector<double>& w, double loss_bound,
                              const MonteCarloConfig& mc);

// Posterior disagreement ≥ I^w(Z;D|Y) / (2(1 − b)), b = min{a, 1 − a}, under
// d_{JS,a}(P^w_Y, Q_Y) ≥ d_{JS,a}(P^w_Z, Q_Z). `tolerance` is added to the
// quadrature error estimates.
BoundReport necessity_check(const ShiftScenario& scenario,
                            const std::vector<double>& w, double a,
                            const AffineMap& g, double tolerance = 1e-4);

// ε_P(h∘g) + ε_Q(h∘g) ≥ (1/2)[d_JS(P_Y, Q_Y) − d_JS(P_Z, Q_Z)]² under
// d_JS(P_Y, Q_Y) ≥ d_JS(P_Z, Q_Z). The square-root form is listed among the
// terms.
BoundReport zhao_lower_bound_check(const ShiftScenario& scenario,
                                   const ProbabilityFn& h_on_z,
                                   const AffineMap& g,
                                   const MonteCarloConfig& mc,
                                   const std::vector<double>& model_digest = {});

// |ε^Bayes_{P^w} − ε^Bayes_Q| ≤ 2M d_TV(P^w_{ZY}, Q_{ZY}).
BoundReport bayes_gap_check(const ShiftScenario& scenario,
                            const std::vector<double>& w, double loss_bound,
                            const AffineMap& g);

struct ProbeCandidate {
  double scale = 1.0;  // target map x -> scale · x + shift
  double shift = 0.0;
  double marginal_tv = 0.0;
  double conditional_tv = 0.0;  // E_{Q_Y}[d_TV(P_{Z|Y}, Q_{Z|Y})]
};

struct ProbeOptions {
  std::vector<double> scales;  // empty: 25 log-spaced values in [0.5, 2]
  std::vector<double> shifts;  // empty: 161 values in [−8, 8]
  double threshold = 0.05;
  int points = 1025;
};

struct ImpossibilityReport {
  double label_tv = 0.0;
  double min_pairwise_l1 = 0.0;
  ProbeCandidate best;     // minimizer of max{marginal, conditional}
  double best_value = 0.0; // max{marginal, conditional} at best
  bool joint_match_found = false;  // some candidate has both below threshold
  std::vector<ProbeCandidate> pareto;  // sorted by marginal TV ascending
  std::vector<ProbeCandidate> candidates;

  // Lower bound report best_value ≥ threshold.
  BoundReport as_bound(double threshold, const std::string& digest) const;
};

// Searches target-side affine maps against the identity on the source in
// 1-D. Class conditionals within each domain must be pairwise at L1
// distance ≥ 0.1.
ImpossibilityReport impossibility_probe(const ShiftScenario& scenario,
                                        const ProbeOptions& options = {});

}  // namespace gls

#endif  // GLS_BOUNDS_HPP_
