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

#ifndef GLS_ORACLE_HPP_
#define GLS_ORACLE_HPP_

// Exact ground truth on scenario specs: Bayes classifiers and error rates,
// Monte-Carlo true risks, posterior disagreement and the divergence terms of
// the domain/label mutual informations. Integrals need dim <= 3.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gls/divergences.hpp"
#include "gls/learner.hpp"
#include "gls/mixture.hpp"
#include "gls/quadrature.hpp"
#include "gls/shiftgen.hpp"

namespace gls {

// Maps an n x d feature block to an n x K matrix of class probabilities.
using ProbabilityFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// argmax_k p_Y(k) · p_{X|Y=k}(x), computed in log space; ties go to the
// smaller index.
class BayesClassifier {
 public:
  explicit BayesClassifier(DomainSpec spec);

  int operator()(const Eigen::VectorXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  const DomainSpec& spec() const { return spec_; }

 private:
  DomainSpec spec_;
  std::vector<double> log_priors_;
};

BayesClassifier bayes_classifier(const DomainSpec& spec);

// ∫ (Σ_k π_k f_k − max_k π_k f_k) by quadrature.
QuadratureResult bayes_error(const DomainSpec& spec, const QuadratureGrid& grid);
QuadratureResult bayes_error(const DomainSpec& spec);

ProbabilityFn probabilities_of(const ModelParams& m);
// One-hot probabilities of the Bayes decision.
ProbabilityFn probabilities_of(const BayesClassifier& f);
ProbabilityFn constant_classifier(int label, int num_classes);
// Applies an affine map to the features before `inner`.
ProbabilityFn compose(const ProbabilityFn& inner, const AffineMap& g);

enum class LossKind { kZeroOne, kCrossEntropy };

struct MonteCarloConfig {
  int samples = 200000;
  std::uint64_t seed = 0;
};

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo E_{spec}[ℓ(h(X), Y)]. Zero-one loss uses the argmax with ties
// to the smaller index; cross-entropy floors probabilities at 1e-12.
RiskEstimate true_risk(const DomainSpec& spec, const ProbabilityFn& h,
                       LossKind loss, const MonteCarloConfig& mc = {});
RiskEstimate true_risk(const DomainSpec& spec, const ModelParams& m,
                       LossKind loss, const MonteCarloConfig& mc = {});

// Class conditionals and labels in the representation space of an affine g.
struct ZSpaceScenario {
  DomainSpec source_w;  // P^w: source conditionals, labels w ∘ p_Y
  DomainSpec target;    // Q
};

ZSpaceScenario z_space(const ShiftScenario& scenario,
                       const std::vector<double>& w, const AffineMap& g);

// Smallest default-resolution grid covering every class conditional of both
// domains.
QuadratureGrid scenario_grid(const ZSpaceScenario& z, int points = 0);

// ∫ γ(z) d_JS(P^w_{Y|Z=z}, Q_{Y|Z=z}) dz with γ = max{p^w_Z, q_Z}.
QuadratureResult posterior_disagreement(const ShiftScenario& scenario,
                                        const std::vector<double>& w,
                                        const AffineMap& g,
                                        const QuadratureGrid& grid);
QuadratureResult posterior_disagreement(const ShiftScenario& scenario,
                                        const std::vector<double>& w,
                                        const AffineMap& g);

// E_{R^w_Y}[d_{JS,a}(P^w_{Z|Y}, Q_{Z|Y})] with R^w_Y = (1 − a) P^w_Y + a Q_Y.
QuadratureResult conditional_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g,
                                         const QuadratureGrid& grid);
QuadratureResult conditional_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g);

struct MarginalDivergences {
  double label_term = 0.0;  // d_{JS,a}(P^w_Y, Q_Y), exact
  QuadratureResult z_term;  // d_{JS,a}(P^w_Z, Q_Z)
};

MarginalDivergences marginal_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g,
                                         const QuadratureGrid& grid);
MarginalDivergences marginal_mutual_info(const ShiftScenario& scenario,
                                         const std::vector<double>& w, double a,
                                         const AffineMap& g);

// d_TV(P^w_{ZY}, Q_{ZY}) = (1/2) Σ_y ∫ |w_y p_y f_y − q_y g_y|.
QuadratureResult joint_tv(const ShiftScenario& scenario,
                          const std::vector<double>& w, const AffineMap& g,
                          const QuadratureGrid& grid);
QuadratureResult joint_tv(const ShiftScenario& scenario,
                          const std::vector<double>& w, const AffineMap& g);

}  // namespace gls

#endif  // GLS_ORACLE_HPP_
