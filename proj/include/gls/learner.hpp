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

#ifndef GLS_LEARNER_HPP_
#define GLS_LEARNER_HPP_

// The triplet (g, h, w): a feed-forward transformation g, a linear-softmax
// hypothesis h, and importance weights w, trained by alternating BBSE
// updates of w with gradient steps on (g, h).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gls/error.hpp"
#include "gls/kernels.hpp"
#include "gls/random.hpp"
#include "gls/shiftgen.hpp"
#include "gls/weights.hpp"

namespace gls {

enum class Activation { kTanh, kLeakyRelu, kIdentity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

inline constexpr double kLeakyReluSlope = 0.2;

struct DenseLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kTanh;
};

struct ModelParams {
  std::vector<DenseLayer> g_layers;
  Eigen::MatrixXd h_weight;  // d_z x K
  Eigen::VectorXd h_bias;    // K
  // Fixed standardization x -> (x - input_mean) / input_scale applied before
  // the first layer; fitted on the source features by train() and excluded
  // from the trainable parameters. Empty vectors leave inputs unchanged.
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;

  int input_dim() const;
  int z_dim() const;
  int num_classes() const { return static_cast<int>(h_bias.size()); }
  void validate() const;

  // Same shapes, all zeros.
  ModelParams zeros_like() const;
  Eigen::Index num_parameters() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  // this += scale * other (shapes must match).
  void axpy(double scale, const ModelParams& other);

  // Glorot-uniform weights, zero biases. `hidden` lists the hidden widths;
  // the last g layer maps to z_dim with the same activation.
  static ModelParams init(int input_dim, const std::vector<int>& hidden,
                          int z_dim, int num_classes, Activation activation,
                          Rng& rng);
};

struct ForwardPass {
  Eigen::MatrixXd z;       // representation g(X)
  Eigen::MatrixXd logits;  // Z h_weight + h_bias
  Eigen::MatrixXd probs;   // row-wise softmax
  // Layer inputs (inputs[0] = X) and pre-activations, kept for backprop.
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre_activations;
};

// Throws NumericError naming the layer when a non-finite value appears.
ForwardPass forward(const ModelParams& m, const Eigen::MatrixXd& x);

// (1/n) Σ_i w[y_i] · (−ln max(probs(i, y_i), 1e-12)).
double weighted_risk(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                     const std::vector<double>& class_weights);
double weighted_risk(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                     const ImportanceWeights& w);

// Row-wise argmax; ties go to the smaller class index.
std::vector<int> pseudo_label(const Eigen::MatrixXd& probs);

double accuracy(const std::vector<int>& predicted,
                const std::vector<int>& labels);

enum class Framework { kCovariate, kLabelOnly, kConditionalOnly, kGls };

std::string to_string(Framework f);
Framework framework_from_string(const std::string& name);

// Which predictor feeds the BBSE confusion matrix after warm-up.
enum class ConfusionSource { kLive, kWarmupFrozen };

// Class weights of the conditional discrepancy term. kSource: P^w_Y for gls
// and the batch source label frequencies for conditionalOnly. kTarget: the
// target pseudo-label frequencies Q̂_Y.
enum class ConditionalWeighting { kSource, kTarget };

std::string to_string(ConditionalWeighting c);
ConditionalWeighting conditional_weighting_from_string(const std::string& name);

struct TrainConfig {
  Framework framework = Framework::kGls;
  double lambda_g = 1.0;
  double learning_rate = 0.5;
  int warmup_epochs = -1;  // -1: 40, scaled by max_iters / 200 when below 200
  int max_iters = 200;     // total epochs including warm-up
  int batch_size = 0;      // 0: full batch up to 2000 rows, else 256
  KernelKind kernel = KernelKind::kGaussian;
  double bandwidth = 0.0;  // 0: median heuristic, frozen at warm-up end
  WeightMethod weight_method = WeightMethod::kQp;
  double weight_smoothing = 0.5;
  double w_max = 50.0;
  ConfusionSource confusion_source = ConfusionSource::kLive;
  ConditionalWeighting conditional_weighting = ConditionalWeighting::kSource;
  double pseudo_label_threshold = 0.0;  // 0 disables confidence filtering
  std::vector<int> hidden = {16};
  int z_dim = 8;
  Activation activation = Activation::kTanh;
  double loss_bound = 1.0;  // M, reported alongside bound checks
  std::uint64_t seed = 0;

  void validate() const;
  int resolved_warmup() const;
  int resolved_batch_size(int n) const;
};

// A labelled source batch and a target batch. Target pseudo-labels are
// required whenever a conditional term is active.
struct ObjectiveInputs {
  const Eigen::MatrixXd* source_x = nullptr;
  const std::vector<int>* source_labels = nullptr;
  const Eigen::MatrixXd* target_x = nullptr;
  const std::vector<int>* target_pseudo = nullptr;
};

struct ObjectiveValue {
  double loss = 0.0;
  double risk = 0.0;
  double discrepancy = 0.0;
  ModelParams grads;
  std::vector<int> dropped_classes;
};

// Loss of the selected framework and its exact gradient:
//   covariate:        ε_P(h∘g) + λ_g · MMD²(P_Z, Q_Z)
//   labelOnly:        ε_{P^w}(h∘g)
//   conditionalOnly:  ε_P(h∘g) + λ_g · CMMD(P_{Z|Y}, Q_{Z|Y}), weights P_Y
//   gls:              ε_{P^w}(h∘g) + λ_g · CMMD(P^w_{Z|Y}, Q_{Z|Y}), weights P^w_Y
// The risk uses an exact log-softmax. Classes absent from a batch are dropped
// from the discrepancy and the remaining class weights renormalized.
ObjectiveValue objective(Framework framework, const ModelParams& m,
                         const ObjectiveInputs& batch,
                         const ImportanceWeights& w, const KernelSpec& kernel,
                         double lambda_g,
                         ConditionalWeighting weighting = ConditionalWeighting::kSource);

struct TrainTraceRow {
  int epoch = 0;
  bool warmup = false;
  double loss = 0.0;
  double src_acc = 0.0;
  double tgt_acc = 0.0;
  double tv_label = 0.0;   // d_TV(P^w_Y, Q̂_Y)
  double cond_disc = 0.0;  // CMMD on full data with target pseudo-labels
  int dropped_classes = 0;
};

struct TrainTrace {
  std::vector<TrainTraceRow> rows;
  int warmup_epochs = 0;
  double bandwidth = 0.0;
  int weight_failures = 0;  // BBSE solves that failed and kept the old w
  int dropped_class_steps = 0;
};

struct TrainResult {
  ModelParams model;
  ImportanceWeights weights;
  TrainTrace trace;
  KernelSpec kernel;
};

class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainTrace trace)
      : NumericError(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

// Warm-up on source risk (w ≡ 1, λ_g = 0), then per epoch: forward both
// domains, pseudo-label the target, update w by BBSE with smoothing (label
// and gls frameworks), and step on the framework objective. Target labels
// are used only for the trace. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const SampleSet& source, const SampleSet& target,
                  const TrainConfig& cfg);

// Predicted labels of a model on a feature matrix.
std::vector<int> predict(const ModelParams& m, const Eigen::MatrixXd& x);

}  // namespace gls

#endif  // GLS_LEARNER_HPP_
