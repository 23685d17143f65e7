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

#include "gls/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace gls {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kLeakyRelu:
      return "leakyrelu";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "leakyrelu") return Activation::kLeakyRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ValidationError("unknown activation '" + name + "'");
}

std::string to_string(Framework f) {
  switch (f) {
    case Framework::kCovariate:
      return "covariate";
    case Framework::kLabelOnly:
      return "labelOnly";
    case Framework::kConditionalOnly:
      return "conditionalOnly";
    case Framework::kGls:
      return "gls";
  }
  return "unknown";
}

Framework framework_from_string(const std::string& name) {
  if (name == "covariate") return Framework::kCovariate;
  if (name == "labelOnly") return Framework::kLabelOnly;
  if (name == "conditionalOnly") return Framework::kConditionalOnly;
  if (name == "gls") return Framework::kGls;
  throw ValidationError("unknown framework '" + name + "'");
}

std::string to_string(ConditionalWeighting c) {
  return c == ConditionalWeighting::kSource ? "source" : "target";
}

ConditionalWeighting conditional_weighting_from_string(const std::string& name) {
  if (name == "source") return ConditionalWeighting::kSource;
  if (name == "target") return ConditionalWeighting::kTarget;
  throw ValidationError("unknown conditional weighting '" + name +
                        "' (expected source or target)");
}

// --- ModelParams -----------------------------------------------------------

int ModelParams::input_dim() const {
  return g_layers.empty() ? static_cast<int>(h_weight.rows())
                          : static_cast<int>(g_layers.front().weight.rows());
}

int ModelParams::z_dim() const { return static_cast<int>(h_weight.rows()); }

void ModelParams::validate() const {
  Eigen::Index width = input_dim();
  for (std::size_t l = 0; l < g_layers.size(); ++l) {
    const auto& layer = g_layers[l];
    if (layer.weight.rows() != width ||
        layer.bias.size() != layer.weight.cols()) {
      throw ValidationError("model: layer " + std::to_string(l) +
                            " dimensions do not chain");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw ValidationError("model: layer " + std::to_string(l) +
                            " has non-finite parameters");
    }
    width = layer.weight.cols();
  }
  if (h_weight.rows() != width || h_weight.cols() != h_bias.size()) {
    throw ValidationError("model: hypothesis dimensions do not chain");
  }
  if (!h_weight.allFinite() || !h_bias.allFinite()) {
    throw ValidationError("model: hypothesis has non-finite parameters");
  }
  if (h_bias.size() < 1) throw ValidationError("model: no classes");
  if (input_mean.size() != input_scale.size() ||
      (input_mean.size() != 0 && input_mean.size() != input_dim())) {
    throw ValidationError("model: input standardization has wrong length");
  }
  if (!input_mean.allFinite() || !input_scale.allFinite() ||
      (input_scale.size() > 0 && input_scale.minCoeff() <= 0.0)) {
    throw ValidationError("model: input scales must be finite and positive");
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& layer : z.g_layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  z.h_weight.setZero();
  z.h_bias.setZero();
  return z;
}

Eigen::Index ModelParams::num_parameters() const {
  Eigen::Index n = h_weight.size() + h_bias.size();
  for (const auto& layer : g_layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

namespace {

template <typename Fn>
void for_each_block(ModelParams& m, Fn&& fn) {
  for (auto& layer : m.g_layers) {
    fn(layer.weight.data(), layer.weight.size());
    fn(layer.bias.data(), layer.bias.size());
  }
  fn(m.h_weight.data(), m.h_weight.size());
  fn(m.h_bias.data(), m.h_bias.size());
}

}  // namespace

Eigen::VectorXd ModelParams::flatten() const {
  Eigen::VectorXd flat(num_parameters());
  Eigen::Index pos = 0;
  auto& self = const_cast<ModelParams&>(*this);
  for_each_block(self, [&](double* data, Eigen::Index n) {
    flat.segment(pos, n) = Eigen::Map<Eigen::VectorXd>(data, n);
    pos += n;
  });
  return flat;
}

void ModelParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != num_parameters()) {
    throw ValidationError("model: flat parameter vector has wrong length");
  }
  Eigen::Index pos = 0;
  for_each_block(*this, [&](double* data, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(data, n) = flat.segment(pos, n);
    pos += n;
  });
}

void ModelParams::axpy(double scale, const ModelParams& other) {
  if (other.g_layers.size() != g_layers.size()) {
    throw ValidationError("model: shapes differ in axpy");
  }
  for (std::size_t l = 0; l < g_layers.size(); ++l) {
    g_layers[l].weight += scale * other.g_layers[l].weight;
    g_layers[l].bias += scale * other.g_layers[l].bias;
  }
  h_weight += scale * other.h_weight;
  h_bias += scale * other.h_bias;
}

ModelParams ModelParams::init(int input_dim, const std::vector<int>& hidden,
                              int z_dim, int num_classes, Activation activation,
                              Rng& rng) {
  if (input_dim < 1 || z_dim < 1 || num_classes < 1) {
    throw ValidationError("model: dimensions must be positive");
  }
  auto glorot = [&rng](int in, int out) {
    const double a = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(in, out);
    for (int c = 0; c < out; ++c)
      for (int r = 0; r < in; ++r) w(r, c) = rng.uniform(-a, a);
    return w;
  };
  ModelParams m;
  int width = input_dim;
  std::vector<int> widths = hidden;
  widths.push_back(z_dim);
  for (int out : widths) {
    if (out < 1) throw ValidationError("model: layer widths must be positive");
    m.g_layers.push_back(
        {glorot(width, out), Eigen::VectorXd::Zero(out), activation});
    width = out;
  }
  m.h_weight = glorot(width, num_classes);
  m.h_bias = Eigen::VectorXd::Zero(num_classes);
  return m;
}

// --- forward / risk ----------------------------------------------------------

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation a) {
  switch (a) {
    case Activation::kTanh:
      return pre.array().tanh();
    case Activation::kLeakyRelu:
      return pre.array().unaryExpr(
          [](double v) { return v > 0.0 ? v : kLeakyReluSlope * v; });
    case Activation::kIdentity:
      return pre;
  }
  return pre;
}

// dA/dpre given pre and the activated output.
Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& pre,
                                      const Eigen::MatrixXd& out,
                                      Activation a) {
  switch (a) {
    case Activation::kTanh:
      return 1.0 - out.array().square();
    case Activation::kLeakyRelu:
      return pre.array().unaryExpr(
          [](double v) { return v > 0.0 ? 1.0 : kLeakyReluSlope; });
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
  }
  return {};
}

// Row-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

}  // namespace

ForwardPass forward(const ModelParams& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.input_dim()) {
    throw ValidationError("forward: input has " + std::to_string(x.cols()) +
                          " columns, model expects " +
                          std::to_string(m.input_dim()));
  }
  ForwardPass f;
  Eigen::MatrixXd a = x;
  if (m.input_mean.size() > 0) {
    a.rowwise() -= m.input_mean.transpose();
    a.array().rowwise() /= m.input_scale.transpose().array();
  }
  for (std::size_t l = 0; l < m.g_layers.size(); ++l) {
    const auto& layer = m.g_layers[l];
    f.inputs.push_back(a);
    Eigen::MatrixXd pre = a * layer.weight;
    pre.rowwise() += layer.bias.transpose();
    a = activate(pre, layer.activation);
    if (!a.allFinite()) {
      throw NumericError("forward: non-finite output in layer " +
                         std::to_string(l));
    }
    f.pre_activations.push_back(std::move(pre));
  }
  f.z = a;
  f.logits = f.z * m.h_weight;
  f.logits.rowwise() += m.h_bias.transpose();
  if (!f.logits.allFinite()) {
    throw NumericError("forward: non-finite logits in hypothesis layer");
  }
  f.probs = log_softmax(f.logits).array().exp();
  return f;
}

double weighted_risk(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                     const std::vector<double>& class_weights) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows() ||
      labels.empty()) {
    throw ValidationError("weighted risk: label count does not match rows");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= probs.cols() ||
        y >= static_cast<int>(class_weights.size())) {
      throw ValidationError("weighted risk: label out of range");
    }
    s += class_weights[y] * -std::log(std::max(probs(i, y), 1e-12));
  }
  return s / static_cast<double>(labels.size());
}

double weighted_risk(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                     const ImportanceWeights& w) {
  return weighted_risk(probs, labels, w.w);
}

std::vector<int> pseudo_label(const Eigen::MatrixXd& probs) {
  std::vector<int> out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k) {
      if (probs(i, k) > probs(i, best)) best = static_cast<int>(k);
    }
    out[i] = best;
  }
  return out;
}

std::vector<int> predict(const ModelParams& m, const Eigen::MatrixXd& x) {
  return pseudo_label(forward(m, x).logits);
}

double accuracy(const std::vector<int>& predicted,
                const std::vector<int>& labels) {
  if (predicted.size() != labels.size() || labels.empty()) {
    throw ValidationError("accuracy: length mismatch");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predicted[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

// --- objective -------------------------------------------------------------

namespace {

// Accumulates parameter gradients of a pass given dL/dZ and dL/dlogits.
void backprop(const ModelParams& m, const ForwardPass& f,
              const Eigen::MatrixXd& d_logits, const Eigen::MatrixXd& d_z_extra,
              ModelParams& grads) {
  grads.h_weight += f.z.transpose() * d_logits;
  grads.h_bias += d_logits.colwise().sum().transpose();
  Eigen::MatrixXd d_a = d_logits * m.h_weight.transpose();
  if (d_z_extra.size() > 0) d_a += d_z_extra;
  for (std::size_t l = m.g_layers.size(); l-- > 0;) {
    const auto& layer = m.g_layers[l];
    const Eigen::MatrixXd& out = l + 1 < m.g_layers.size() ? f.inputs[l + 1] : f.z;
    const Eigen::MatrixXd d_pre =
        d_a.array() *
        activation_derivative(f.pre_activations[l], out, layer.activation)
            .array();
    grads.g_layers[l].weight += f.inputs[l].transpose() * d_pre;
    grads.g_layers[l].bias += d_pre.colwise().sum().transpose();
    if (l > 0) d_a = d_pre * layer.weight.transpose();
  }
}

}  // namespace

ObjectiveValue objective(Framework framework, const ModelParams& m,
                         const ObjectiveInputs& batch,
                         const ImportanceWeights& w, const KernelSpec& kernel,
                         double lambda_g, ConditionalWeighting weighting) {
  if (batch.source_x == nullptr || batch.source_labels == nullptr) {
    throw ValidationError("objective: source batch required");
  }
  const Eigen::MatrixXd& xs = *batch.source_x;
  const std::vector<int>& ys = *batch.source_labels;
  const int k = m.num_classes();
  if (static_cast<Eigen::Index>(ys.size()) != xs.rows() || ys.empty()) {
    throw ValidationError("objective: source labels do not match rows");
  }
  if (w.num_classes() != k) {
    throw ValidationError("objective: weight vector does not match classes");
  }

  const bool weighted =
      framework == Framework::kGls || framework == Framework::kLabelOnly;
  const bool marginal_term = framework == Framework::kCovariate && lambda_g > 0;
  const bool conditional_term =
      (framework == Framework::kGls ||
       framework == Framework::kConditionalOnly) &&
      lambda_g > 0;
  if ((marginal_term || conditional_term) && batch.target_x == nullptr) {
    throw ValidationError("objective: target batch required");
  }
  if (conditional_term && batch.target_pseudo == nullptr) {
    throw ValidationError("objective: target pseudo-labels required");
  }

  ObjectiveValue out;
  out.grads = m.zeros_like();

  const ForwardPass fs = forward(m, xs);
  const Eigen::MatrixXd logp = log_softmax(fs.logits);
  const double n = static_cast<double>(ys.size());
  Eigen::MatrixXd d_logits = fs.probs;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const int y = ys[i];
    if (y < 0 || y >= k) throw ValidationError("objective: label out of range");
    const double wy = weighted ? w.w[y] : 1.0;
    out.risk -= wy * logp(i, y);
    d_logits(i, y) -= 1.0;
    d_logits.row(i) *= wy / n;
  }
  out.risk /= n;

  Eigen::MatrixXd d_zs, d_zt;
  ForwardPass ft;
  if (marginal_term || conditional_term) {
    ft = forward(m, *batch.target_x);
    if (marginal_term) {
      const Mmd2WithGradient g = mmd2_with_gradient(kernel, fs.z, ft.z);
      out.discrepancy = g.value;
      d_zs = lambda_g * g.d_source;
      d_zt = lambda_g * g.d_target;
    } else {
      const DiscreteDistribution class_weights =
          weighting == ConditionalWeighting::kTarget
              ? pred_marginal(*batch.target_pseudo, k)
          : framework == Framework::kGls
              ? w.reweighted_labels()
              : SampleSet{xs, ys, DomainTag::kSource, {}, k}.label_frequencies();
      ConditionalDiscrepancy c = conditional_discrepancy_dropping(
          kernel, fs.z, ys, ft.z, *batch.target_pseudo, class_weights,
          MmdEstimator::kBiased, true);
      out.discrepancy = c.value;
      out.dropped_classes = std::move(c.dropped);
      d_zs = lambda_g * c.d_source;
      d_zt = lambda_g * c.d_target;
    }
  }
  out.loss = out.risk + lambda_g * out.discrepancy;
  backprop(m, fs, d_logits, d_zs, out.grads);
  if (marginal_term || conditional_term) {
    backprop(m, ft, Eigen::MatrixXd::Zero(ft.logits.rows(), ft.logits.cols()),
             d_zt, out.grads);
  }
  return out;
}

// --- training --------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(lambda_g >= 0.0)) throw ValidationError("lambda_g must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (warmup_epochs < -1 || warmup_epochs > max_iters) {
    throw ValidationError("warmup_epochs must lie in [0, max_iters] or be -1");
  }
  if (batch_size < 0) throw ValidationError("batch_size must be >= 0");
  if (bandwidth < 0.0) throw ValidationError("bandwidth must be >= 0");
  if (!(weight_smoothing >= 0.0 && weight_smoothing <= 1.0)) {
    throw ValidationError("weight_smoothing must lie in [0, 1]");
  }
  if (!(w_max >= 1.0)) throw ValidationError("w_max must be >= 1");
  if (!(pseudo_label_threshold >= 0.0 && pseudo_label_threshold < 1.0)) {
    throw ValidationError("pseudo_label_threshold must lie in [0, 1)");
  }
  if (z_dim < 1) throw ValidationError("z_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw ValidationError("hidden widths must be >= 1");
  }
  if (!(loss_bound > 0.0)) throw ValidationError("loss_bound must be > 0");
}

int TrainConfig::resolved_warmup() const {
  if (warmup_epochs >= 0) return warmup_epochs;
  if (max_iters >= 200) return 40;
  return static_cast<int>(std::lround(40.0 * max_iters / 200.0));
}

int TrainConfig::resolved_batch_size(int n) const {
  if (batch_size > 0) return std::min(batch_size, n);
  return n <= 2000 ? n : 256;
}

namespace {

bool uses_weights(Framework f) {
  return f == Framework::kGls || f == Framework::kLabelOnly;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

template <typename T>
std::vector<T> gather_items(const std::vector<T>& v,
                            const std::vector<int>& rows) {
  std::vector<T> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::vector<int> confident_rows(const Eigen::MatrixXd& probs, double threshold) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (threshold <= 0.0 || probs.row(i).maxCoeff() >= threshold) {
      rows.push_back(static_cast<int>(i));
    }
  }
  return rows;
}

}  // namespace

namespace {

void standardize_inputs(ModelParams& m, const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  m.input_mean = x.colwise().mean().transpose();
  m.input_scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - m.input_mean[c]).square().sum() / n;
    m.input_scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
}

}  // namespace

TrainResult train(const SampleSet& source, const SampleSet& target,
                  const TrainConfig& cfg) {
  cfg.validate();
  source.validate();
  target.validate();
  if (source.dim() != target.dim()) {
    throw ValidationError("train: source and target differ in dimension");
  }
  if (source.num_classes != target.num_classes) {
    throw ValidationError("train: source and target differ in class count");
  }
  const int k = source.num_classes;
  const DiscreteDistribution p_hat = source.label_frequencies();
  for (int y = 0; y < k; ++y) {
    if (p_hat[y] == 0.0) {
      throw ValidationError("train: source has no samples of class " +
                            std::to_string(y));
    }
  }

  Rng root(cfg.seed);
  Rng init_rng = root.child("init");
  Rng batch_rng = root.child("batches");
  Rng bandwidth_rng = root.child("bandwidth");

  TrainResult result;
  result.model = ModelParams::init(source.dim(), cfg.hidden, cfg.z_dim, k,
                                   cfg.activation, init_rng);
  standardize_inputs(result.model, source.features);
  result.weights = ImportanceWeights::ones(p_hat);
  result.kernel = KernelSpec{cfg.kernel, cfg.bandwidth > 0 ? cfg.bandwidth : 1.0};
  TrainTrace& trace = result.trace;
  trace.warmup_epochs = cfg.resolved_warmup();

  const bool auto_bandwidth =
      cfg.bandwidth == 0.0 && result.kernel.needs_bandwidth();
  auto refresh_bandwidth = [&]() {
    if (!auto_bandwidth) return;
    const Eigen::MatrixXd zs = forward(result.model, source.features).z;
    const Eigen::MatrixXd zt = forward(result.model, target.features).z;
    Eigen::MatrixXd both(zs.rows() + zt.rows(), zs.cols());
    both << zs, zt;
    result.kernel.bandwidth = median_heuristic(cfg.kernel, both, bandwidth_rng);
  };
  refresh_bandwidth();

  // Q̂_Y for the trace: held-back target labels when present.
  const bool target_labeled = !target.labels.empty();
  const std::optional<DiscreteDistribution> q_true =
      target_labeled ? std::optional(target.label_frequencies()) : std::nullopt;

  const int ns = source.size();
  const int nt = target.size();
  const int batch = cfg.resolved_batch_size(ns);
  std::vector<int> s_order(ns), t_order(nt);
  std::iota(s_order.begin(), s_order.end(), 0);
  std::iota(t_order.begin(), t_order.end(), 0);

  ModelParams frozen_predictor;
  bool have_frozen = false;

  for (int epoch = 0; epoch < cfg.max_iters; ++epoch) try {
    const bool warm = epoch < trace.warmup_epochs;
    if (epoch == trace.warmup_epochs) {
      refresh_bandwidth();
      frozen_predictor = result.model;
      have_frozen = true;
    }
    const Framework fw = warm ? Framework::kLabelOnly : cfg.framework;
    const double lambda = warm ? 0.0 : cfg.lambda_g;
    const ImportanceWeights ones = ImportanceWeights::ones(p_hat);

    // (i) forward both domains, (ii) pseudo-label the target.
    const ForwardPass ft_full = forward(result.model, target.features);
    std::vector<int> t_pseudo = pseudo_label(ft_full.probs);

    // (iii) BBSE update of w.
    if (!warm && uses_weights(cfg.framework)) {
      const ModelParams& predictor =
          cfg.confusion_source == ConfusionSource::kWarmupFrozen && have_frozen
              ? frozen_predictor
              : result.model;
      const std::vector<int> s_pred = predict(predictor, source.features);
      const std::vector<int> t_pred =
          &predictor == &result.model ? t_pseudo
                                      : predict(predictor, target.features);
      try {
        ImportanceWeights update =
            bbse_solve(pred_marginal(t_pred, k),
                       confusion_plugin(s_pred, source.labels, k), p_hat,
                       cfg.weight_method);
        update = clip_weights(update, cfg.w_max);
        result.weights =
            smooth_weights(result.weights, update, cfg.weight_smoothing);
      } catch (const NumericError&) {
        ++trace.weight_failures;
      }
    }
    const ImportanceWeights& w_step = warm ? ones : result.weights;

    // (iv) gradient steps on the objective.
    if (batch < ns) shuffle(s_order, batch_rng);
    if (batch < nt) shuffle(t_order, batch_rng);
    double epoch_loss = 0.0;
    int steps = 0;
    int dropped = 0;
    for (int start = 0; start < ns; start += batch) {
      const int len = std::min(batch, ns - start);
      ObjectiveValue obj;
      if (batch >= ns && batch >= nt) {
        const std::vector<int> keep =
            confident_rows(ft_full.probs, cfg.pseudo_label_threshold);
        if (keep.size() == static_cast<std::size_t>(nt)) {
          obj = objective(fw, result.model,
                          {&source.features, &source.labels, &target.features,
                           &t_pseudo},
                          w_step, result.kernel, lambda,
                          cfg.conditional_weighting);
        } else {
          const Eigen::MatrixXd xt = gather_rows(target.features, keep);
          const std::vector<int> yt = gather_items(t_pseudo, keep);
          obj = objective(fw, result.model,
                          {&source.features, &source.labels, &xt, &yt}, w_step,
                          result.kernel, lambda);
        }
      } else {
        std::vector<int> s_rows(s_order.begin() + start,
                                s_order.begin() + start + len);
        std::vector<int> t_rows;
        for (int i = 0; i < len; ++i) {
          const int r = t_order[(start + i) % nt];
          if (cfg.pseudo_label_threshold <= 0.0 ||
              ft_full.probs.row(r).maxCoeff() >= cfg.pseudo_label_threshold) {
            t_rows.push_back(r);
          }
        }
        const Eigen::MatrixXd xs = gather_rows(source.features, s_rows);
        const std::vector<int> ys = gather_items(source.labels, s_rows);
        const Eigen::MatrixXd xt = gather_rows(target.features, t_rows);
        const std::vector<int> yt = gather_items(t_pseudo, t_rows);
        obj = objective(fw, result.model,
                        {&xs, &ys, t_rows.empty() ? nullptr : &xt, &yt}, w_step,
                        result.kernel, t_rows.empty() ? 0.0 : lambda,
                        cfg.conditional_weighting);
      }
      if (!std::isfinite(obj.loss)) {
        throw TrainingDiverged(
            "training diverged: non-finite loss at epoch " +
                std::to_string(epoch),
            trace);
      }
      epoch_loss += obj.loss;
      ++steps;
      if (!obj.dropped_classes.empty()) {
        ++trace.dropped_class_steps;
        dropped += static_cast<int>(obj.dropped_classes.size());
      }
      result.model.axpy(-cfg.learning_rate, obj.grads);
    }

    // Per-epoch diagnostics on the full data.
    TrainTraceRow row;
    row.epoch = epoch;
    row.warmup = warm;
    row.loss = epoch_loss / std::max(steps, 1);
    row.dropped_classes = dropped;
    {
      const ForwardPass fs = forward(result.model, source.features);
      const ForwardPass ft = forward(result.model, target.features);
      const std::vector<int> s_pred = pseudo_label(fs.probs);
      const std::vector<int> t_pred = pseudo_label(ft.probs);
      row.src_acc = accuracy(s_pred, source.labels);
      row.tgt_acc = target_labeled ? accuracy(t_pred, target.labels) : 0.0;
      const DiscreteDistribution pw = result.weights.reweighted_labels();
      row.tv_label = tv_distance(pw, q_true ? *q_true : pred_marginal(t_pred, k));
      row.cond_disc =
          conditional_discrepancy_dropping(result.kernel, fs.z, source.labels,
                                           ft.z, t_pred, pw,
                                           MmdEstimator::kBiased, false)
              .value;
    }
    trace.rows.push_back(row);
  } catch (const TrainingDiverged&) {
    throw;
  } catch (const NumericError& e) {
    throw TrainingDiverged("training diverged at epoch " +
                               std::to_string(epoch) + ": " + e.what(),
                           trace);
  }
  trace.bandwidth = result.kernel.bandwidth;
  return result;
}

}  // namespace gls
