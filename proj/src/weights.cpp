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

#include "gls/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gls/error.hpp"

namespace gls {

std::string to_string(WeightMethod m) {
  return m == WeightMethod::kQp ? "qp" : "pinv";
}

WeightMethod weight_method_from_string(const std::string& name) {
  if (name == "qp") return WeightMethod::kQp;
  if (name == "pinv") return WeightMethod::kPinv;
  throw ValidationError("unknown weight method '" + name + "'");
}

DiscreteDistribution ConfusionJoint::label_marginal() const {
  std::vector<double> col(entries.cols());
  for (Eigen::Index j = 0; j < entries.cols(); ++j) col[j] = entries.col(j).sum();
  return DiscreteDistribution::normalized(std::move(col));
}

DiscreteDistribution ImportanceWeights::reweighted_labels() const {
  std::vector<double> m(w.size());
  for (std::size_t y = 0; y < w.size(); ++y) m[y] = w[y] * reference_labels[y];
  return DiscreteDistribution::normalized(std::move(m));
}

void ImportanceWeights::validate(double tol) const {
  if (static_cast<int>(w.size()) != reference_labels.size()) {
    throw ValidationError("weights: size does not match reference labels");
  }
  double dot = 0.0;
  for (std::size_t y = 0; y < w.size(); ++y) {
    if (!(w[y] >= 0.0) || !std::isfinite(w[y])) {
      throw ValidationError("weights must be finite and nonnegative");
    }
    dot += w[y] * reference_labels[y];
  }
  if (std::fabs(dot - 1.0) > tol) {
    throw ValidationError("weights violate wᵀp_Y = 1 (got " +
                          std::to_string(dot) + ")");
  }
}

ImportanceWeights ImportanceWeights::ones(const DiscreteDistribution& p) {
  return {std::vector<double>(p.size(), 1.0), p, "ones", 0.0, 0};
}

ConfusionJoint confusion_plugin(const std::vector<int>& predictions,
                                const std::vector<int>& labels, int k) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw ValidationError("confusion: need equal, non-zero lengths");
  }
  ConfusionJoint c{Eigen::MatrixXd::Zero(k, k)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int yh = predictions[i], y = labels[i];
    if (yh < 0 || yh >= k || y < 0 || y >= k) {
      throw ValidationError("confusion: label out of range at row " +
                            std::to_string(i));
    }
    c.entries(yh, y) += 1.0;
  }
  c.entries /= static_cast<double>(labels.size());
  return c;
}

DiscreteDistribution pred_marginal(const std::vector<int>& predictions, int k) {
  if (predictions.empty()) throw ValidationError("no predictions given");
  std::vector<double> counts(k, 0.0);
  for (int y : predictions) {
    if (y < 0 || y >= k) throw ValidationError("prediction out of range");
    counts[y] += 1.0;
  }
  return DiscreteDistribution::normalized(std::move(counts));
}

std::vector<double> project_weight_set(const std::vector<double>& v,
                                       const DiscreteDistribution& p) {
  const std::size_t k = v.size();
  // w_i = max(0, v_i − τ p_i); find τ with Σ p_i w_i = 1 by walking the
  // breakpoints v_i / p_i in decreasing order.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[a] / p[static_cast<int>(a)] > v[b] / p[static_cast<int>(b)];
  });
  double pv = 0.0, pp = 0.0, tau = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const auto i = static_cast<int>(order[r]);
    pv += p[i] * v[i];
    pp += p[i] * p[i];
    tau = (pv - 1.0) / pp;
    const bool last = r + 1 == k;
    if (last) break;
    const auto next = static_cast<int>(order[r + 1]);
    if (v[next] / p[next] <= tau) break;
  }
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = std::max(0.0, v[i] - tau * p[static_cast<int>(i)]);
  }
  return w;
}

namespace {

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

std::vector<double> as_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

void check_problem(const DiscreteDistribution& q_hat, const ConfusionJoint& c,
                   const DiscreteDistribution& p_y) {
  const int k = p_y.size();
  if (q_hat.size() != k || c.entries.rows() != k || c.entries.cols() != k) {
    throw ValidationError("BBSE: inconsistent class counts");
  }
  for (int y = 0; y < k; ++y) {
    if (!(p_y[y] > 0.0)) {
      throw ValidationError("BBSE: source label distribution must be "
                            "strictly positive");
    }
  }
}

double lipschitz(const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd ctc = c.transpose() * c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctc,
                                                    Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 1e-12);
}

}  // namespace

double bbse_objective(const DiscreteDistribution& q_hat,
                      const ConfusionJoint& c, const std::vector<double>& w) {
  return (as_vector(q_hat.probs()) - c.entries * as_vector(w)).squaredNorm();
}

double bbse_kkt_residual(const DiscreteDistribution& q_hat,
                         const ConfusionJoint& c,
                         const DiscreteDistribution& p_y,
                         const std::vector<double>& w) {
  const double l = lipschitz(c.entries);
  const Eigen::VectorXd x = as_vector(w);
  const Eigen::VectorXd grad =
      c.entries.transpose() * (c.entries * x - as_vector(q_hat.probs()));
  const Eigen::VectorXd step = x - grad / l;
  const Eigen::VectorXd proj = as_vector(project_weight_set(as_std(step), p_y));
  return l * (x - proj).lpNorm<Eigen::Infinity>();
}

ImportanceWeights bbse_solve(const DiscreteDistribution& q_hat,
                             const ConfusionJoint& c,
                             const DiscreteDistribution& p_y,
                             WeightMethod method, const QpOptions& options) {
  check_problem(q_hat, c, p_y);
  const int k = p_y.size();
  const Eigen::VectorXd q = as_vector(q_hat.probs());
  ImportanceWeights out{{}, p_y, to_string(method), 0.0, 0};

  if (method == WeightMethod::kPinv) {
    const Eigen::MatrixXd pinv =
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(c.entries)
            .pseudoInverse();
    Eigen::VectorXd w = (pinv * q).cwiseMax(0.0);
    const double dot = w.dot(as_vector(p_y.probs()));
    if (!(dot > 0.0)) {
      throw NumericError("BBSE pinv: clipped solution is identically zero");
    }
    w /= dot;
    out.w = as_std(w);
    out.kkt_residual = bbse_kkt_residual(q_hat, c, p_y, out.w);
    return out;
  }

  // Accelerated projected gradient on f(w) = ½‖q − C w‖² with step 1/L and
  // gradient-based momentum restart.
  const Eigen::MatrixXd ctc = c.entries.transpose() * c.entries;
  const Eigen::VectorXd ctq = c.entries.transpose() * q;
  const double l = lipschitz(c.entries);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k);  // w ≡ 1 is always feasible
  Eigen::VectorXd y = x;
  double t = 1.0;
  double residual = bbse_kkt_residual(q_hat, c, p_y, as_std(x));
  int it = 0;
  for (; it < options.max_iterations && residual > options.tolerance; ++it) {
    const Eigen::VectorXd grad = ctc * y - ctq;
    const Eigen::VectorXd next =
        as_vector(project_weight_set(as_std(y - grad / l), p_y));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - next).dot(next - x) > 0.0) {
      // Momentum points uphill: restart from the plain projected step.
      y = next;
      t = 1.0;
    } else {
      y = next + ((t - 1.0) / t_next) * (next - x);
      t = t_next;
    }
    x = next;
    if (it % 10 == 9) residual = bbse_kkt_residual(q_hat, c, p_y, as_std(x));
  }
  residual = bbse_kkt_residual(q_hat, c, p_y, as_std(x));
  out.w = as_std(x);
  out.kkt_residual = residual;
  out.iterations = it;
  if (residual > 1e-8) {
    throw NumericError("BBSE QP did not converge after " + std::to_string(it) +
                       " iterations (KKT residual " + std::to_string(residual) +
                       ")");
  }
  return out;
}

ImportanceWeights oracle_weights(const DiscreteDistribution& p_y,
                                 const DiscreteDistribution& q_y) {
  if (p_y.size() != q_y.size()) {
    throw ValidationError("oracle weights: size mismatch");
  }
  ImportanceWeights out{std::vector<double>(p_y.size()), p_y, "oracle", 0.0, 0};
  for (int y = 0; y < p_y.size(); ++y) {
    if (!(p_y[y] > 0.0)) {
      throw ValidationError("oracle weights: p_Y has a zero entry at class " +
                            std::to_string(y));
    }
    out.w[y] = q_y[y] / p_y[y];
  }
  return out;
}

ImportanceWeights clip_weights(const ImportanceWeights& w, double w_max) {
  if (!(w_max >= 1.0)) {
    throw ValidationError("weight cap must be >= 1 to stay feasible");
  }
  // Grow the capped set until the rescaled free entries respect the cap.
  const int k = w.num_classes();
  ImportanceWeights out = w;
  std::vector<bool> capped(k, false);
  for (int round = 0; round <= k; ++round) {
    double capped_mass = 0.0, free_mass = 0.0;
    for (int y = 0; y < k; ++y) {
      const double p = out.reference_labels[y];
      if (capped[y]) {
        capped_mass += w_max * p;
      } else {
        free_mass += w.w[y] * p;
      }
    }
    if (!(free_mass > 0.0) || capped_mass > 1.0) {
      throw NumericError("weights cannot be capped at " +
                         std::to_string(w_max) + " while keeping w'p = 1");
    }
    const double scale = (1.0 - capped_mass) / free_mass;
    bool grew = false;
    for (int y = 0; y < k; ++y) {
      if (!capped[y] && w.w[y] * scale > w_max) {
        capped[y] = true;
        grew = true;
      }
    }
    if (!grew) {
      for (int y = 0; y < k; ++y) out.w[y] = capped[y] ? w_max : w.w[y] * scale;
      return out;
    }
  }
  throw NumericError("weight capping did not settle");
}

ImportanceWeights smooth_weights(const ImportanceWeights& previous,
                                 const ImportanceWeights& update,
                                 double smoothing) {
  if (previous.w.size() != update.w.size()) {
    throw ValidationError("smoothing: weight sizes differ");
  }
  if (!(smoothing >= 0.0 && smoothing <= 1.0)) {
    throw ValidationError("smoothing factor must lie in [0, 1]");
  }
  ImportanceWeights out = update;
  for (std::size_t y = 0; y < out.w.size(); ++y) {
    out.w[y] = smoothing * previous.w[y] + (1.0 - smoothing) * update.w[y];
  }
  return out;
}

}  // namespace gls
