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

#include "gls/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gls/error.hpp"

namespace gls {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear:
      return "linear";
    case KernelKind::kPolynomial2:
      return "polynomial2";
    case KernelKind::kLaplacian:
      return "laplacian";
    case KernelKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "polynomial2") return KernelKind::kPolynomial2;
  if (name == "laplacian") return KernelKind::kLaplacian;
  if (name == "gaussian") return KernelKind::kGaussian;
  throw ValidationError("unknown kernel kind '" + name + "'");
}

void KernelSpec::validate() const {
  if (needs_bandwidth() && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw ValidationError(to_string(kind) + " kernel needs bandwidth > 0");
  }
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& z1,
                   const Eigen::VectorXd& z2) {
  if (z1.size() != z2.size()) {
    throw ValidationError("kernel arguments differ in dimension");
  }
  switch (spec.kind) {
    case KernelKind::kLinear:
      return z1.dot(z2);
    case KernelKind::kPolynomial2: {
      const double v = z1.dot(z2) + 1.0;
      return v * v;
    }
    case KernelKind::kLaplacian:
      return std::exp(-(z1 - z2).lpNorm<1>() / spec.bandwidth);
    case KernelKind::kGaussian:
      return std::exp(-(z1 - z2).squaredNorm() / spec.bandwidth);
  }
  return 0.0;
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& a,
                const Eigen::MatrixXd& b) {
  spec.validate();
  if (a.rows() == 0 || b.rows() == 0) {
    throw ValidationError("gram: empty sample block");
  }
  if (a.cols() != b.cols()) {
    throw ValidationError("gram: blocks differ in dimension");
  }
  switch (spec.kind) {
    case KernelKind::kLinear:
      return a * b.transpose();
    case KernelKind::kPolynomial2:
      return (a * b.transpose()).array().unaryExpr([](double v) {
        return (v + 1.0) * (v + 1.0);
      });
    case KernelKind::kGaussian: {
      const Eigen::VectorXd na = a.rowwise().squaredNorm();
      const Eigen::VectorXd nb = b.rowwise().squaredNorm();
      Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
      d2.colwise() += na;
      d2.rowwise() += nb.transpose();
      const double inv = 1.0 / spec.bandwidth;
      return d2.array().unaryExpr(
          [inv](double v) { return std::exp(-std::max(v, 0.0) * inv); });
    }
    case KernelKind::kLaplacian: {
      GramMatrix g(a.rows(), b.rows());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
          g(i, j) = std::exp(-(a.row(i) - b.row(j)).lpNorm<1>() /
                             spec.bandwidth);
        }
      }
      return g;
    }
  }
  return {};
}

namespace {

void check_blocks(const Eigen::MatrixXd& s, const Eigen::MatrixXd& t,
                  MmdEstimator estimator) {
  const Eigen::Index min_rows = estimator == MmdEstimator::kUnbiased ? 2 : 1;
  if (s.rows() < min_rows || t.rows() < min_rows) {
    throw ValidationError(
        estimator == MmdEstimator::kUnbiased
            ? "unbiased MMD needs at least two samples per block"
            : "MMD needs non-empty sample blocks");
  }
  if (s.cols() != t.cols()) {
    throw ValidationError("MMD blocks differ in dimension");
  }
}

// Mean of a within-block Gram matrix, optionally excluding the diagonal.
double within_mean(const GramMatrix& k, MmdEstimator estimator) {
  const double n = static_cast<double>(k.rows());
  if (estimator == MmdEstimator::kBiased) return k.sum() / (n * n);
  return (k.sum() - k.trace()) / (n * (n - 1.0));
}

// Σ_j c_ij ∂k(a_i, b_j)/∂a_i for every row i of a, with coefficient matrix c
// and kernel values kab = k(a_i, b_j).
Eigen::MatrixXd weighted_first_arg_gradient(const KernelSpec& spec,
                                            const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b,
                                            const GramMatrix& kab,
                                            const Eigen::MatrixXd& c) {
  switch (spec.kind) {
    case KernelKind::kLinear:
      return c * b;
    case KernelKind::kPolynomial2: {
      const Eigen::MatrixXd inner = (a * b.transpose()).array() + 1.0;
      return 2.0 * (c.array() * inner.array()).matrix() * b;
    }
    case KernelKind::kGaussian: {
      const Eigen::MatrixXd m = c.array() * kab.array();
      const Eigen::VectorXd row = m.rowwise().sum();
      return (-2.0 / spec.bandwidth) *
             (a.array().colwise() * row.array()).matrix() -
             (-2.0 / spec.bandwidth) * m * b;
    }
    case KernelKind::kLaplacian: {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
          const double f = -c(i, j) * kab(i, j) / spec.bandwidth;
          for (Eigen::Index d = 0; d < a.cols(); ++d) {
            const double diff = a(i, d) - b(j, d);
            g(i, d) += f * static_cast<double>((diff > 0) - (diff < 0));
          }
        }
      }
      return g;
    }
  }
  return {};
}

}  // namespace

double mmd2(const KernelSpec& spec, const Eigen::MatrixXd& s,
            const Eigen::MatrixXd& t, MmdEstimator estimator) {
  check_blocks(s, t, estimator);
  const GramMatrix kss = gram(spec, s, s);
  const GramMatrix ktt = gram(spec, t, t);
  const GramMatrix kst = gram(spec, s, t);
  const double cross = kst.sum() / (static_cast<double>(s.rows()) * t.rows());
  const double v =
      within_mean(kss, estimator) + within_mean(ktt, estimator) - 2.0 * cross;
  return estimator == MmdEstimator::kBiased ? std::max(v, 0.0) : v;
}

Mmd2WithGradient mmd2_with_gradient(const KernelSpec& spec,
                                    const Eigen::MatrixXd& s,
                                    const Eigen::MatrixXd& t,
                                    MmdEstimator estimator) {
  check_blocks(s, t, estimator);
  const GramMatrix kss = gram(spec, s, s);
  const GramMatrix ktt = gram(spec, t, t);
  const GramMatrix kst = gram(spec, s, t);
  const double n = static_cast<double>(s.rows());
  const double m = static_cast<double>(t.rows());

  Mmd2WithGradient out;
  // The gradient is that of the raw estimate; the biased value is not
  // clamped here so both stay consistent.
  out.value = within_mean(kss, estimator) + within_mean(ktt, estimator) -
              2.0 * kst.sum() / (n * m);

  auto within_coeff = [estimator](Eigen::Index rows) {
    const double r = static_cast<double>(rows);
    if (estimator == MmdEstimator::kBiased) {
      return Eigen::MatrixXd::Constant(rows, rows, 2.0 / (r * r)).eval();
    }
    Eigen::MatrixXd c =
        Eigen::MatrixXd::Constant(rows, rows, 2.0 / (r * (r - 1.0)));
    c.diagonal().setZero();
    return c;
  };
  const Eigen::MatrixXd c_st =
      Eigen::MatrixXd::Constant(s.rows(), t.rows(), -2.0 / (n * m));
  out.d_source = weighted_first_arg_gradient(spec, s, s, kss,
                                             within_coeff(s.rows())) +
                 weighted_first_arg_gradient(spec, s, t, kst, c_st);
  const GramMatrix kts = kst.transpose();
  const Eigen::MatrixXd c_ts = c_st.transpose();
  out.d_target = weighted_first_arg_gradient(spec, t, t, ktt,
                                             within_coeff(t.rows())) +
                 weighted_first_arg_gradient(spec, t, s, kts, c_ts);
  return out;
}

namespace {

std::vector<std::vector<int>> rows_by_class(const std::vector<int>& labels,
                                            int k, const char* side) {
  std::vector<std::vector<int>> rows(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw ValidationError(std::string("label out of range in ") + side +
                            " samples");
    }
    rows[labels[i]].push_back(static_cast<int>(i));
  }
  return rows;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

void check_labelled(const Eigen::MatrixXd& s, const std::vector<int>& sl,
                    const Eigen::MatrixXd& t, const std::vector<int>& tl) {
  if (static_cast<Eigen::Index>(sl.size()) != s.rows() ||
      static_cast<Eigen::Index>(tl.size()) != t.rows()) {
    throw ValidationError("label count does not match sample count");
  }
  if (s.cols() != t.cols()) {
    throw ValidationError("sample blocks differ in dimension");
  }
}

}  // namespace

double conditional_discrepancy(const KernelSpec& spec,
                               const Eigen::MatrixXd& s,
                               const std::vector<int>& s_labels,
                               const Eigen::MatrixXd& t,
                               const std::vector<int>& t_labels,
                               const DiscreteDistribution& class_weights,
                               MmdEstimator estimator) {
  check_labelled(s, s_labels, t, t_labels);
  const int k = class_weights.size();
  const auto s_rows = rows_by_class(s_labels, k, "source");
  const auto t_rows = rows_by_class(t_labels, k, "target");
  const std::size_t need = estimator == MmdEstimator::kUnbiased ? 2 : 1;
  double total = 0.0;
  for (int y = 0; y < k; ++y) {
    if (class_weights[y] == 0.0) continue;
    if (s_rows[y].size() < need) throw ClassAbsentError(y, "source");
    if (t_rows[y].size() < need) throw ClassAbsentError(y, "target");
    total += class_weights[y] *
             mmd2(spec, gather(s, s_rows[y]), gather(t, t_rows[y]), estimator);
  }
  return total;
}

ConditionalDiscrepancy conditional_discrepancy_dropping(
    const KernelSpec& spec, const Eigen::MatrixXd& s,
    const std::vector<int>& s_labels, const Eigen::MatrixXd& t,
    const std::vector<int>& t_labels, const DiscreteDistribution& class_weights,
    MmdEstimator estimator, bool with_gradient) {
  check_labelled(s, s_labels, t, t_labels);
  const int k = class_weights.size();
  const auto s_rows = rows_by_class(s_labels, k, "source");
  const auto t_rows = rows_by_class(t_labels, k, "target");
  const std::size_t need = estimator == MmdEstimator::kUnbiased ? 2 : 1;

  ConditionalDiscrepancy out;
  double kept_mass = 0.0;
  std::vector<int> kept;
  for (int y = 0; y < k; ++y) {
    if (class_weights[y] == 0.0) continue;
    if (s_rows[y].size() < need || t_rows[y].size() < need) {
      out.dropped.push_back(y);
      continue;
    }
    kept.push_back(y);
    kept_mass += class_weights[y];
  }
  if (with_gradient) {
    out.d_source = Eigen::MatrixXd::Zero(s.rows(), s.cols());
    out.d_target = Eigen::MatrixXd::Zero(t.rows(), t.cols());
  }
  if (kept.empty()) return out;
  for (int y : kept) {
    const double weight = class_weights[y] / kept_mass;
    const Eigen::MatrixXd sy = gather(s, s_rows[y]);
    const Eigen::MatrixXd ty = gather(t, t_rows[y]);
    if (!with_gradient) {
      out.value += weight * mmd2(spec, sy, ty, estimator);
      continue;
    }
    const Mmd2WithGradient g = mmd2_with_gradient(spec, sy, ty, estimator);
    out.value += weight * g.value;
    for (std::size_t i = 0; i < s_rows[y].size(); ++i) {
      out.d_source.row(s_rows[y][i]) += weight * g.d_source.row(i);
    }
    for (std::size_t i = 0; i < t_rows[y].size(); ++i) {
      out.d_target.row(t_rows[y][i]) += weight * g.d_target.row(i);
    }
  }
  return out;
}

double median_heuristic(KernelKind kind, const Eigen::MatrixXd& z, Rng& rng,
                        int subsample) {
  if (z.rows() < 2) return 1.0;
  std::vector<int> idx(z.rows());
  std::iota(idx.begin(), idx.end(), 0);
  if (static_cast<Eigen::Index>(subsample) < z.rows()) {
    // Partial Fisher-Yates: the first `subsample` entries form the draw.
    for (int i = 0; i < subsample; ++i) {
      const auto j = i + static_cast<int>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(subsample);
  }
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const auto diff = z.row(idx[i]) - z.row(idx[j]);
      d.push_back(kind == KernelKind::kLaplacian ? diff.lpNorm<1>()
                                                 : diff.squaredNorm());
    }
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  const double med = d[mid];
  return med > 0.0 ? med : 1.0;
}

}  // namespace gls
