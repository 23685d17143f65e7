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

#include "gls/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "gls/error.hpp"

namespace gls {

AffineMap AffineMap::identity(int dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

AffineMap AffineMap::scalar(double scale, double shift) {
  AffineMap m{Eigen::MatrixXd(1, 1), Eigen::VectorXd(1)};
  m.linear(0, 0) = scale;
  m.offset[0] = shift;
  return m;
}

MixtureDensity::MixtureDensity(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw ValidationError("mixture: at least one component required");
  }
  dim_ = static_cast<int>(components_.front().mean.size());
  if (dim_ < 1) throw ValidationError("mixture: dimension must be positive");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.covariance.rows() != dim_ ||
        c.covariance.cols() != dim_) {
      throw ValidationError("mixture: component dimensions disagree");
    }
    if (!(c.weight >= 0.0)) {
      throw ValidationError("mixture: negative component weight");
    }
    if (!c.covariance.isApprox(c.covariance.transpose(), 1e-12)) {
      throw ValidationError("mixture: covariance is not symmetric");
    }
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ValidationError("mixture: component weights must sum to one");
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  factors_.reserve(components_.size());
  for (const auto& c : components_) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("mixture: covariance is not positive definite");
    }
    Eigen::MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < dim_; ++i) log_det += 2.0 * std::log(l(i, i));
    const double log_w = c.weight > 0.0
                             ? std::log(c.weight)
                             : -std::numeric_limits<double>::infinity();
    factors_.push_back({std::move(l), log_w - 0.5 * (dim_ * log_2pi + log_det)});
  }
}

MixtureDensity MixtureDensity::gaussian(Eigen::VectorXd mean,
                                        Eigen::MatrixXd covariance) {
  return MixtureDensity({{1.0, std::move(mean), std::move(covariance)}});
}

MixtureDensity MixtureDensity::isotropic(Eigen::VectorXd mean,
                                         double variance) {
  const auto d = mean.size();
  return gaussian(std::move(mean),
                  variance * Eigen::MatrixXd::Identity(d, d));
}

MixtureDensity MixtureDensity::combine(std::span<const double> weights,
                                       std::span<const MixtureDensity> parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw ValidationError("mixture: weight count must match part count");
  }
  std::vector<GaussianComponent> flat;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (const auto& c : parts[k].components()) {
      flat.push_back({weights[k] * c.weight, c.mean, c.covariance});
    }
  }
  // Absorb round-off so the flattened weights pass validation.
  double total = 0.0;
  for (const auto& c : flat) total += c.weight;
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ValidationError("mixture: combined weights must sum to one");
  }
  for (auto& c : flat) c.weight /= total;
  return MixtureDensity(std::move(flat));
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double MixtureDensity::log_density(const Eigen::VectorXd& z) const {
  if (z.size() != dim_) {
    throw ValidationError("mixture: evaluation point has wrong dimension");
  }
  double terms[64];
  std::vector<double> heap;
  double* t = terms;
  if (components_.size() > 64) {
    heap.resize(components_.size());
    t = heap.data();
  }
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const Eigen::VectorXd y = factors_[k].chol.triangularView<Eigen::Lower>()
                                  .solve(z - components_[k].mean);
    t[k] = factors_[k].log_norm - 0.5 * y.squaredNorm();
  }
  return log_sum_exp(std::span<const double>(t, components_.size()));
}

double MixtureDensity::density(const Eigen::VectorXd& z) const {
  return std::exp(log_density(z));
}

std::vector<double> MixtureDensity::evaluate_log(
    const QuadratureGrid& grid) const {
  if (grid.dim() != dim_) {
    throw ValidationError("mixture: grid dimension does not match density");
  }
  const int d = dim_;
  const std::size_t kc = components_.size();
  // Whitening matrices L^{-1} per component, row-major d x d.
  std::vector<double> whiten(kc * d * d);
  for (std::size_t k = 0; k < kc; ++k) {
    const Eigen::MatrixXd inv =
        factors_[k].chol.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(d, d));
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) whiten[(k * d + r) * d + c] = inv(r, c);
  }
  std::vector<std::vector<double>> axis(d);
  for (int a = 0; a < d; ++a) {
    axis[a].resize(grid.points());
    for (int i = 0; i < grid.points(); ++i) axis[a][i] = grid.coordinate(a, i);
  }
  const long long n = grid.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<double> terms(kc);
  int idx[kMaxQuadratureDim] = {0, 0, 0};
  double diff[kMaxQuadratureDim];
  for (long long i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kc; ++k) {
      const Eigen::VectorXd& mu = components_[k].mean;
      for (int a = 0; a < d; ++a) diff[a] = axis[a][idx[a]] - mu[a];
      double q = 0.0;
      const double* w = &whiten[k * d * d];
      for (int r = 0; r < d; ++r) {
        double y = 0.0;
        for (int c = 0; c <= r; ++c) y += w[r * d + c] * diff[c];
        q += y * y;
      }
      terms[k] = factors_[k].log_norm - 0.5 * q;
    }
    out[i] = kc == 1 ? terms[0] : log_sum_exp(terms);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < grid.points()) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::vector<double> MixtureDensity::evaluate(const QuadratureGrid& grid) const {
  std::vector<double> out = evaluate_log(grid);
  for (double& v : out) v = std::exp(v);
  return out;
}

MixtureDensity MixtureDensity::pushforward(const AffineMap& map) const {
  if (map.in_dim() != dim_ || map.offset.size() != map.out_dim()) {
    throw ValidationError("mixture: affine map dimensions do not match");
  }
  std::vector<GaussianComponent> out;
  out.reserve(components_.size());
  for (const auto& c : components_) {
    Eigen::MatrixXd cov = map.linear * c.covariance * map.linear.transpose();
    cov = 0.5 * (cov + cov.transpose());
    out.push_back({c.weight, map.apply(c.mean), std::move(cov)});
  }
  return MixtureDensity(std::move(out));
}

QuadratureGrid MixtureDensity::covering_grid(int points) const {
  const MixtureDensity* self = this;
  return gls::covering_grid(std::span<const MixtureDensity* const>(&self, 1),
                            points);
}

QuadratureGrid covering_grid(std::span<const MixtureDensity* const> densities,
                             int points) {
  if (densities.empty()) {
    throw ValidationError("covering grid: no densities given");
  }
  const int d = densities.front()->dim();
  if (d > kMaxQuadratureDim) {
    throw ValidationError("quadrature oracle is restricted to dim <= 3, got " +
                          std::to_string(d));
  }
  std::vector<double> mu_min(d, std::numeric_limits<double>::infinity());
  std::vector<double> mu_max(d, -std::numeric_limits<double>::infinity());
  std::vector<double> sd_max(d, 0.0);
  for (const MixtureDensity* m : densities) {
    if (m->dim() != d) {
      throw ValidationError("covering grid: densities differ in dimension");
    }
    for (const auto& c : m->components()) {
      for (int a = 0; a < d; ++a) {
        mu_min[a] = std::min(mu_min[a], c.mean[a]);
        mu_max[a] = std::max(mu_max[a], c.mean[a]);
        sd_max[a] = std::max(sd_max[a], std::sqrt(c.covariance(a, a)));
      }
    }
  }
  std::vector<double> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = mu_min[a] - 8.0 * sd_max[a];
    hi[a] = mu_max[a] + 8.0 * sd_max[a];
  }
  return QuadratureGrid(std::move(lo), std::move(hi),
                        points > 0 ? points : QuadratureGrid::default_points(d));
}

}  // namespace gls
