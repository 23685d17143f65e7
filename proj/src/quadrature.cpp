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

#include "gls/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "gls/error.hpp"

namespace gls {

QuadratureGrid::QuadratureGrid(std::vector<double> lo, std::vector<double> hi,
                               int points)
    : lo_(std::move(lo)), hi_(std::move(hi)), points_(points) {
  if (lo_.empty() || lo_.size() != hi_.size()) {
    throw ValidationError("quadrature grid: bound vectors must be non-empty "
                          "and of equal length");
  }
  if (dim() > kMaxQuadratureDim) {
    throw ValidationError("quadrature grid: dimension " +
                          std::to_string(dim()) + " exceeds 3");
  }
  if (points_ < 3 || points_ % 2 == 0) {
    throw ValidationError(
        "quadrature grid: need an odd node count >= 3 per axis");
  }
  for (int a = 0; a < dim(); ++a) {
    if (!(hi_[a] > lo_[a])) {
      throw ValidationError("quadrature grid: empty interval on an axis");
    }
  }
}

int QuadratureGrid::default_points(int dim) {
  switch (dim) {
    case 1:
      return 4097;
    case 2:
      return 513;
    case 3:
      return 129;
    default:
      throw ValidationError("quadrature is restricted to dim <= 3");
  }
}

double QuadratureGrid::spacing(int axis) const {
  return (hi_[axis] - lo_[axis]) / (points_ - 1);
}

long long QuadratureGrid::size() const {
  long long n = 1;
  for (int a = 0; a < dim(); ++a) n *= points_;
  return n;
}

double QuadratureGrid::coordinate(int axis, int i) const {
  if (i == points_ - 1) return hi_[axis];
  return lo_[axis] + i * spacing(axis);
}

Eigen::VectorXd QuadratureGrid::node(long long index) const {
  Eigen::VectorXd z(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    z[a] = coordinate(a, static_cast<int>(index % points_));
    index /= points_;
  }
  return z;
}

QuadratureGrid QuadratureGrid::refined() const {
  return QuadratureGrid(lo_, hi_, 2 * points_ - 1);
}

QuadratureGrid QuadratureGrid::merged(const QuadratureGrid& other) const {
  if (other.dim() != dim()) {
    throw ValidationError("quadrature grid: cannot merge grids of different "
                          "dimension");
  }
  std::vector<double> lo(lo_), hi(hi_);
  for (int a = 0; a < dim(); ++a) {
    lo[a] = std::min(lo[a], other.lo_[a]);
    hi[a] = std::max(hi[a], other.hi_[a]);
  }
  return QuadratureGrid(std::move(lo), std::move(hi), points_);
}

namespace {

// Line integral along the last axis using nodes 0, stride, 2*stride, ...
double line_integral(const double* v, int n, int stride, double h, bool abs) {
  double s = 0.0;
  for (int i = 0; i + stride < n; i += stride) {
    const double f0 = v[i];
    const double f1 = v[i + stride];
    if (!abs) {
      s += 0.5 * (f0 + f1);
    } else if ((f0 >= 0.0) == (f1 >= 0.0) || f0 == 0.0 || f1 == 0.0) {
      s += 0.5 * (std::fabs(f0) + std::fabs(f1));
    } else {
      const double a0 = std::fabs(f0), a1 = std::fabs(f1);
      s += 0.5 * (a0 * a0 + a1 * a1) / (a0 + a1);
    }
  }
  return s * h;
}

double outer_weight(int i, int n, double h) {
  return (i == 0 || i == n - 1) ? 0.5 * h : h;
}

double tensor_rule(const QuadratureGrid& grid, std::span<const double> values,
                   int stride, bool abs) {
  const int n = grid.points();
  const int d = grid.dim();
  const double h_last = grid.spacing(d - 1) * stride;
  double total = 0.0;
  switch (d) {
    case 1:
      total = line_integral(values.data(), n, stride, h_last, abs);
      break;
    case 2: {
      const double h0 = grid.spacing(0) * stride;
      for (int i = 0; i < n; i += stride) {
        total += outer_weight(i, n, h0) *
                 line_integral(values.data() + static_cast<long long>(i) * n,
                               n, stride, h_last, abs);
      }
      break;
    }
    case 3: {
      const double h0 = grid.spacing(0) * stride;
      const double h1 = grid.spacing(1) * stride;
      for (int i = 0; i < n; i += stride) {
        for (int j = 0; j < n; j += stride) {
          const long long offset =
              (static_cast<long long>(i) * n + j) * static_cast<long long>(n);
          total += outer_weight(i, n, h0) *
                   outer_weight(j, n, h1) *
                   line_integral(values.data() + offset, n, stride, h_last,
                                 abs);
        }
      }
      break;
    }
    default:
      throw ValidationError("quadrature is restricted to dim <= 3");
  }
  return total;
}

QuadratureResult rule_with_estimate(const QuadratureGrid& grid,
                                    std::span<const double> values, bool abs) {
  if (static_cast<long long>(values.size()) != grid.size()) {
    throw ValidationError("quadrature: value count does not match grid size");
  }
  QuadratureResult r;
  r.value = tensor_rule(grid, values, 1, abs);
  r.error = std::fabs(r.value - tensor_rule(grid, values, 2, abs));
  return r;
}

}  // namespace

QuadratureResult integrate(const QuadratureGrid& grid,
                           std::span<const double> values) {
  return rule_with_estimate(grid, values, false);
}

QuadratureResult integrate_abs(const QuadratureGrid& grid,
                               std::span<const double> values) {
  return rule_with_estimate(grid, values, true);
}

}  // namespace gls
