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

#ifndef GLS_QUADRATURE_HPP_
#define GLS_QUADRATURE_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

namespace gls {

inline constexpr int kMaxQuadratureDim = 3;

// Value plus a refinement error estimate: the difference against the same
// rule applied on every other node (twice the spacing).
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// Tensor-product trapezoid grid. Nodes are stored with the last axis
// varying fastest. An odd node count keeps the half-resolution subgrid
// nested.
class QuadratureGrid {
 public:
  QuadratureGrid(std::vector<double> lo, std::vector<double> hi, int points);

  // Default nodes per axis: 4097 in 1-D, 513 in 2-D, 129 in 3-D.
  static int default_points(int dim);

  int dim() const { return static_cast<int>(lo_.size()); }
  int points() const { return points_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double spacing(int axis) const;
  long long size() const;

  Eigen::VectorXd node(long long index) const;
  double coordinate(int axis, int i) const;

  // Grid with the same box and roughly twice the resolution (2n - 1 nodes).
  QuadratureGrid refined() const;

  // Smallest box holding [lo, hi] from both grids, at this grid's resolution.
  QuadratureGrid merged(const QuadratureGrid& other) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  int points_;
};

// Trapezoid integral of node values.
QuadratureResult integrate(const QuadratureGrid& grid,
                           std::span<const double> values);

// Integral of |values|. Cells where the sign flips along the last axis are
// integrated exactly on the linear interpolant, which restores second-order
// accuracy at the kink.
QuadratureResult integrate_abs(const QuadratureGrid& grid,
                               std::span<const double> values);

}  // namespace gls

#endif  // GLS_QUADRATURE_HPP_
