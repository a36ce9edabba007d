// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef EBM_SPHERE_H_
#define EBM_SPHERE_H_

#include <vector>

#include <Eigen/Dense>

#include "ebm/rng.h"

namespace ebm {

using Vec = Eigen::VectorXd;
// Point sets are stored one point per row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kUnitNormTolerance = 1e-9;

// A point on S^d, stored in R^{d+1}.
class UnitVector {
 public:
  // Throws InvalidArgument unless |coords| = 1 within kUnitNormTolerance and
  // coords has at least two entries.
  explicit UnitVector(Vec coords);

  // Rescales v to unit length. Throws InvalidArgument for a zero vector.
  static UnitVector normalized(const Vec& v);

  // e_k in R^{d+1}.
  static UnitVector basis(int d, int k);

  const Vec& coords() const { return coords_; }
  int sphere_dim() const { return static_cast<int>(coords_.size()) - 1; }
  int ambient_dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }

  UnitVector operator-() const { return UnitVector(-coords_, Trusted{}); }

 private:
  struct Trusted {};
  UnitVector(Vec coords, Trusted) : coords_(std::move(coords)) {}

  Vec coords_;
};

using SampleSet = std::vector<UnitVector>;

// Discrete stand-in for the uniform probability measure on S^d.
class QuadratureGrid {
 public:
  // Rows of points must be unit vectors; weights nonnegative and are
  // renormalized to sum to one.
  QuadratureGrid(Mat points, Vec weights);

  int sphere_dim() const { return static_cast<int>(points_.cols()) - 1; }
  Eigen::Index size() const { return points_.rows(); }
  const Mat& points() const { return points_; }
  const Vec& weights() const { return weights_; }
  UnitVector point(Eigen::Index i) const { return UnitVector(points_.row(i).transpose()); }

 private:
  Mat points_;
  Vec weights_;
};

// Gaussian-normalize construction. Throws InvalidArgument for d < 1.
UnitVector uniform_sample(Rng& rng, int d);
// n uniform points, one per row.
Mat uniform_samples(Rng& rng, int d, Eigen::Index n);

// v - <v,x> x.
Vec project_tangent(const Vec& v, const UnitVector& x);

// (x + step) / |x + step|. Throws DegenerateRetraction when x + step = 0.
UnitVector retract(const UnitVector& x, const Vec& step);

// For d <= 2 a deterministic grid: d = 1 uses 'resolution' equally spaced
// angles, d = 2 a latitude-longitude product with resolution x 2*resolution
// cells and sin-weighted areas. For d >= 3, 'resolution' uniform Monte Carlo
// points with equal weights drawn from rng.
QuadratureGrid quadrature_grid(int d, int resolution, Rng& rng);

Mat stack(const SampleSet& samples);
SampleSet unstack(const Mat& points);

}  // namespace ebm

#endif  // EBM_SPHERE_H_
