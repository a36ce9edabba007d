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
#include "ebm/sphere.h"

#include <cmath>
#include <numbers>
#include <string>

#include "ebm/errors.h"

namespace ebm {

UnitVector::UnitVector(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw InvalidArgument("unit vector needs at least 2 coordinates, got " +
                          std::to_string(coords_.size()));
  }
  const double norm = coords_.norm();
  if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    throw InvalidArgument("vector is not unit norm (|x| = " +
                          std::to_string(norm) + ")");
  }
}

UnitVector UnitVector::normalized(const Vec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("cannot normalize a zero or non-finite vector");
  }
  return UnitVector(v / norm, Trusted{});
}

UnitVector UnitVector::basis(int d, int k) {
  if (d < 1 || k < 0 || k > d) throw InvalidArgument("invalid basis index");
  Vec e = Vec::Zero(d + 1);
  e[k] = 1.0;
  return UnitVector(std::move(e), Trusted{});
}

QuadratureGrid::QuadratureGrid(Mat points, Vec weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.rows() != weights_.size()) {
    throw InvalidArgument("quadrature grid needs matching nonempty points and weights");
  }
  if (points_.cols() < 2) throw InvalidArgument("quadrature grid dimension < 1");
  if ((weights_.array() < 0.0).any()) {
    throw InvalidArgument("quadrature weights must be nonnegative");
  }
  const double total = weights_.sum();
  if (!(total > 0.0)) throw InvalidArgument("quadrature weights sum to zero");
  weights_ /= total;
}

UnitVector uniform_sample(Rng& rng, int d) {
  if (d < 1) throw InvalidArgument("sphere dimension must be >= 1");
  std::normal_distribution<double> normal;
  Vec g(d + 1);
  double norm = 0.0;
  do {
    for (int i = 0; i <= d; ++i) g[i] = normal(rng);
    norm = g.norm();
  } while (norm == 0.0);
  return UnitVector::normalized(g);
}

Mat uniform_samples(Rng& rng, int d, Eigen::Index n) {
  if (d < 1) throw InvalidArgument("sphere dimension must be >= 1");
  Mat out(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = uniform_sample(rng, d).coords().transpose();
  return out;
}

Vec project_tangent(const Vec& v, const UnitVector& x) {
  if (v.size() != x.ambient_dim()) {
    throw DimensionMismatch("project_tangent", x.ambient_dim(), v.size());
  }
  return v - v.dot(x.coords()) * x.coords();
}

UnitVector retract(const UnitVector& x, const Vec& step) {
  if (step.size() != x.ambient_dim()) {
    throw DimensionMismatch("retract", x.ambient_dim(), step.size());
  }
  const Vec moved = x.coords() + step;
  const double norm = moved.norm();
  if (!(norm > 0.0)) throw DegenerateRetraction("retraction of x + step = 0");
  return UnitVector::normalized(moved);
}

QuadratureGrid quadrature_grid(int d, int resolution, Rng& rng) {
  if (d < 1) throw InvalidArgument("sphere dimension must be >= 1");
  if (resolution < 1) throw InvalidArgument("grid resolution must be >= 1");
  constexpr double pi = std::numbers::pi;
  if (d == 1) {
    Mat pts(resolution, 2);
    for (int i = 0; i < resolution; ++i) {
      const double phi = 2.0 * pi * (i + 0.5) / resolution;
      pts(i, 0) = std::cos(phi);
      pts(i, 1) = std::sin(phi);
    }
    return QuadratureGrid(std::move(pts), Vec::Ones(resolution));
  }
  if (d == 2) {
    const int n_polar = resolution;
    const int n_azimuth = 2 * resolution;
    Mat pts(Eigen::Index(n_polar) * n_azimuth, 3);
    Vec w(pts.rows());
    const double d_polar = pi / n_polar;
    for (int i = 0; i < n_polar; ++i) {
      const double lo = i * d_polar;
      const double hi = lo + d_polar;
      const double theta = lo + 0.5 * d_polar;
      // Exact band area: cos(lo) - cos(hi).
      const double band = std::cos(lo) - std::cos(hi);
      for (int j = 0; j < n_azimuth; ++j) {
        const double phi = 2.0 * pi * (j + 0.5) / n_azimuth;
        const Eigen::Index r = Eigen::Index(i) * n_azimuth + j;
        pts(r, 0) = std::sin(theta) * std::cos(phi);
        pts(r, 1) = std::sin(theta) * std::sin(phi);
        pts(r, 2) = std::cos(theta);
        w[r] = band;
      }
    }
    return QuadratureGrid(std::move(pts), std::move(w));
  }
  return QuadratureGrid(uniform_samples(rng, d, resolution), Vec::Ones(resolution));
}

Mat stack(const SampleSet& samples) {
  if (samples.empty()) return Mat(0, 0);
  const int dim = samples.front().ambient_dim();
  Mat out(Eigen::Index(samples.size()), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].ambient_dim() != dim) {
      throw DimensionMismatch("stack", dim, samples[i].ambient_dim());
    }
    out.row(Eigen::Index(i)) = samples[i].coords().transpose();
  }
  return out;
}

SampleSet unstack(const Mat& points) {
  SampleSet out;
  out.reserve(std::size_t(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.emplace_back(points.row(i).transpose());
  }
  return out;
}

}  // namespace ebm
