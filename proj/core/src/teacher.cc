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
#include "ebm/teacher.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebm/errors.h"

namespace ebm {

TeacherSpec::TeacherSpec(int d, Vec weights, Mat features)
    : d_(d), weights_(std::move(weights)), features_(std::move(features)) {
  if (d_ < 1) throw InvalidArgument("sphere dimension must be >= 1");
  if (weights_.size() < 1) throw InvalidArgument("teacher needs J >= 1");
  if (features_.rows() != weights_.size()) {
    throw InvalidArgument("teacher features/weights count mismatch");
  }
  if (features_.cols() != d_ + 1) throw DimensionMismatch("teacher features", d_ + 1, features_.cols());
  if (!weights_.allFinite()) throw InvalidArgument("teacher weights must be finite");
  for (Eigen::Index j = 0; j < features_.rows(); ++j) {
    if (!(std::abs(features_.row(j).norm() - 1.0) <= kUnitNormTolerance)) {
      throw InvalidArgument("teacher features must be unit vectors");
    }
  }
}

TeacherSpec TeacherSpec::random(int d, Vec weights, Rng& rng) {
  Mat features = uniform_samples(rng, d, weights.size());
  return TeacherSpec(d, std::move(weights), std::move(features));
}

ParticleModel TeacherSpec::as_model() const {
  return ParticleModel(d_, weights_, features_, Regime::kF1);
}

double teacher_energy(const TeacherSpec& teacher, const UnitVector& x) {
  if (x.ambient_dim() != teacher.sphere_dim() + 1) {
    throw DimensionMismatch("teacher_energy", teacher.sphere_dim() + 1, x.ambient_dim());
  }
  const Vec pre = teacher.features() * x.coords();
  return pre.cwiseMax(0.0).dot(teacher.weights()) / double(teacher.size());
}

Vec teacher_energies(const TeacherSpec& teacher, const Mat& points) {
  if (points.cols() != teacher.sphere_dim() + 1) {
    throw DimensionMismatch("teacher_energies", teacher.sphere_dim() + 1, points.cols());
  }
  const Eigen::MatrixXd pre = points * teacher.features().transpose();
  return pre.cwiseMax(0.0) * teacher.weights() / double(teacher.size());
}

BatchEnergy energy_fn(const TeacherSpec& teacher) {
  return [teacher](const Mat& points) { return teacher_energies(teacher, points); };
}

double estimate_min(const TeacherSpec& teacher, const MinSearchOptions& options, Rng& rng) {
  if (options.restarts < 1 || options.steps < 1) {
    throw InvalidArgument("estimate_min needs restarts >= 1 and steps >= 1");
  }
  const ParticleModel model = teacher.as_model();
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    UnitVector x = uniform_sample(rng, teacher.sphere_dim());
    double lowest = energy(model, x);
    double step = options.step_size;
    for (int t = 0; t < options.steps; ++t) {
      const Vec grad = riemannian_grad_x(model, x);
      if (grad.squaredNorm() == 0.0) break;
      x = retract(x, -step * grad);
      lowest = std::min(lowest, energy(model, x));
      step *= options.decay;
    }
    best = std::min(best, lowest);
  }
  return best;
}

double estimate_min(const TeacherSpec& teacher, int restarts, int steps, double step_size,
                    Rng& rng) {
  MinSearchOptions options;
  options.restarts = restarts;
  options.steps = steps;
  options.step_size = step_size;
  return estimate_min(teacher, options, rng);
}

bool rejection_accepts(double energy, double fmin, double u) {
  // exp(.) > 1 when fmin overshoots the true minimum; u < 1 then always accepts.
  return u < std::exp(-(energy - fmin));
}

SampleSet rejection_sample(const TeacherSpec& teacher, double fmin, std::int64_t n, Rng& rng,
                           const RejectionOptions& options) {
  if (n < 0) throw InvalidArgument("sample count must be nonnegative");
  const std::int64_t cap =
      options.max_proposals > 0 ? options.max_proposals : 1000 * n + 100000;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleSet out;
  out.reserve(std::size_t(n));
  std::int64_t proposals = 0;
  while (std::int64_t(out.size()) < n) {
    if (proposals >= cap) throw SamplingStalled(proposals, std::int64_t(out.size()));
    UnitVector x = uniform_sample(rng, teacher.sphere_dim());
    const double u = unif(rng);
    ++proposals;
    if (rejection_accepts(teacher_energy(teacher, x), fmin, u)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace ebm
