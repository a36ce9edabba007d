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
#ifndef EBM_TEACHER_H_
#define EBM_TEACHER_H_

#include <cstdint>

#include "ebm/model.h"

namespace ebm {

// Planted energy f*(x) = (1/J) sum_j w*_j max(0, <theta*_j, x>) with unit
// features.
class TeacherSpec {
 public:
  TeacherSpec(int d, Vec weights, Mat features);

  // J features drawn uniformly on S^d.
  static TeacherSpec random(int d, Vec weights, Rng& rng);

  int sphere_dim() const { return d_; }
  Eigen::Index size() const { return weights_.size(); }
  const Vec& weights() const { return weights_; }
  const Mat& features() const { return features_; }

  // The same energy as an F1 ParticleModel with m = J.
  ParticleModel as_model() const;

  friend bool operator==(const TeacherSpec&, const TeacherSpec&) = default;

 private:
  int d_;
  Vec weights_;
  Mat features_;
};

double teacher_energy(const TeacherSpec& teacher, const UnitVector& x);
Vec teacher_energies(const TeacherSpec& teacher, const Mat& points);

BatchEnergy energy_fn(const TeacherSpec& teacher);

struct MinSearchOptions {
  int restarts = 100;
  int steps = 500;
  double step_size = 0.1;
  double decay = 0.999;
};

// Riemannian gradient descent from uniform starts; returns the lowest energy
// actually attained, so the result is never below the true minimum.
double estimate_min(const TeacherSpec& teacher, const MinSearchOptions& options, Rng& rng);
double estimate_min(const TeacherSpec& teacher, int restarts, int steps, double step_size,
                    Rng& rng);

struct RejectionOptions {
  // 0 selects 1000 * n + 100000.
  std::int64_t max_proposals = 0;
};

// Uniform proposals accepted with probability min(1, exp(-(f*(x) - fmin))).
// Throws SamplingStalled once max_proposals is exhausted.
SampleSet rejection_sample(const TeacherSpec& teacher, double fmin, std::int64_t n, Rng& rng,
                           const RejectionOptions& options = {});

// Accept/reject rule, exposed for tests: true iff u < exp(-(energy - fmin)).
bool rejection_accepts(double energy, double fmin, double u);

}  // namespace ebm

#endif  // EBM_TEACHER_H_
