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
#ifndef EBM_METRICS_H_
#define EBM_METRICS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ebm/stein.h"
#include "ebm/train.h"

namespace ebm {

enum class Metric { kGridKl, kCrossEntropy, kTestKsd, kTestF1sd };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

struct MetricRecord {
  Metric metric = Metric::kGridKl;
  double value = 0.0;
  std::int64_t n_eval = 1;
  std::uint64_t seed = 0;
};

// KL(p_hat || q_hat) for the discrete distributions p_hat_k ~ exp(-fp_k),
// q_hat_k ~ exp(-fq_k) over a common point set. Always >= 0.
double discrete_kl(const Vec& energy_p, const Vec& energy_q);

// discrete_kl restricted to n_points uniform points of S^d shared by both
// energies.
double grid_kl(const BatchEnergy& p_energy, const BatchEnergy& q_energy, int d,
               std::int64_t n_points, Rng& rng);
// Same on caller-supplied points (reused across a training trace).
double grid_kl_on(const BatchEnergy& p_energy, const BatchEnergy& q_energy, const Mat& points);

// mean_i f(x_i) + log((1/n_z) sum_k exp(-f(y_k))) with fresh uniform y_k.
double cross_entropy_test(const ParticleModel& model, const SampleSet& test_samples,
                          std::int64_t n_z, Rng& rng);
double cross_entropy_test(const ParticleModel& model, const Mat& test_points, std::int64_t n_z,
                          Rng& rng);

// ksd_unbiased on held-out samples.
double test_ksd(const ParticleModel& model, const SampleSet& test_samples, const KernelSpec& k);

// Value of f1sd_inner_maximize on held-out samples.
double test_f1sd(const ParticleModel& model, const SampleSet& test_samples,
                 const F1sdConfig& inner, Rng& rng);

// Hyperparameters that identify a sweep cell.
struct CandidateConfig {
  double step_size = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;

  friend auto operator<=>(const CandidateConfig&, const CandidateConfig&) = default;
};

struct Candidate {
  CandidateConfig config;
  ParticleModel model;
  double validation_value = 0.0;
};

struct Selection {
  std::size_t index = 0;  // position in the candidate list
  CandidateConfig config;
  ParticleModel model;
  std::vector<std::string> warnings;
};

// Minimal validation value; ties broken by (step_size, lambda, seed). Non-finite
// values are excluded with a warning; throws SelectionError if nothing is left.
Selection validation_select(const std::vector<Candidate>& candidates);

}  // namespace ebm

#endif  // EBM_METRICS_H_
