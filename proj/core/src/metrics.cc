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
#include "ebm/metrics.h"

#include <cmath>
#include <limits>

#include "ebm/errors.h"

namespace ebm {

namespace {

// log(sum_k exp(-e_k)) computed stably.
double log_sum_exp_neg(const Vec& e) {
  const double lo = e.minCoeff();
  return -lo + std::log((-(e.array() - lo)).exp().sum());
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kGridKl: return "GridKL";
    case Metric::kCrossEntropy: return "CrossEntropy";
    case Metric::kTestKsd: return "TestKSD";
    case Metric::kTestF1sd: return "TestF1SD";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  if (text == "GridKL") return Metric::kGridKl;
  if (text == "CrossEntropy") return Metric::kCrossEntropy;
  if (text == "TestKSD") return Metric::kTestKsd;
  if (text == "TestF1SD") return Metric::kTestF1sd;
  throw InvalidArgument("unknown metric '" + std::string(text) + "'");
}

double discrete_kl(const Vec& energy_p, const Vec& energy_q) {
  if (energy_p.size() != energy_q.size() || energy_p.size() == 0) {
    throw InvalidArgument("discrete_kl needs equal nonempty energy vectors");
  }
  const Vec log_p = (-energy_p).array() - log_sum_exp_neg(energy_p);
  const Vec log_q = (-energy_q).array() - log_sum_exp_neg(energy_q);
  const double kl = log_p.array().exp().matrix().dot(log_p - log_q);
  // Rounding can leave a tiny negative value for identical distributions.
  return std::max(kl, 0.0);
}

double grid_kl_on(const BatchEnergy& p_energy, const BatchEnergy& q_energy, const Mat& points) {
  return discrete_kl(p_energy(points), q_energy(points));
}

double grid_kl(const BatchEnergy& p_energy, const BatchEnergy& q_energy, int d,
               std::int64_t n_points, Rng& rng) {
  if (n_points < 2) throw InvalidArgument("grid_kl needs n_points >= 2");
  return grid_kl_on(p_energy, q_energy, uniform_samples(rng, d, n_points));
}

double cross_entropy_test(const ParticleModel& model, const Mat& test_points, std::int64_t n_z,
                          Rng& rng) {
  if (test_points.rows() == 0) throw InvalidArgument("cross_entropy_test needs test samples");
  if (n_z < 1) throw InvalidArgument("cross_entropy_test needs n_z >= 1");
  const Vec fz = energies(model, uniform_samples(rng, model.sphere_dim(), n_z));
  const double log_z = log_sum_exp_neg(fz) - std::log(double(n_z));
  return energies(model, test_points).mean() + log_z;
}

double cross_entropy_test(const ParticleModel& model, const SampleSet& test_samples,
                          std::int64_t n_z, Rng& rng) {
  if (test_samples.empty()) throw InvalidArgument("cross_entropy_test needs test samples");
  return cross_entropy_test(model, stack(test_samples), n_z, rng);
}

double test_ksd(const ParticleModel& model, const SampleSet& test_samples, const KernelSpec& k) {
  return ksd_unbiased(model, k, test_samples);
}

double test_f1sd(const ParticleModel& model, const SampleSet& test_samples,
                 const F1sdConfig& inner, Rng& rng) {
  return f1sd_inner_maximize(model, test_samples, inner, rng).value;
}

Selection validation_select(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw SelectionError("validation_select needs candidates");
  std::vector<std::string> warnings;
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    if (!std::isfinite(c.validation_value)) {
      warnings.push_back("excluding candidate " + std::to_string(i) +
                         " (step_size=" + std::to_string(c.config.step_size) +
                         ", lambda=" + std::to_string(c.config.lambda) +
                         ", seed=" + std::to_string(c.config.seed) + "): non-finite metric");
      continue;
    }
    if (best == candidates.size()) {
      best = i;
      continue;
    }
    const Candidate& b = candidates[best];
    if (c.validation_value < b.validation_value ||
        (c.validation_value == b.validation_value && c.config < b.config)) {
      best = i;
    }
  }
  if (best == candidates.size()) {
    throw SelectionError("every candidate has a non-finite validation metric");
  }
  return {best, candidates[best].config, candidates[best].model, std::move(warnings)};
}

}  // namespace ebm
