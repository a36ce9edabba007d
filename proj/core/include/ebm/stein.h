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
#ifndef EBM_STEIN_H_
#define EBM_STEIN_H_

#include <vector>

#include "ebm/model.h"

namespace ebm {

// RBF kernel k(x, x') = exp(-|x - x'|^2 / (2 sigma2)).
struct KernelSpec {
  double sigma2 = 1.0;

  void validate() const;
};

double rbf(const KernelSpec& k, const UnitVector& x, const UnitVector& y);

// Ambient (R^{d+1}) derivatives of the kernel:
//   grad_x k = -(x - x') k / sigma2,
//   Tr(grad_{x,x'} k) = ((d+1)/sigma2 - |x - x'|^2 / sigma2^2) k.
Vec rbf_grad_ambient(const KernelSpec& k, const UnitVector& x, const UnitVector& y);
double rbf_cross_trace_ambient(const KernelSpec& k, const UnitVector& x, const UnitVector& y);

// Derivatives on the sphere (tangent projections), which is what the
// spherical Stein operator pairs with. With c = <x, x'>:
//   grad_x k = (x' - c x) k / sigma2,
//   sum_i d/dx_i d/dx'_i k = ((d - 1 + c^2) / sigma2 + (c^3 - c) / sigma2^2) k.
Vec rbf_grad_x(const KernelSpec& k, const UnitVector& x, const UnitVector& y);
double rbf_cross_trace(const KernelSpec& k, const UnitVector& x, const UnitVector& y);

// (d+1) shallow networks h_1..h_{d+1} on a shared sphere, inside the mixed ball
// sum_j f1_norm_surrogate(h_j)^2 <= budget^2.
class SteinTestFunction {
 public:
  SteinTestFunction(std::vector<ParticleModel> components, double budget);

  // Weights uniform on [-weight_scale, weight_scale], features uniform on
  // S^d, then projected onto the budget ball.
  static SteinTestFunction random(int d, Eigen::Index m_h, double budget, double weight_scale,
                                  Rng& rng);

  int sphere_dim() const { return components_.front().sphere_dim(); }
  const std::vector<ParticleModel>& components() const { return components_; }
  std::vector<ParticleModel>& mutable_components() { return components_; }
  double budget() const { return budget_; }

  // sqrt(sum_j f1_norm_surrogate(h_j)^2).
  double mixed_norm() const;
  // Rescales all outer weights by budget / mixed_norm when the ball is left.
  void project();
  void scale(double factor);
  // h_j(x) for every component j.
  Vec evaluate(const UnitVector& x) const;

  friend bool operator==(const SteinTestFunction&, const SteinTestFunction&) = default;

 private:
  std::vector<ParticleModel> components_;
  double budget_;
};

// Tr(A_nu h)(x) = sum_j [(s(x)_j - d x_j) h_j(x) + (grad h_j(x))_j], where s is
// the model score and grad the Riemannian gradient.
double stein_trace(const ParticleModel& model, const SteinTestFunction& h, const UnitVector& x);
Vec stein_traces(const ParticleModel& model, const SteinTestFunction& h, const Mat& points);

// Rows s(x_i) - d x_i.
Mat stein_shift(const ParticleModel& model, const Mat& points);

// KSD pair terms with g(x) = s(x) - d x:
//   u~ = g(x).g(x') k + g(x).grad_{x'} k + g(x').grad_x k,
//   u  = u~ + sum_i d/dx_i d/dx'_i k.
double u_tilde_pair(const ParticleModel& model, const KernelSpec& k, const UnitVector& x,
                    const UnitVector& y);
double u_pair(const ParticleModel& model, const KernelSpec& k, const UnitVector& x,
              const UnitVector& y);

// (1/n^2) sum_{i,j} u~(x_i, x_j). Throws InvalidArgument on an empty set.
double ksd_biased(const ParticleModel& model, const KernelSpec& k, const SampleSet& samples);
// (1/(n(n-1))) sum_{i != j} u~(x_i, x_j). Throws InvalidArgument for n < 2.
double ksd_unbiased(const ParticleModel& model, const KernelSpec& k, const SampleSet& samples);

// E_{x,x' ~ nu_p}[u_q(x, x')] by a weighted double sum over the grid with
// Gibbs weights proportional to grid weight * exp(-energy_p).
double ksd_population(const ParticleModel& model_q, const BatchEnergy& energy_p,
                      const QuadratureGrid& grid, const KernelSpec& k);

// Batched pair sums over rows of points with shift rows g. Returns
// sum_{i,j} p_i p_j u~_{ij} (optionally adding the trace term, optionally
// skipping i == j). When grad_shift is non-null it receives d/dg of the
// returned value (only supported with the diagonal included).
struct PairSumOptions {
  bool include_trace = false;
  bool skip_diagonal = false;
};
double ksd_pair_sum(const Mat& shift, const Mat& points, const Vec& probs, const KernelSpec& k,
                    const PairSumOptions& options = {}, Mat* grad_shift = nullptr);

// Inner maximization of the F1 Stein discrepancy.
struct F1sdConfig {
  Eigen::Index m_h = 100;
  int steps = 200;
  double step_size = 10.0;
  double budget = 1.0;
  double init_weight_scale = 1.0;
  bool warm_start = true;
  // Outer iterations between refreshes of h (trainers only).
  int refresh_stride = 1;

  void validate() const;
};

struct F1sdResult {
  SteinTestFunction h;
  double value = 0.0;          // best objective seen (the F1-SD estimate)
  double initial_value = 0.0;  // objective at the starting h
  double final_delta = 0.0;    // objective change over the last ascent step
};

// Projected gradient ascent of (1/n) sum_i Tr(A h)(x_i) over the mixed ball,
// keeping the best iterate. Starts from warm_start when given (and shapes
// match), otherwise from SteinTestFunction::random drawn from rng.
F1sdResult f1sd_inner_maximize(const ParticleModel& model, const SampleSet& samples,
                               const F1sdConfig& cfg, Rng& rng,
                               const SteinTestFunction* warm_start = nullptr);
// Same with an arbitrary probability vector over the rows of points.
F1sdResult f1sd_inner_maximize_weighted(const ParticleModel& model, const Mat& points,
                                        const Vec& probs, const F1sdConfig& cfg, Rng& rng,
                                        const SteinTestFunction* warm_start = nullptr);

// sum_i p_i Tr(A h)(x_i) given the shift rows of the model.
double f1sd_objective(const Mat& shift, const Mat& points, const Vec& probs,
                      const SteinTestFunction& h);

}  // namespace ebm

#endif  // EBM_STEIN_H_
