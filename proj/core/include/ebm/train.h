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
#ifndef EBM_TRAIN_H_
#define EBM_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "ebm/sampler.h"
#include "ebm/stein.h"

namespace ebm {

enum class Estimator { kMle, kKsd, kF1sd };

std::string_view to_string(Estimator estimator);
Estimator parse_estimator(std::string_view text);

struct TrainConfig {
  Estimator estimator = Estimator::kMle;
  Regime regime = Regime::kF1;
  Eigen::Index m = 500;
  // Applied to the plain gradient of G, whose entries already carry 1/m.
  double step_size = 1.0;
  double lambda = 0.0;
  int n_iters = 1000;
  std::uint64_t seed = 0;
  double init_weight_scale = 1.0;

  // Exactly the sub-config of the chosen estimator must be set.
  std::optional<MhConfig> sampler;  // MLE
  std::int64_t n_mc = 0;            // MLE model samples per step; 0 means |data|
  std::optional<KernelSpec> kernel; // KSD
  std::optional<F1sdConfig> inner;  // F1SD

  // Defaults with the estimator's sub-config filled in.
  static TrainConfig defaults(Estimator estimator, Regime regime);
  void validate() const;
};

struct TrainRecord {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double acceptance_rate = 0.0;  // NaN unless MLE
  double wall_time_ms = 0.0;
};

struct TrainTrace {
  std::vector<TrainRecord> records;
};

struct GradientEstimate {
  ParamGradient grad;
  // MLE: mean data energy - mean model-sample energy + reg (the contrastive
  // part of the cross-entropy; log Z is not estimated). KSD: biased KSD + reg.
  // F1SD: the Stein objective at the supplied h + reg.
  double objective = 0.0;
  double acceptance_rate = 0.0;
};

// Features uniform on S^d, weights uniform on [-init_weight_scale,
// init_weight_scale].
ParticleModel init_model(const TrainConfig& cfg, int d, Rng& rng);

// Mean over data of grad f - mean over model_samples of grad f + reg grad.
GradientEstimate mle_gradient_from_samples(const ParticleModel& model, const Mat& data,
                                           const Mat& model_samples, double lambda);
// Same with model samples drawn by gibbs_draw.
GradientEstimate mle_gradient(const ParticleModel& model, const Mat& data, const TrainConfig& cfg,
                              Rng& rng);
ParamGradient mle_gradient(const ParticleModel& model, const SampleSet& data,
                           const TrainConfig& cfg, Rng& rng);

// Exact gradient of (1/n^2) sum_{i,j} u~(x_i, x_j) + reg.
GradientEstimate ksd_gradient(const ParticleModel& model, const Mat& data, const TrainConfig& cfg);
ParamGradient ksd_gradient(const ParticleModel& model, const SampleSet& data,
                           const TrainConfig& cfg);

// Gradient of (1/n) sum_i Tr(A_f h*)(x_i) + reg at fixed h*.
GradientEstimate f1sd_gradient(const ParticleModel& model, const Mat& data,
                               const SteinTestFunction& h_star, const TrainConfig& cfg);
ParamGradient f1sd_gradient(const ParticleModel& model, const SampleSet& data,
                            const SteinTestFunction& h_star, const TrainConfig& cfg);

// sum_i (d g(x_i) / d params)^T v_i for g(x) = -grad_S f(x) - d x.
ParamGradient shift_vjp(const ParticleModel& model, const Mat& points, const Mat& v);

// Called with (completed iterations, model) at the start and after every step.
using TrainObserver = std::function<void(int, const ParticleModel&)>;

struct TrainResult {
  ParticleModel model;
  TrainTrace trace;
};

// Plain gradient descent on G for cfg.n_iters steps. F2 keeps features frozen.
// Throws Divergence when a parameter becomes non-finite.
TrainResult train(const TrainConfig& cfg, int d, const Mat& data, Rng& rng,
                  const TrainObserver& observer = {});
TrainResult train(const TrainConfig& cfg, int d, const SampleSet& data, Rng& rng,
                  const TrainObserver& observer = {});
// Uses the stream derive_stream(cfg.seed, "train").
TrainResult train(const TrainConfig& cfg, int d, const Mat& data);

}  // namespace ebm

#endif  // EBM_TRAIN_H_
