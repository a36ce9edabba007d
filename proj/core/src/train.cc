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
#include "ebm/train.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ebm/errors.h"

namespace ebm {

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::kMle: return "MLE";
    case Estimator::kKsd: return "KSD";
    case Estimator::kF1sd: return "F1SD";
  }
  return "?";
}

Estimator parse_estimator(std::string_view text) {
  if (text == "MLE") return Estimator::kMle;
  if (text == "KSD") return Estimator::kKsd;
  if (text == "F1SD") return Estimator::kF1sd;
  throw InvalidArgument("unknown estimator '" + std::string(text) + "'");
}

TrainConfig TrainConfig::defaults(Estimator estimator, Regime regime) {
  TrainConfig cfg;
  cfg.estimator = estimator;
  cfg.regime = regime;
  switch (estimator) {
    case Estimator::kMle: cfg.sampler = MhConfig{}; break;
    case Estimator::kKsd: cfg.kernel = KernelSpec{}; break;
    case Estimator::kF1sd: cfg.inner = F1sdConfig{}; break;
  }
  return cfg;
}

void TrainConfig::validate() const {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (n_iters < 0) throw InvalidArgument("n_iters must be nonnegative");
  if (n_mc < 0) throw InvalidArgument("n_mc must be nonnegative");
  const bool mle = estimator == Estimator::kMle;
  const bool ksd = estimator == Estimator::kKsd;
  const bool f1sd = estimator == Estimator::kF1sd;
  if (sampler.has_value() != mle) throw InvalidArgument("sampler config is required for MLE only");
  if (kernel.has_value() != ksd) throw InvalidArgument("kernel config is required for KSD only");
  if (inner.has_value() != f1sd) throw InvalidArgument("inner config is required for F1SD only");
  if (sampler) sampler->validate();
  if (kernel) kernel->validate();
  if (inner) inner->validate();
}

ParticleModel init_model(const TrainConfig& cfg, int d, Rng& rng) {
  if (cfg.m < 1) throw InvalidArgument("m must be >= 1");
  Mat features = uniform_samples(rng, d, cfg.m);
  Vec weights(cfg.m);
  std::uniform_real_distribution<double> unif(-cfg.init_weight_scale, cfg.init_weight_scale);
  for (Eigen::Index i = 0; i < cfg.m; ++i) {
    weights[i] = cfg.init_weight_scale > 0.0 ? unif(rng) : 0.0;
  }
  return ParticleModel(d, std::move(weights), std::move(features), cfg.regime);
}

GradientEstimate mle_gradient_from_samples(const ParticleModel& model, const Mat& data,
                                           const Mat& model_samples, double lambda) {
  if (data.rows() == 0 || model_samples.rows() == 0) {
    throw InvalidArgument("mle_gradient needs data and model samples");
  }
  GradientEstimate est;
  est.grad = weighted_param_grad_energy(model, data);
  est.grad -= weighted_param_grad_energy(model, model_samples);
  est.grad += reg_grad(model, lambda);
  est.objective = energies(model, data).mean() - energies(model, model_samples).mean() +
                  reg_value(model, lambda);
  return est;
}

GradientEstimate mle_gradient(const ParticleModel& model, const Mat& data, const TrainConfig& cfg,
                              Rng& rng) {
  if (!cfg.sampler) throw InvalidArgument("mle_gradient needs a sampler config");
  if (data.rows() == 0) throw InvalidArgument("mle_gradient needs data");
  const std::int64_t n_mc = cfg.n_mc > 0 ? cfg.n_mc : data.rows();
  const GibbsDraw draw = gibbs_draw(model, n_mc, *cfg.sampler, rng);
  GradientEstimate est = mle_gradient_from_samples(model, data, draw.samples, cfg.lambda);
  est.acceptance_rate = draw.acceptance_rate;
  return est;
}

ParamGradient mle_gradient(const ParticleModel& model, const SampleSet& data,
                           const TrainConfig& cfg, Rng& rng) {
  if (data.empty()) throw InvalidArgument("mle_gradient needs data");
  return mle_gradient(model, stack(data), cfg, rng).grad;
}

ParamGradient shift_vjp(const ParticleModel& model, const Mat& points, const Mat& v) {
  // g_i = -(1/m) sum_k w_k 1_ik P_i theta_k - d x_i, so with t_i = P_i v_i:
  //   d/dw_k     = -(1/m) sum_i 1_ik <t_i, theta_k>
  //   d/dtheta_k = -(w_k/m) sum_i 1_ik t_i
  const double inv_m = 1.0 / double(model.size());
  const Vec radial = v.cwiseProduct(points).rowwise().sum();
  const Mat tangent = v - radial.asDiagonal() * points;
  const Eigen::MatrixXd pre = points * model.features().transpose();
  const Eigen::MatrixXd active = (pre.array() >= 0.0).cast<double>();
  const Eigen::MatrixXd proj = tangent * model.features().transpose();
  ParamGradient g;
  g.dw = -inv_m * active.cwiseProduct(proj).colwise().sum().transpose();
  g.dtheta = (-inv_m * model.weights()).asDiagonal() * (active.transpose() * tangent);
  return g;
}

GradientEstimate ksd_gradient(const ParticleModel& model, const Mat& data, const TrainConfig& cfg) {
  if (data.rows() == 0) throw InvalidArgument("ksd_gradient needs data");
  check_dim(model, data, "ksd_gradient");
  const KernelSpec kernel = cfg.kernel.value_or(KernelSpec{});
  const Vec probs = Vec::Constant(data.rows(), 1.0 / double(data.rows()));
  Mat dshift;
  GradientEstimate est;
  est.objective = ksd_pair_sum(stein_shift(model, data), data, probs, kernel, {}, &dshift) +
                  reg_value(model, cfg.lambda);
  est.grad = shift_vjp(model, data, dshift);
  est.grad += reg_grad(model, cfg.lambda);
  return est;
}

ParamGradient ksd_gradient(const ParticleModel& model, const SampleSet& data,
                           const TrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("ksd_gradient needs data");
  return ksd_gradient(model, stack(data), cfg).grad;
}

GradientEstimate f1sd_gradient(const ParticleModel& model, const Mat& data,
                               const SteinTestFunction& h_star, const TrainConfig& cfg) {
  if (data.rows() == 0) throw InvalidArgument("f1sd_gradient needs data");
  check_dim(model, data, "f1sd_gradient");
  const double inv_n = 1.0 / double(data.rows());
  const Vec probs = Vec::Constant(data.rows(), inv_n);
  // The objective is linear in the shift g with coefficient p_i h(x_i).
  Mat hvals(data.rows(), data.cols());
  for (std::size_t j = 0; j < h_star.components().size(); ++j) {
    hvals.col(Eigen::Index(j)) = energies(h_star.components()[j], data) * inv_n;
  }
  GradientEstimate est;
  est.objective =
      f1sd_objective(stein_shift(model, data), data, probs, h_star) + reg_value(model, cfg.lambda);
  est.grad = shift_vjp(model, data, hvals);
  est.grad += reg_grad(model, cfg.lambda);
  return est;
}

ParamGradient f1sd_gradient(const ParticleModel& model, const SampleSet& data,
                            const SteinTestFunction& h_star, const TrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("f1sd_gradient needs data");
  return f1sd_gradient(model, stack(data), h_star, cfg).grad;
}

TrainResult train(const TrainConfig& cfg, int d, const Mat& data, Rng& rng,
                  const TrainObserver& observer) {
  cfg.validate();
  if (data.rows() == 0) throw InvalidArgument("train needs data");
  if (data.cols() != d + 1) throw DimensionMismatch("training data", d + 1, data.cols());

  const std::uint64_t base = fork_seed(rng);
  Rng init_rng = derive_stream(base, "init");
  Rng mcmc_rng = derive_stream(base, "mcmc");
  Rng inner_rng = derive_stream(base, "f1sd-inner");

  TrainResult result{init_model(cfg, d, init_rng), {}};
  ParticleModel& model = result.model;
  result.trace.records.reserve(std::size_t(cfg.n_iters));
  if (observer) observer(0, model);

  std::optional<SteinTestFunction> h;
  const auto start = std::chrono::steady_clock::now();
  const bool weights_only = cfg.regime == Regime::kF2;
  for (int t = 0; t < cfg.n_iters; ++t) {
    GradientEstimate est;
    switch (cfg.estimator) {
      case Estimator::kMle:
        est = mle_gradient(model, data, cfg, mcmc_rng);
        break;
      case Estimator::kKsd:
        est = ksd_gradient(model, data, cfg);
        break;
      case Estimator::kF1sd: {
        const F1sdConfig& inner = *cfg.inner;
        if (!h || t % inner.refresh_stride == 0) {
          const SteinTestFunction* warm = (h && inner.warm_start) ? &*h : nullptr;
          const Vec probs = Vec::Constant(data.rows(), 1.0 / double(data.rows()));
          h = f1sd_inner_maximize_weighted(model, data, probs, inner, inner_rng, warm).h;
        }
        est = f1sd_gradient(model, data, *h, cfg);
        break;
      }
    }
    TrainRecord rec;
    rec.iter = t;
    rec.objective = est.objective;
    rec.grad_norm = est.grad.norm(weights_only);
    rec.acceptance_rate = cfg.estimator == Estimator::kMle
                              ? est.acceptance_rate
                              : std::numeric_limits<double>::quiet_NaN();
    model.apply_step(est.grad, cfg.step_size);
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(rec);
    if (!model.all_finite()) throw Divergence(t);
    if (observer) observer(t + 1, model);
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, int d, const SampleSet& data, Rng& rng,
                  const TrainObserver& observer) {
  if (data.empty()) throw InvalidArgument("train needs data");
  return train(cfg, d, stack(data), rng, observer);
}

TrainResult train(const TrainConfig& cfg, int d, const Mat& data) {
  Rng rng = derive_stream(cfg.seed, "train");
  return train(cfg, d, data, rng);
}

}  // namespace ebm
