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
#include "ebm/stein.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ebm/errors.h"

namespace ebm {

namespace {

constexpr Eigen::Index kBlockRows = 256;

void check_pair(const UnitVector& x, const UnitVector& y) {
  if (x.ambient_dim() != y.ambient_dim()) {
    throw DimensionMismatch("kernel arguments", x.ambient_dim(), y.ambient_dim());
  }
}

double sq_dist_from_cos(double c) { return std::max(0.0, 2.0 - 2.0 * c); }

double cross_trace_from_cos(double c, double kval, int d, double sigma2) {
  return ((d - 1 + c * c) / sigma2 + (c * c * c - c) / (sigma2 * sigma2)) * kval;
}

Vec uniform_probs(Eigen::Index n) { return Vec::Constant(n, 1.0 / double(n)); }

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidArgument("kernel bandwidth sigma2 must be positive");
  }
}

double rbf(const KernelSpec& k, const UnitVector& x, const UnitVector& y) {
  check_pair(x, y);
  return std::exp(-(x.coords() - y.coords()).squaredNorm() / (2.0 * k.sigma2));
}

Vec rbf_grad_ambient(const KernelSpec& k, const UnitVector& x, const UnitVector& y) {
  const double kval = rbf(k, x, y);
  return -(x.coords() - y.coords()) * (kval / k.sigma2);
}

double rbf_cross_trace_ambient(const KernelSpec& k, const UnitVector& x, const UnitVector& y) {
  const double kval = rbf(k, x, y);
  const double sq = (x.coords() - y.coords()).squaredNorm();
  return (double(x.ambient_dim()) / k.sigma2 - sq / (k.sigma2 * k.sigma2)) * kval;
}

Vec rbf_grad_x(const KernelSpec& k, const UnitVector& x, const UnitVector& y) {
  const double kval = rbf(k, x, y);
  const double c = x.coords().dot(y.coords());
  return (y.coords() - c * x.coords()) * (kval / k.sigma2);
}

double rbf_cross_trace(const KernelSpec& k, const UnitVector& x, const UnitVector& y) {
  const double kval = rbf(k, x, y);
  const double c = x.coords().dot(y.coords());
  return cross_trace_from_cos(c, kval, x.sphere_dim(), k.sigma2);
}

SteinTestFunction::SteinTestFunction(std::vector<ParticleModel> components, double budget)
    : components_(std::move(components)), budget_(budget) {
  if (components_.empty()) throw InvalidArgument("test function needs components");
  if (!(budget_ > 0.0)) throw InvalidArgument("test function budget must be positive");
  const int d = components_.front().sphere_dim();
  if (int(components_.size()) != d + 1) {
    throw InvalidArgument("test function needs d+1 = " + std::to_string(d + 1) +
                          " components, got " + std::to_string(components_.size()));
  }
  const Eigen::Index m_h = components_.front().size();
  for (const ParticleModel& c : components_) {
    if (c.sphere_dim() != d || c.size() != m_h) {
      throw InvalidArgument("test function components must share d and m_h");
    }
  }
}

SteinTestFunction SteinTestFunction::random(int d, Eigen::Index m_h, double budget,
                                            double weight_scale, Rng& rng) {
  if (m_h < 1) throw InvalidArgument("m_h must be >= 1");
  std::uniform_real_distribution<double> unif(-weight_scale, weight_scale);
  std::vector<ParticleModel> components;
  components.reserve(std::size_t(d + 1));
  for (int j = 0; j <= d; ++j) {
    Vec w(m_h);
    for (Eigen::Index i = 0; i < m_h; ++i) w[i] = unif(rng);
    components.emplace_back(d, std::move(w), uniform_samples(rng, d, m_h), Regime::kF1);
  }
  SteinTestFunction h(std::move(components), budget);
  h.project();
  return h;
}

double SteinTestFunction::mixed_norm() const {
  double total = 0.0;
  for (const ParticleModel& c : components_) {
    const double s = f1_norm_surrogate(c);
    total += s * s;
  }
  return std::sqrt(total);
}

void SteinTestFunction::project() {
  const double norm = mixed_norm();
  if (norm > budget_) scale(budget_ / norm);
}

void SteinTestFunction::scale(double factor) {
  for (ParticleModel& c : components_) c.scale_weights(factor);
}

Vec SteinTestFunction::evaluate(const UnitVector& x) const {
  Vec out(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) out[Eigen::Index(j)] = energy(components_[j], x);
  return out;
}

Mat stein_shift(const ParticleModel& model, const Mat& points) {
  Mat g = -riemannian_grads_x(model, points);
  g -= double(model.sphere_dim()) * points;
  return g;
}

Vec stein_traces(const ParticleModel& model, const SteinTestFunction& h, const Mat& points) {
  check_dim(model, points, "stein_traces");
  if (h.sphere_dim() != model.sphere_dim()) {
    throw DimensionMismatch("stein_traces test function", model.ambient_dim(), h.sphere_dim() + 1);
  }
  const Mat shift = stein_shift(model, points);
  Vec out = Vec::Zero(points.rows());
  for (std::size_t j = 0; j < h.components().size(); ++j) {
    const Eigen::Index col = Eigen::Index(j);
    const ParticleModel& hj = h.components()[j];
    out += shift.col(col).cwiseProduct(energies(hj, points));
    out += riemannian_grads_x(hj, points).col(col);
  }
  return out;
}

double stein_trace(const ParticleModel& model, const SteinTestFunction& h, const UnitVector& x) {
  check_dim(model, x, "stein_trace");
  const Vec g = score(model, x) - double(model.sphere_dim()) * x.coords();
  double total = 0.0;
  for (std::size_t j = 0; j < h.components().size(); ++j) {
    const ParticleModel& hj = h.components()[j];
    total += g[Eigen::Index(j)] * energy(hj, x) + riemannian_grad_x(hj, x)[Eigen::Index(j)];
  }
  return total;
}

double u_tilde_pair(const ParticleModel& model, const KernelSpec& k, const UnitVector& x,
                    const UnitVector& y) {
  check_dim(model, x, "u_tilde_pair");
  check_dim(model, y, "u_tilde_pair");
  const double d = double(model.sphere_dim());
  const Vec gx = score(model, x) - d * x.coords();
  const Vec gy = score(model, y) - d * y.coords();
  const double kval = rbf(k, x, y);
  // grad_{x'} k is rbf_grad_x with the arguments swapped.
  return gx.dot(gy) * kval + gx.dot(rbf_grad_x(k, y, x)) + gy.dot(rbf_grad_x(k, x, y));
}

double u_pair(const ParticleModel& model, const KernelSpec& k, const UnitVector& x,
              const UnitVector& y) {
  return u_tilde_pair(model, k, x, y) + rbf_cross_trace(k, x, y);
}

double ksd_pair_sum(const Mat& shift, const Mat& points, const Vec& probs, const KernelSpec& k,
                    const PairSumOptions& options, Mat* grad_shift) {
  k.validate();
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (shift.rows() != n || shift.cols() != dim || probs.size() != n) {
    throw InvalidArgument("ksd_pair_sum shape mismatch");
  }
  if (grad_shift != nullptr && options.skip_diagonal) {
    throw InvalidArgument("ksd_pair_sum gradient requires the diagonal");
  }
  const int d = int(dim) - 1;
  const double s2 = k.sigma2;
  // g_j . x_j for the self terms.
  const Vec gx_self = shift.cwiseProduct(points).rowwise().sum();
  if (grad_shift != nullptr) grad_shift->setZero(n, dim);

  double total = 0.0;
  for (Eigen::Index start = 0; start < n; start += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, n - start);
    const auto xb = points.middleRows(start, rows);
    const auto gb = shift.middleRows(start, rows);
    const Eigen::MatrixXd cos = xb * points.transpose();
    const Eigen::MatrixXd gg = gb * shift.transpose();
    // gxo(a, j) = g_a . x_j ; xgo(a, j) = x_a . g_j
    const Eigen::MatrixXd gxo = gb * points.transpose();
    const Eigen::MatrixXd xgo = xb * shift.transpose();
    Eigen::MatrixXd weighted(rows, n);
    for (Eigen::Index a = 0; a < rows; ++a) {
      const Eigen::Index i = start + a;
      const double pi = probs[i];
      double row_sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double c = cos(a, j);
        const double kval = std::exp(-sq_dist_from_cos(c) / (2.0 * s2));
        double u = kval * (gg(a, j) + (gx_self[i] - c * gxo(a, j)) / s2 +
                           (gx_self[j] - c * xgo(a, j)) / s2);
        if (options.include_trace) u += cross_trace_from_cos(c, kval, d, s2);
        const double pij = pi * probs[j];
        if (!(options.skip_diagonal && i == j)) row_sum += pij * u;
        weighted(a, j) = probs[j] * kval;
      }
      total += row_sum;
    }
    if (grad_shift != nullptr) {
      // d/dg_i = 2 p_i sum_j p_j k_ij [g_j + (x_i - c_ij x_j) / sigma2].
      const Vec wsum = weighted.rowwise().sum();
      Mat block = weighted * shift;
      block += (wsum / s2).asDiagonal() * Mat(xb);
      block -= (weighted.cwiseProduct(cos) / s2) * points;
      for (Eigen::Index a = 0; a < rows; ++a) {
        grad_shift->row(start + a) = 2.0 * probs[start + a] * block.row(a);
      }
    }
  }
  return total;
}

double ksd_biased(const ParticleModel& model, const KernelSpec& k, const SampleSet& samples) {
  if (samples.empty()) throw InvalidArgument("ksd_biased needs at least one sample");
  const Mat points = stack(samples);
  check_dim(model, points, "ksd_biased");
  return ksd_pair_sum(stein_shift(model, points), points, uniform_probs(points.rows()), k);
}

double ksd_unbiased(const ParticleModel& model, const KernelSpec& k, const SampleSet& samples) {
  if (samples.size() < 2) throw InvalidArgument("ksd_unbiased needs at least two samples");
  const Mat points = stack(samples);
  check_dim(model, points, "ksd_unbiased");
  const double n = double(points.rows());
  PairSumOptions options;
  options.skip_diagonal = true;
  // With p_i = 1/n the off-diagonal sum carries 1/n^2; rescale to 1/(n(n-1)).
  const double sum =
      ksd_pair_sum(stein_shift(model, points), points, uniform_probs(points.rows()), k, options);
  return sum * n / (n - 1.0);
}

double ksd_population(const ParticleModel& model_q, const BatchEnergy& energy_p,
                      const QuadratureGrid& grid, const KernelSpec& k) {
  check_dim(model_q, grid.points(), "ksd_population");
  const Vec fp = energy_p(grid.points());
  const double fmin = fp.minCoeff();
  Vec probs = grid.weights().cwiseProduct((-(fp.array() - fmin)).exp().matrix());
  probs /= probs.sum();
  PairSumOptions options;
  options.include_trace = true;
  return ksd_pair_sum(stein_shift(model_q, grid.points()), grid.points(), probs, k, options);
}

void F1sdConfig::validate() const {
  if (m_h < 1 || steps < 0 || !(step_size > 0.0) || !(budget > 0.0) || refresh_stride < 1) {
    throw InvalidArgument("invalid F1-SD inner configuration");
  }
}

namespace {

// Objective and (optionally) its gradient with respect to every component's
// parameters. Component j contributes
//   sum_i p_i [g_ij h_j(x_i) + (grad h_j(x_i))_j].
double f1sd_eval(const Mat& shift, const Mat& points, const Vec& probs,
                 const SteinTestFunction& h, std::vector<ParamGradient>* grads) {
  double total = 0.0;
  if (grads != nullptr) grads->clear();
  for (std::size_t jj = 0; jj < h.components().size(); ++jj) {
    const Eigen::Index j = Eigen::Index(jj);
    const ParticleModel& hj = h.components()[jj];
    const double inv_m = 1.0 / double(hj.size());
    const Eigen::MatrixXd pre = points * hj.features().transpose();  // n x m_h
    const Eigen::MatrixXd relu = pre.cwiseMax(0.0);
    const Eigen::MatrixXd active = (pre.array() >= 0.0).cast<double>();
    const Vec pg = probs.cwiseProduct(shift.col(j));
    const Vec px = probs.cwiseProduct(points.col(j));
    // Per-neuron sums.
    const Vec s_g = relu.transpose() * pg;    // sum_i p_i g_ij relu_ik
    const Vec s_x = relu.transpose() * px;    // sum_i p_i x_ij relu_ik
    const Vec cnt = active.transpose() * probs;  // sum_i p_i 1_ik
    // d/dw_k (times m_h): s_g + theta_kj cnt - s_x.
    const Vec dw = (s_g + hj.features().col(j).cwiseProduct(cnt) - s_x) * inv_m;
    total += dw.dot(hj.weights());
    if (grads != nullptr) {
      ParamGradient g;
      g.dw = dw;
      // d/dtheta_k = (w_k/m) [sum_i p_i 1_ik (g_ij - x_ij) x_i + cnt_k e_j].
      const Vec coef = pg - px;
      Mat dtheta = active.transpose() * (coef.asDiagonal() * points);
      dtheta.col(j) += cnt;
      g.dtheta = (hj.weights() * inv_m).asDiagonal() * dtheta;
      grads->push_back(std::move(g));
    }
  }
  return total;
}

}  // namespace

double f1sd_objective(const Mat& shift, const Mat& points, const Vec& probs,
                      const SteinTestFunction& h) {
  return f1sd_eval(shift, points, probs, h, nullptr);
}

F1sdResult f1sd_inner_maximize_weighted(const ParticleModel& model, const Mat& points,
                                        const Vec& probs, const F1sdConfig& cfg, Rng& rng,
                                        const SteinTestFunction* warm_start) {
  cfg.validate();
  if (points.rows() == 0) throw InvalidArgument("f1sd_inner_maximize needs samples");
  check_dim(model, points, "f1sd_inner_maximize");
  if (probs.size() != points.rows()) throw InvalidArgument("probability vector size mismatch");

  const bool warm = warm_start != nullptr && warm_start->sphere_dim() == model.sphere_dim() &&
                    warm_start->components().front().size() == cfg.m_h;
  SteinTestFunction h =
      warm ? SteinTestFunction(warm_start->components(), cfg.budget)
           : SteinTestFunction::random(model.sphere_dim(), cfg.m_h, cfg.budget,
                                       cfg.init_weight_scale, rng);
  h.project();

  const Mat shift = stein_shift(model, points);
  std::vector<ParamGradient> grads;
  double current = f1sd_eval(shift, points, probs, h, &grads);
  F1sdResult result{h, current, current, 0.0};
  double previous = current;
  for (int t = 0; t < cfg.steps; ++t) {
    auto& comps = h.mutable_components();
    for (std::size_t j = 0; j < comps.size(); ++j) comps[j].apply_step(grads[j], -cfg.step_size);
    h.project();
    previous = current;
    current = f1sd_eval(shift, points, probs, h, &grads);
    if (current > result.value) {
      result.value = current;
      result.h = h;
    }
  }
  result.final_delta = current - previous;
  return result;
}

F1sdResult f1sd_inner_maximize(const ParticleModel& model, const SampleSet& samples,
                               const F1sdConfig& cfg, Rng& rng,
                               const SteinTestFunction* warm_start) {
  if (samples.empty()) throw InvalidArgument("f1sd_inner_maximize needs samples");
  const Mat points = stack(samples);
  return f1sd_inner_maximize_weighted(model, points, uniform_probs(points.rows()), cfg, rng,
                                      warm_start);
}

}  // namespace ebm
