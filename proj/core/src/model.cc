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
#include "ebm/model.h"

#include <cmath>
#include <string>

#include "ebm/errors.h"

namespace ebm {

std::string_view to_string(Regime regime) {
  return regime == Regime::kF1 ? "F1" : "F2";
}

Regime parse_regime(std::string_view text) {
  if (text == "F1") return Regime::kF1;
  if (text == "F2") return Regime::kF2;
  throw InvalidArgument("unknown regime '" + std::string(text) + "'");
}

ParamGradient ParamGradient::zeros(Eigen::Index m, int ambient_dim) {
  return {Vec::Zero(m), Mat::Zero(m, ambient_dim)};
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& other) {
  dw += other.dw;
  dtheta += other.dtheta;
  return *this;
}

ParamGradient& ParamGradient::operator-=(const ParamGradient& other) {
  dw -= other.dw;
  dtheta -= other.dtheta;
  return *this;
}

ParamGradient& ParamGradient::operator*=(double c) {
  dw *= c;
  dtheta *= c;
  return *this;
}

double ParamGradient::norm(bool weights_only) const {
  if (weights_only) return dw.norm();
  return std::sqrt(dw.squaredNorm() + dtheta.squaredNorm());
}

ParticleModel::ParticleModel(int d, Vec weights, Mat features, Regime regime)
    : d_(d), weights_(std::move(weights)), features_(std::move(features)), regime_(regime) {
  if (d_ < 1) throw InvalidArgument("sphere dimension must be >= 1");
  if (weights_.size() < 1) throw InvalidArgument("model needs at least one neuron");
  if (features_.rows() != weights_.size()) {
    throw InvalidArgument("features rows (" + std::to_string(features_.rows()) +
                          ") != neuron count (" + std::to_string(weights_.size()) + ")");
  }
  if (features_.cols() != d_ + 1) {
    throw DimensionMismatch("model features", d_ + 1, features_.cols());
  }
  if (!all_finite()) throw InvalidArgument("model parameters must be finite");
  if (regime_ == Regime::kF2) {
    for (Eigen::Index i = 0; i < features_.rows(); ++i) {
      if (std::abs(features_.row(i).norm() - 1.0) > kUnitNormTolerance) {
        throw InvalidArgument("F2 features must be unit vectors");
      }
    }
  }
}

void ParticleModel::apply_step(const ParamGradient& g, double step) {
  weights_ -= step * g.dw;
  if (regime_ == Regime::kF1) features_ -= step * g.dtheta;
}

void ParticleModel::scale_weights(double factor) { weights_ *= factor; }

bool ParticleModel::all_finite() const {
  return weights_.allFinite() && features_.allFinite();
}

void check_dim(const ParticleModel& model, const UnitVector& x, const char* where) {
  if (x.ambient_dim() != model.ambient_dim()) {
    throw DimensionMismatch(where, model.ambient_dim(), x.ambient_dim());
  }
}

void check_dim(const ParticleModel& model, const Mat& points, const char* where) {
  if (points.cols() != model.ambient_dim()) {
    throw DimensionMismatch(where, model.ambient_dim(), points.cols());
  }
}

double energy(const ParticleModel& model, const UnitVector& x) {
  check_dim(model, x, "energy");
  const Vec pre = model.features() * x.coords();
  return pre.cwiseMax(0.0).dot(model.weights()) / double(model.size());
}

Vec euclidean_grad_x(const ParticleModel& model, const UnitVector& x) {
  check_dim(model, x, "euclidean_grad_x");
  const Vec pre = model.features() * x.coords();
  // Closed half-space convention at the kink.
  const Vec active = (pre.array() >= 0.0).cast<double>().matrix().cwiseProduct(model.weights());
  return model.features().transpose() * active / double(model.size());
}

Vec riemannian_grad_x(const ParticleModel& model, const UnitVector& x) {
  return project_tangent(euclidean_grad_x(model, x), x);
}

Vec score(const ParticleModel& model, const UnitVector& x) {
  return -riemannian_grad_x(model, x);
}

ParamGradient param_grad_energy(const ParticleModel& model, const UnitVector& x) {
  check_dim(model, x, "param_grad_energy");
  const double inv_m = 1.0 / double(model.size());
  const Vec pre = model.features() * x.coords();
  ParamGradient g = ParamGradient::zeros(model.size(), model.ambient_dim());
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    if (pre[i] >= 0.0) {
      g.dw[i] = pre[i] * inv_m;
      g.dtheta.row(i) = (model.weights()[i] * inv_m) * x.coords().transpose();
    }
  }
  return g;
}

Vec energies(const ParticleModel& model, const Mat& points) {
  check_dim(model, points, "energies");
  const Eigen::MatrixXd pre = points * model.features().transpose();
  return pre.cwiseMax(0.0) * model.weights() / double(model.size());
}

Mat riemannian_grads_x(const ParticleModel& model, const Mat& points) {
  check_dim(model, points, "riemannian_grads_x");
  const Eigen::MatrixXd pre = points * model.features().transpose();
  Eigen::MatrixXd active = (pre.array() >= 0.0).cast<double>();
  active = active * model.weights().asDiagonal();
  Mat grads = active * model.features() / double(model.size());
  const Vec radial = (grads.cwiseProduct(points)).rowwise().sum();
  grads -= radial.asDiagonal() * points;
  return grads;
}

ParamGradient weighted_param_grad_energy(const ParticleModel& model, const Mat& points,
                                         const Vec* probs) {
  check_dim(model, points, "weighted_param_grad_energy");
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidArgument("weighted_param_grad_energy needs points");
  const double inv_m = 1.0 / double(model.size());
  const Eigen::MatrixXd pre = points * model.features().transpose();
  Eigen::MatrixXd active = (pre.array() >= 0.0).cast<double>();
  Eigen::MatrixXd relu = pre.cwiseMax(0.0);
  ParamGradient g;
  if (probs != nullptr) {
    if (probs->size() != n) throw InvalidArgument("probability vector size mismatch");
    g.dw = relu.transpose() * *probs * inv_m;
    active = probs->asDiagonal() * active;
  } else {
    g.dw = relu.transpose() * Vec::Constant(n, 1.0 / double(n)) * inv_m;
    active /= double(n);
  }
  g.dtheta = (model.weights() * inv_m).asDiagonal() * (active.transpose() * points);
  return g;
}

BatchEnergy energy_fn(const ParticleModel& model) {
  return [model](const Mat& points) { return energies(model, points); };
}

double reg_value(const ParticleModel& model, double lambda) {
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  return lambda / double(model.size()) *
         (model.weights().squaredNorm() + model.features().squaredNorm());
}

ParamGradient reg_grad(const ParticleModel& model, double lambda) {
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  const double c = 2.0 * lambda / double(model.size());
  return {c * model.weights(), c * model.features()};
}

double f1_norm_surrogate(const ParticleModel& model) {
  return model.weights().cwiseAbs().dot(model.features().rowwise().norm()) /
         double(model.size());
}

}  // namespace ebm
