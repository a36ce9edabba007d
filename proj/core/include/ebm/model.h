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
#ifndef EBM_MODEL_H_
#define EBM_MODEL_H_

#include <functional>
#include <string_view>

#include "ebm/sphere.h"

namespace ebm {

// F1: features and weights both trained. F2: features are frozen random
// points of S^d and only the outer weights move.
enum class Regime { kF1, kF2 };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view text);

// Gradient with respect to every (w_i, theta_i) of a ParticleModel.
struct ParamGradient {
  Vec dw;
  Mat dtheta;

  static ParamGradient zeros(Eigen::Index m, int ambient_dim);

  ParamGradient& operator+=(const ParamGradient& other);
  ParamGradient& operator-=(const ParamGradient& other);
  ParamGradient& operator*=(double c);

  // Euclidean norm over all entries; with weights_only the theta block is
  // ignored (what an F2 trainer actually applies).
  double norm(bool weights_only = false) const;
};

// Shallow ReLU energy f(x) = (1/m) sum_i w_i max(0, <theta_i, x>) on S^d.
class ParticleModel {
 public:
  // features: m x (d+1). Throws InvalidArgument on shape problems,
  // non-finite entries, or non-unit features in the F2 regime.
  ParticleModel(int d, Vec weights, Mat features, Regime regime);

  int sphere_dim() const { return d_; }
  int ambient_dim() const { return d_ + 1; }
  Eigen::Index size() const { return weights_.size(); }
  Regime regime() const { return regime_; }
  const Vec& weights() const { return weights_; }
  const Mat& features() const { return features_; }

  // w -= step * g.dw; theta -= step * g.dtheta only in the F1 regime.
  void apply_step(const ParamGradient& g, double step);
  void scale_weights(double factor);

  bool all_finite() const;

  friend bool operator==(const ParticleModel&, const ParticleModel&) = default;

 private:
  int d_;
  Vec weights_;
  Mat features_;
  Regime regime_;
};

// Single-point evaluation.
double energy(const ParticleModel& model, const UnitVector& x);
Vec euclidean_grad_x(const ParticleModel& model, const UnitVector& x);
Vec riemannian_grad_x(const ParticleModel& model, const UnitVector& x);
// Score of the Gibbs measure: minus the Riemannian gradient of the energy.
Vec score(const ParticleModel& model, const UnitVector& x);
ParamGradient param_grad_energy(const ParticleModel& model, const UnitVector& x);

// Batched evaluation over the rows of points.
Vec energies(const ParticleModel& model, const Mat& points);
// Row i holds the Riemannian gradient at point i.
Mat riemannian_grads_x(const ParticleModel& model, const Mat& points);
// sum_k p_k * param_grad_energy(model, x_k). probs defaults to uniform 1/n.
ParamGradient weighted_param_grad_energy(const ParticleModel& model, const Mat& points,
                                         const Vec* probs = nullptr);

// (lambda/m) sum_i (w_i^2 + |theta_i|^2) and its gradient.
double reg_value(const ParticleModel& model, double lambda);
ParamGradient reg_grad(const ParticleModel& model, double lambda);

// (1/m) sum_i |w_i| |theta_i|, an upper bound on the F1 norm of the energy.
double f1_norm_surrogate(const ParticleModel& model);

// An energy evaluated on the rows of a point matrix.
using BatchEnergy = std::function<Vec(const Mat&)>;
BatchEnergy energy_fn(const ParticleModel& model);

// Throws DimensionMismatch when x does not live on the model's sphere.
void check_dim(const ParticleModel& model, const UnitVector& x, const char* where);
void check_dim(const ParticleModel& model, const Mat& points, const char* where);

}  // namespace ebm

#endif  // EBM_MODEL_H_
