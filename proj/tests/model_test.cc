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

#include <gtest/gtest.h>

#include "ebm/errors.h"
#include "test_util.h"

namespace ebm {
namespace {

using testing::e;
using testing::single_neuron;

TEST(ParticleModelTest, Validation) {
  EXPECT_THROW(ParticleModel(2, Vec::Ones(2), Mat::Ones(3, 3), Regime::kF1), InvalidArgument);
  EXPECT_THROW(ParticleModel(2, Vec::Ones(1), Mat::Ones(1, 4), Regime::kF1), InvalidArgument);
  EXPECT_THROW(ParticleModel(2, Vec::Ones(1), Mat::Ones(1, 3), Regime::kF2), InvalidArgument);
  Vec w = Vec::Ones(1);
  w[0] = std::nan("");
  EXPECT_THROW(ParticleModel(2, w, Mat::Ones(1, 3), Regime::kF1), InvalidArgument);
  EXPECT_EQ(parse_regime(to_string(Regime::kF2)), Regime::kF2);
  EXPECT_THROW(parse_regime("F3"), InvalidArgument);
}

TEST(EnergyTest, KnownValues) {
  EXPECT_DOUBLE_EQ(energy(single_neuron(2, 2.0, e(2, 0)), UnitVector(e(2, 0))), 2.0);
  EXPECT_DOUBLE_EQ(energy(single_neuron(2, 2.0, e(2, 0)), UnitVector(-e(2, 0))), 0.0);
  Mat f(2, 3);
  f.row(0) = e(2, 0).transpose();
  f.row(1) = e(2, 0).transpose();
  Vec w(2);
  w << 1.0, -1.0;
  EXPECT_DOUBLE_EQ(energy(ParticleModel(2, w, f, Regime::kF1), UnitVector(e(2, 0))), 0.0);
  EXPECT_THROW(energy(single_neuron(2, 1.0, e(2, 0)), UnitVector(e(3, 0))), DimensionMismatch);
}

TEST(EnergyTest, BatchedMatchesPointwise) {
  Rng rng = derive_stream(1, "test");
  const ParticleModel model = testing::random_model(rng, 4, 9);
  const Mat pts = uniform_samples(rng, 4, 30);
  const Vec batch = energies(model, pts);
  const Mat grads = riemannian_grads_x(model, pts);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const UnitVector x(pts.row(i).transpose());
    EXPECT_NEAR(batch[i], energy(model, x), 1e-13);
    EXPECT_LT((grads.row(i).transpose() - riemannian_grad_x(model, x)).norm(), 1e-13);
  }
}

TEST(EuclideanGradTest, KnownValues) {
  Vec x(3);
  x << 0.6, 0.8, 0.0;
  EXPECT_EQ(euclidean_grad_x(single_neuron(2, 1.0, e(2, 0)), UnitVector(x)), e(2, 0));
  EXPECT_EQ(euclidean_grad_x(single_neuron(2, 1.0, e(2, 0)), UnitVector(Vec(-x))), Vec::Zero(3));
}

// The energy extends to R^{d+1} as a 1-homogeneous function; its ambient
// gradient is what euclidean_grad_x returns.
TEST(EuclideanGradTest, MatchesFiniteDifferences) {
  Rng rng = derive_stream(2, "test");
  for (int t = 0; t < 20; ++t) {
    const ParticleModel model = testing::random_model(rng, 3, 6);
    const UnitVector x = testing::point_with_margin(rng, model.features(), 1e-3);
    auto ext = [&](const Vec& y) {
      return (model.features() * y).cwiseMax(0.0).dot(model.weights()) / double(model.size());
    };
    Vec fd(4);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      Vec a = x.coords(), b = x.coords();
      a[k] += h;
      b[k] -= h;
      fd[k] = (ext(a) - ext(b)) / (2 * h);
    }
    EXPECT_LE(testing::relative_error(euclidean_grad_x(model, x), fd), 1e-6);
  }
}

TEST(RiemannianGradTest, KnownValueAndTangency) {
  EXPECT_LT(riemannian_grad_x(single_neuron(2, 1.0, e(2, 0)), UnitVector(e(2, 0))).norm(), 1e-15);
  Rng rng = derive_stream(3, "test");
  for (int t = 0; t < 50; ++t) {
    const ParticleModel model = testing::random_model(rng, 5, 7);
    const UnitVector x = uniform_sample(rng, 5);
    EXPECT_NEAR(riemannian_grad_x(model, x).dot(x.coords()), 0.0, 1e-12);
  }
}

// Directional derivative along geodesics through x in two tangent directions.
TEST(RiemannianGradTest, MatchesTangentFiniteDifferences) {
  Rng rng = derive_stream(4, "test");
  for (int t = 0; t < 20; ++t) {
    const ParticleModel model = testing::random_model(rng, 2, 5);
    const UnitVector x = testing::point_with_margin(rng, model.features(), 1e-2);
    const Vec g = riemannian_grad_x(model, x);
    Vec t1 = project_tangent(testing::gaussian_vec(rng, 3), x).normalized();
    Vec t2 = Eigen::Vector3d(x.coords()).cross(Eigen::Vector3d(t1));
    Vec fd(2), an(2);
    int k = 0;
    for (const Vec& dir : {t1, t2}) {
      const double h = 1e-6;
      auto at = [&](double s) {
        return energy(model, UnitVector::normalized(std::cos(s) * x.coords() + std::sin(s) * dir));
      };
      fd[k] = (at(h) - at(-h)) / (2 * h);
      an[k] = g.dot(dir);
      ++k;
    }
    EXPECT_LE(testing::relative_error(an, fd), 1e-5);
  }
}

TEST(ScoreTest, Properties) {
  Rng rng = derive_stream(5, "test");
  const ParticleModel zero(3, Vec::Zero(4), testing::gaussian_mat(rng, 4, 4), Regime::kF1);
  const UnitVector x = uniform_sample(rng, 3);
  EXPECT_EQ(score(zero, x), Vec::Zero(4));
  const ParticleModel model = testing::random_model(rng, 3, 4);
  ParticleModel flipped = model;
  flipped.scale_weights(-1.0);
  EXPECT_LT((score(flipped, x) + score(model, x)).norm(), 1e-14);
  const QuadratureGrid grid = quadrature_grid(2, 30, rng);
  const ParticleModel m2 = testing::random_model(rng, 2, 6);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const UnitVector p = grid.point(i);
    EXPECT_NEAR(score(m2, p).dot(p.coords()), 0.0, 1e-12);
  }
}

TEST(ParamGradTest, KnownValues) {
  const ParamGradient g = param_grad_energy(single_neuron(2, 3.0, e(2, 0)), UnitVector(e(2, 0)));
  EXPECT_DOUBLE_EQ(g.dw[0], 1.0);
  EXPECT_EQ(g.dtheta.row(0).transpose(), Vec(3.0 * e(2, 0)));
  const ParamGradient off = param_grad_energy(single_neuron(2, 3.0, e(2, 0)), UnitVector(-e(2, 0)));
  EXPECT_EQ(off.dw[0], 0.0);
  EXPECT_EQ(off.dtheta.norm(), 0.0);
}

TEST(ParamGradTest, MatchesFiniteDifferences) {
  Rng rng = derive_stream(6, "test");
  for (int t = 0; t < 10; ++t) {
    const ParticleModel model = testing::random_model(rng, 5, 7);
    const UnitVector x = testing::point_with_margin(rng, model.features(), 1e-3);
    const ParamGradient fd = testing::finite_difference(model, [&](const ParticleModel& p) { return energy(p, x); });
    EXPECT_LE(testing::relative_error(param_grad_energy(model, x), fd), 1e-5);
  }
}

TEST(ParamGradTest, WeightedBatchMatchesSum) {
  Rng rng = derive_stream(7, "test");
  const ParticleModel model = testing::random_model(rng, 3, 5);
  const Mat pts = uniform_samples(rng, 3, 11);
  const Vec probs = testing::gaussian_vec(rng, 11);
  ParamGradient ref = ParamGradient::zeros(5, 4), mean_ref = ParamGradient::zeros(5, 4);
  for (Eigen::Index i = 0; i < 11; ++i) {
    ParamGradient g = param_grad_energy(model, UnitVector(pts.row(i).transpose()));
    ParamGradient gm = g;
    gm *= 1.0 / 11.0;
    mean_ref += gm;
    g *= probs[i];
    ref += g;
  }
  EXPECT_LE(testing::relative_error(weighted_param_grad_energy(model, pts, &probs), ref), 1e-13);
  EXPECT_LE(testing::relative_error(weighted_param_grad_energy(model, pts), mean_ref), 1e-13);
}

TEST(RegularizerTest, KnownValuesAndGradient) {
  const ParticleModel one = single_neuron(2, 2.0, e(2, 0));
  EXPECT_DOUBLE_EQ(reg_value(one, 0.0), 0.0);
  EXPECT_EQ(reg_grad(one, 0.0).norm(), 0.0);
  EXPECT_DOUBLE_EQ(reg_value(one, 1.0), 5.0);
  EXPECT_THROW(reg_value(one, -1.0), InvalidArgument);
  Rng rng = derive_stream(8, "test");
  for (int t = 0; t < 10; ++t) {
    const ParticleModel model = testing::random_model(rng, 4, 6);
    const ParamGradient fd =
        testing::finite_difference(model, [](const ParticleModel& p) { return reg_value(p, 0.3); });
    EXPECT_LE(testing::relative_error(reg_grad(model, 0.3), fd), 1e-8);
  }
}

TEST(NormSurrogateTest, KnownValuesAndAmGm) {
  Rng rng = derive_stream(9, "test");
  EXPECT_EQ(f1_norm_surrogate(ParticleModel(2, Vec::Zero(3), testing::gaussian_mat(rng, 3, 3), Regime::kF1)), 0.0);
  EXPECT_DOUBLE_EQ(f1_norm_surrogate(single_neuron(2, -2.0, e(2, 1))), 2.0);
  for (int t = 0; t < 100; ++t) {
    const ParticleModel model = testing::random_model(rng, 3, 1 + t % 10, Regime::kF1, 3.0);
    EXPECT_LE(f1_norm_surrogate(model), reg_value(model, 1.0) / 2.0 + 1e-12);
  }
}

TEST(ApplyStepTest, F2MovesOnlyWeights) {
  Rng rng = derive_stream(10, "test");
  ParticleModel model = testing::random_model(rng, 3, 5, Regime::kF2);
  const Mat before = model.features();
  ParamGradient g{testing::gaussian_vec(rng, 5), testing::gaussian_mat(rng, 5, 4)};
  const Vec w_before = model.weights();
  model.apply_step(g, 0.5);
  EXPECT_EQ(model.features(), before);
  EXPECT_LT((model.weights() - (w_before - 0.5 * g.dw)).norm(), 1e-15);
  ParticleModel f1 = testing::random_model(rng, 3, 5, Regime::kF1);
  const Mat f1_before = f1.features();
  f1.apply_step(g, 0.5);
  EXPECT_LT((f1.features() - (f1_before - 0.5 * g.dtheta)).norm(), 1e-15);
}

}  // namespace
}  // namespace ebm
