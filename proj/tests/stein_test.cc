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

#include <cmath>

#include <gtest/gtest.h>

#include "ebm/errors.h"
#include "ebm/teacher.h"
#include "test_util.h"

namespace ebm {
namespace {

double ambient_rbf(double sigma2, const Vec& a, const Vec& b) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma2));
}

// Riemannian kernel gradient written out independently.
Vec sphere_grad(double sigma2, const Vec& x, const Vec& y) {
  const double c = x.dot(y);
  return (y - c * x) * ambient_rbf(sigma2, x, y) / sigma2;
}

// g(x)^T g(y) k + g(x)^T grad_y k + g(y)^T grad_x k with g = score - d x.
double naive_u_tilde(const ParticleModel& model, double sigma2, const Vec& x, const Vec& y) {
  const int d = model.sphere_dim();
  const Vec gx = score(model, UnitVector(x)) - d * x;
  const Vec gy = score(model, UnitVector(y)) - d * y;
  return gx.dot(gy) * ambient_rbf(sigma2, x, y) + gx.dot(sphere_grad(sigma2, y, x)) +
         gy.dot(sphere_grad(sigma2, x, y));
}

TEST(KernelTest, DiagonalValues) {
  Rng rng = derive_stream(1, "test");
  const KernelSpec k{0.7};
  const UnitVector x = uniform_sample(rng, 4);
  EXPECT_DOUBLE_EQ(rbf(k, x, x), 1.0);
  EXPECT_LT(rbf_grad_x(k, x, x).norm(), 1e-14);
  EXPECT_EQ(rbf_grad_ambient(k, x, x).norm(), 0.0);
  EXPECT_THROW(KernelSpec{0.0}.validate(), InvalidArgument);
}

TEST(KernelTest, AmbientDerivativesMatchFiniteDifferences) {
  Rng rng = derive_stream(2, "test");
  for (int t = 0; t < 20; ++t) {
    const double s2 = 0.5 + t * 0.1;
    const KernelSpec k{s2};
    const UnitVector x = uniform_sample(rng, 3), y = uniform_sample(rng, 3);
    Vec fd(4);
    double trace = 0.0;
    const double h = 1e-6, h2 = 1e-4;
    for (int i = 0; i < 4; ++i) {
      Vec a = x.coords(), b = x.coords();
      a[i] += h;
      b[i] -= h;
      fd[i] = (ambient_rbf(s2, a, y.coords()) - ambient_rbf(s2, b, y.coords())) / (2 * h);
      double mixed = 0.0;
      for (int sx : {1, -1}) {
        for (int sy : {1, -1}) {
          Vec xa = x.coords(), ya = y.coords();
          xa[i] += sx * h2;
          ya[i] += sy * h2;
          mixed += sx * sy * ambient_rbf(s2, xa, ya);
        }
      }
      trace += mixed / (4 * h2 * h2);
    }
    EXPECT_LE(testing::relative_error(rbf_grad_ambient(k, x, y), fd), 1e-6);
    EXPECT_NEAR(rbf_cross_trace_ambient(k, x, y), trace, 1e-6 * std::max(1.0, std::abs(trace)));
  }
}

TEST(KernelTest, SphereDerivativesMatchFiniteDifferences) {
  Rng rng = derive_stream(3, "test");
  for (int t = 0; t < 20; ++t) {
    const double s2 = 0.5 + t * 0.1;
    const KernelSpec k{s2};
    const UnitVector x = uniform_sample(rng, 3), y = uniform_sample(rng, 3);
    // Gradients of the 0-homogeneous extension are tangent, so plain ambient
    // differences give the Riemannian gradient.
    auto k0 = [&](const Vec& a, const Vec& b) { return ambient_rbf(s2, a.normalized(), b.normalized()); };
    Vec fd(4);
    double trace = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      Vec a = x.coords(), b = x.coords();
      a[i] += h;
      b[i] -= h;
      fd[i] = (k0(a, y.coords()) - k0(b, y.coords())) / (2 * h);
      const double up = rbf_grad_x(k, y, UnitVector::normalized(a))[i];
      const double down = rbf_grad_x(k, y, UnitVector::normalized(b))[i];
      trace += (up - down) / (2 * h);
    }
    EXPECT_LE(testing::relative_error(rbf_grad_x(k, x, y), fd), 1e-6);
    EXPECT_NEAR(rbf_cross_trace(k, x, y), trace, 1e-6 * std::max(1.0, std::abs(trace)));
  }
}

SteinTestFunction zero_test_function(int d, Rng& rng) {
  std::vector<ParticleModel> comps;
  for (int j = 0; j <= d; ++j) {
    comps.emplace_back(d, Vec::Zero(3), testing::gaussian_mat(rng, 3, d + 1), Regime::kF1);
  }
  return SteinTestFunction(std::move(comps), 1.0);
}

TEST(SteinTraceTest, ZeroAndLinearity) {
  Rng rng = derive_stream(4, "test");
  const ParticleModel model = testing::random_model(rng, 3, 5);
  const UnitVector x = uniform_sample(rng, 3);
  EXPECT_EQ(stein_trace(model, zero_test_function(3, rng), x), 0.0);
  const SteinTestFunction h = SteinTestFunction::random(3, 6, 1.0, 1.0, rng);
  SteinTestFunction h2 = h;
  h2.scale(-2.5);
  EXPECT_NEAR(stein_trace(model, h2, x), -2.5 * stein_trace(model, h, x), 1e-12);
}

TEST(SteinTraceTest, MatchesComposedDefinition) {
  Rng rng = derive_stream(5, "test");
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 4;
    const ParticleModel model = testing::random_model(rng, d, 4);
    const SteinTestFunction h = SteinTestFunction::random(d, 5, 1.0, 1.0, rng);
    const UnitVector x = uniform_sample(rng, d);
    const Vec s = score(model, x);
    double ref = 0.0;
    for (int j = 0; j <= d; ++j) {
      const ParticleModel& hj = h.components()[std::size_t(j)];
      ref += (s[j] - d * x[j]) * energy(hj, x) + riemannian_grad_x(hj, x)[j];
    }
    EXPECT_NEAR(stein_trace(model, h, x), ref, 1e-12);
    const Mat pts = uniform_samples(rng, d, 7);
    const Vec batch = stein_traces(model, h, pts);
    for (Eigen::Index i = 0; i < 7; ++i) {
      EXPECT_NEAR(batch[i], stein_trace(model, h, UnitVector(pts.row(i).transpose())), 1e-12);
    }
  }
}

TEST(SteinTraceTest, SteinIdentityOnTwoSphere) {
  Rng rng = derive_stream(6, "test");
  const QuadratureGrid grid = quadrature_grid(2, 200, rng);
  for (int t = 0; t < 20; ++t) {
    ParticleModel model = testing::random_model(rng, 2, 1 + t % 6, t % 2 ? Regime::kF2 : Regime::kF1, 3.0);
    const SteinTestFunction h = SteinTestFunction::random(2, 5, 1.0, 1.0, rng);
    const Vec traces = stein_traces(model, h, grid.points());
    const Vec p = testing::gibbs_weights(grid, energies(model, grid.points()));
    EXPECT_LE(std::abs(p.dot(traces)), 1e-2 * traces.cwiseAbs().maxCoeff());
  }
}

TEST(PairTermTest, SymmetryAndTraceDifference) {
  Rng rng = derive_stream(7, "test");
  const KernelSpec k{0.8};
  for (int t = 0; t < 20; ++t) {
    const ParticleModel model = testing::random_model(rng, 3, 4);
    const UnitVector x = uniform_sample(rng, 3), y = uniform_sample(rng, 3);
    EXPECT_NEAR(u_pair(model, k, x, y), u_pair(model, k, y, x), 1e-12);
    EXPECT_NEAR(u_pair(model, k, x, y) - u_tilde_pair(model, k, x, y), rbf_cross_trace(k, x, y), 1e-13);
    EXPECT_NEAR(u_tilde_pair(model, k, x, y), naive_u_tilde(model, 0.8, x.coords(), y.coords()), 1e-12);
  }
}

TEST(KsdBiasedTest, SingleSampleIsShiftNormSquared) {
  Rng rng = derive_stream(8, "test");
  const ParticleModel model = testing::random_model(rng, 4, 6);
  const UnitVector x = uniform_sample(rng, 4);
  const double expected = (score(model, x) - 4.0 * x.coords()).squaredNorm();
  EXPECT_NEAR(ksd_biased(model, KernelSpec{}, {x}), expected, 1e-12 * expected);
  EXPECT_THROW(ksd_biased(model, KernelSpec{}, {}), InvalidArgument);
}

TEST(KsdBiasedTest, DuplicationAndBruteForce) {
  Rng rng = derive_stream(9, "test");
  const ParticleModel model = testing::random_model(rng, 3, 5);
  const KernelSpec k{1.3};
  const SampleSet xs = unstack(uniform_samples(rng, 3, 50));
  double brute = 0.0;
  for (const UnitVector& a : xs) {
    for (const UnitVector& b : xs) brute += naive_u_tilde(model, 1.3, a.coords(), b.coords());
  }
  brute /= 2500.0;
  const double v = ksd_biased(model, k, xs);
  EXPECT_NEAR(v, brute, 1e-12 * std::max(1.0, std::abs(brute)));
  SampleSet doubled = xs;
  doubled.insert(doubled.end(), xs.begin(), xs.end());
  EXPECT_NEAR(ksd_biased(model, k, doubled), v, 1e-12 * std::max(1.0, std::abs(v)));
}

TEST(KsdUnbiasedTest, PairAndPermutation) {
  Rng rng = derive_stream(10, "test");
  const ParticleModel model = testing::random_model(rng, 3, 5);
  const KernelSpec k{1.0};
  const UnitVector a = uniform_sample(rng, 3), b = uniform_sample(rng, 3);
  EXPECT_NEAR(ksd_unbiased(model, k, {a, b}), u_tilde_pair(model, k, a, b), 1e-12);
  EXPECT_THROW(ksd_unbiased(model, k, {a}), InvalidArgument);
  SampleSet xs = unstack(uniform_samples(rng, 3, 40));
  const double v = ksd_unbiased(model, k, xs);
  std::shuffle(xs.begin(), xs.end(), rng);
  EXPECT_NEAR(ksd_unbiased(model, k, xs), v, 1e-12 * std::max(1.0, std::abs(v)));
}

TEST(KsdUnbiasedTest, BiasedUnbiasedIdentity) {
  Rng rng = derive_stream(11, "test");
  for (int t = 0; t < 10; ++t) {
    const ParticleModel model = testing::random_model(rng, 2 + t % 3, 6);
    const KernelSpec k{0.5 + 0.2 * t};
    const SampleSet xs = unstack(uniform_samples(rng, model.sphere_dim(), 37));
    const double n = double(xs.size());
    double diag = 0.0;
    for (const UnitVector& x : xs) diag += u_tilde_pair(model, k, x, x);
    const double biased = ksd_biased(model, k, xs);
    const double rhs = (n - 1.0) / n * ksd_unbiased(model, k, xs) + diag / (n * n);
    EXPECT_NEAR(biased, rhs, 1e-12 * std::max(1.0, std::abs(biased)));
  }
}

// The unbiased statistic over u~ is offset by the mean kernel cross-trace, which
// does not depend on the model; adding it back gives the full-u statistic whose
// mean vanishes at the true model.
double full_u_unbiased(const ParticleModel& model, const KernelSpec& k, const SampleSet& xs) {
  const Mat pts = stack(xs);
  const Eigen::Index n = pts.rows();
  const double trace = ksd_pair_sum(Mat::Zero(n, pts.cols()), pts, Vec::Ones(n), k, {true, true});
  return ksd_unbiased(model, k, xs) + trace / double(n * (n - 1));
}

TEST(KsdUnbiasedTest, UnbiasedAtTrueModel) {
  Rng rng = derive_stream(12, "test");
  const TeacherSpec truth = TeacherSpec::random(2, Vec::Constant(2, -3.0), rng);
  const double fmin = estimate_min(truth, MinSearchOptions{}, rng);
  const KernelSpec k{1.0};
  std::vector<double> v;
  for (int r = 0; r < 200; ++r) v.push_back(full_u_unbiased(truth.as_model(), k, rejection_sample(truth, fmin, 500, rng)));
  const Eigen::Map<const Vec> vals(v.data(), Eigen::Index(v.size()));
  const double mean = vals.mean();
  const double se = std::sqrt((vals.array() - mean).square().sum() / double(v.size() - 1) / double(v.size()));
  EXPECT_LE(std::abs(mean), 3.0 * se);
}

TEST(KsdPopulationTest, ZeroAtTruthAndNonnegative) {
  Rng rng = derive_stream(13, "test");
  const QuadratureGrid grid = quadrature_grid(2, 60, rng);
  const KernelSpec k{1.0};
  for (int t = 0; t < 4; ++t) {
    const ParticleModel p = testing::random_model(rng, 2, 3, Regime::kF1, 3.0);
    const ParticleModel q = testing::random_model(rng, 2, 3, Regime::kF1, 3.0);
    EXPECT_LE(std::abs(ksd_population(p, energy_fn(p), grid, k)), 1e-3);
    EXPECT_GE(ksd_population(q, energy_fn(p), grid, k), -1e-6);
  }
}

TEST(KsdPopulationTest, MatchesMonteCarlo) {
  Rng rng = derive_stream(14, "test");
  const TeacherSpec p = TeacherSpec::random(2, Vec::Constant(2, -3.0), rng);
  const ParticleModel q = testing::random_model(rng, 2, 3, Regime::kF1, 2.0);
  const KernelSpec k{1.0};
  const double pop = ksd_population(q, energy_fn(p), quadrature_grid(2, 80, rng), k);
  const double fmin = estimate_min(p, MinSearchOptions{}, rng);
  std::vector<double> v;
  for (int r = 0; r < 40; ++r) v.push_back(full_u_unbiased(q, k, rejection_sample(p, fmin, 500, rng)));
  const Eigen::Map<const Vec> vals(v.data(), Eigen::Index(v.size()));
  const double mean = vals.mean();
  const double se = std::sqrt((vals.array() - mean).square().sum() / double(v.size() - 1) / double(v.size()));
  EXPECT_LE(std::abs(mean - pop), 3.0 * se) << "population " << pop << " MC " << mean;
}

TEST(TestFunctionTest, RandomAndProjectRespectBudget) {
  Rng rng = derive_stream(15, "test");
  SteinTestFunction h = SteinTestFunction::random(3, 20, 0.5, 10.0, rng);
  EXPECT_LE(h.mixed_norm(), 0.5 + 1e-9);
  h.scale(4.0);
  EXPECT_GT(h.mixed_norm(), 0.5);
  h.project();
  EXPECT_NEAR(h.mixed_norm(), 0.5, 1e-12);
}

TEST(F1sdInnerTest, AscentNeverReturnsWorseAndStaysInBall) {
  Rng rng = derive_stream(16, "test");
  F1sdConfig cfg;
  cfg.m_h = 20;
  cfg.steps = 50;
  cfg.budget = 2.0;
  for (int t = 0; t < 5; ++t) {
    const ParticleModel model = testing::random_model(rng, 3, 5);
    const SampleSet xs = unstack(uniform_samples(rng, 3, 100));
    const F1sdResult r = f1sd_inner_maximize(model, xs, cfg, rng);
    EXPECT_GE(r.value, r.initial_value);
    EXPECT_LE(r.h.mixed_norm(), cfg.budget + 1e-9);
    const Mat pts = stack(xs);
    EXPECT_NEAR(f1sd_objective(stein_shift(model, pts), pts, Vec::Constant(100, 0.01), r.h), r.value, 1e-10);
  }
}

TEST(F1sdInnerTest, SampleEstimateMatchesQuadrature) {
  Rng rng = derive_stream(17, "test");
  const TeacherSpec p = TeacherSpec::random(2, Vec::Constant(2, -3.0), rng);
  const ParticleModel q = testing::random_model(rng, 2, 4, Regime::kF1, 3.0);
  const double fmin = estimate_min(p, MinSearchOptions{}, rng);
  const Mat samples = stack(rejection_sample(p, fmin, 20000, rng));
  const QuadratureGrid grid = quadrature_grid(2, 100, rng);
  const Vec probs = testing::gibbs_weights(grid, teacher_energies(p, grid.points()));
  F1sdConfig cfg;
  cfg.m_h = 30;
  cfg.steps = 100;
  Rng a = derive_stream(18, "inner"), b = derive_stream(18, "inner");
  const double mc = f1sd_inner_maximize(q, unstack(samples), cfg, a).value;
  const double quad = f1sd_inner_maximize_weighted(q, grid.points(), probs, cfg, b).value;
  EXPECT_NEAR(mc, quad, 0.1 * std::abs(quad));
}

}  // namespace
}  // namespace ebm
