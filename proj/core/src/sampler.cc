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
#include "ebm/sampler.h"

#include <cmath>
#include <string>

#include "ebm/errors.h"

namespace ebm {

void MhConfig::validate() const {
  if (n_chains < 1 || thinning < 1 || max_steps < 1 || burn_in < 0) {
    throw InvalidArgument("MhConfig needs n_chains, thinning, max_steps >= 1 and burn_in >= 0");
  }
}

MhStep mh_step(const ParticleModel& model, const UnitVector& x, Rng& rng) {
  check_dim(model, x, "mh_step");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  UnitVector proposal = uniform_sample(rng, model.sphere_dim());
  const double u = unif(rng);
  const double delta = energy(model, proposal) - energy(model, x);
  if (u < std::exp(-delta)) return {std::move(proposal), true};
  return {x, false};
}

namespace {

// One chain, tracking the current energy so each step costs a single
// evaluation. The draw order matches mh_step.
struct Chain {
  const ParticleModel& model;
  Rng rng;
  Vec state;
  double state_energy;
  std::int64_t accepted = 0;
  std::int64_t steps = 0;

  Chain(const ParticleModel& m, Rng r) : model(m), rng(std::move(r)) {
    state = uniform_sample(rng, model.sphere_dim()).coords();
    state_energy = energy_at(state);
  }

  double energy_at(const Vec& x) const {
    return (model.features() * x).cwiseMax(0.0).dot(model.weights()) / double(model.size());
  }

  void step() {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec proposal = uniform_sample(rng, model.sphere_dim()).coords();
    const double u = unif(rng);
    const double proposal_energy = energy_at(proposal);
    ++steps;
    if (u < std::exp(-(proposal_energy - state_energy))) {
      state = std::move(proposal);
      state_energy = proposal_energy;
      ++accepted;
    }
  }
};

}  // namespace

GibbsDraw gibbs_draw(const ParticleModel& model, std::int64_t n, const MhConfig& cfg, Rng& rng) {
  cfg.validate();
  if (n < 1) throw InvalidArgument("gibbs_samples needs n >= 1");
  const std::int64_t per_chain = (n + cfg.n_chains - 1) / cfg.n_chains;
  const std::int64_t needed = cfg.burn_in + per_chain * cfg.thinning;
  if (needed > cfg.max_steps) {
    throw BudgetExceeded("gibbs_samples needs " + std::to_string(needed) +
                         " steps per chain, budget is " + std::to_string(cfg.max_steps));
  }
  const std::uint64_t base = fork_seed(rng);
  GibbsDraw out;
  out.samples.resize(n, model.ambient_dim());
  std::int64_t accepted = 0;
  std::int64_t steps = 0;
  for (int c = 0; c < cfg.n_chains; ++c) {
    Chain chain(model, derive_stream(base, "mh-chain", {std::uint64_t(c)}));
    for (int t = 0; t < cfg.burn_in; ++t) chain.step();
    for (std::int64_t k = 0;; ++k) {
      const std::int64_t row = k * cfg.n_chains + c;
      if (row >= n) break;
      for (int t = 0; t < cfg.thinning; ++t) chain.step();
      out.samples.row(row) = chain.state.transpose();
    }
    accepted += chain.accepted;
    steps += chain.steps;
  }
  out.acceptance_rate = steps > 0 ? double(accepted) / double(steps) : 1.0;
  return out;
}

SampleSet gibbs_samples(const ParticleModel& model, std::int64_t n, const MhConfig& cfg,
                        Rng& rng) {
  return unstack(gibbs_draw(model, n, cfg, rng).samples);
}

}  // namespace ebm
