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
#ifndef EBM_SAMPLER_H_
#define EBM_SAMPLER_H_

#include <cstdint>

#include "ebm/model.h"

namespace ebm {

struct MhConfig {
  int n_chains = 16;
  int burn_in = 200;
  int thinning = 5;
  // Per-chain step budget.
  std::int64_t max_steps = 10'000'000;

  void validate() const;
};

struct MhStep {
  UnitVector state;
  bool accepted;
};

// Independence Metropolis-Hastings with a uniform proposal on S^d: draw x'
// uniformly, then u ~ U(0,1); accept iff u < exp(-(f(x') - f(x))).
MhStep mh_step(const ParticleModel& model, const UnitVector& x, Rng& rng);

struct GibbsDraw {
  Mat samples;  // one sample per row
  double acceptance_rate = 0.0;
};

// Runs cfg.n_chains fresh chains from uniform starts, drops burn_in steps, keeps
// every thinning-th state and interleaves chains round-robin (sample k comes
// from chain k mod n_chains). Each chain owns a sub-stream derived from one
// draw of rng, so results do not depend on scheduling. Throws BudgetExceeded
// when a chain would need more than cfg.max_steps steps.
GibbsDraw gibbs_draw(const ParticleModel& model, std::int64_t n, const MhConfig& cfg, Rng& rng);

SampleSet gibbs_samples(const ParticleModel& model, std::int64_t n, const MhConfig& cfg,
                        Rng& rng);

}  // namespace ebm

#endif  // EBM_SAMPLER_H_
