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
#ifndef EBM_RNG_H_
#define EBM_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ebm {

using Rng = std::mt19937_64;

// Named sub-streams. The seed of a sub-stream starts from
//
//   acc = splitmix64(fnv1a64(purpose) ^ splitmix64(root))
//
// folds each index in as acc = splitmix64(acc ^ splitmix64(index + 1)) and
// finishes with one more splitmix64 round. Data generation,
// initialization, MCMC and inner loops each use their own purpose string so
// changing one never perturbs another.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose,
                          std::initializer_list<std::uint64_t> indices = {});
Rng derive_stream(std::uint64_t root, std::string_view purpose,
                  std::initializer_list<std::uint64_t> indices = {});

// Draws a fresh 64-bit seed from a caller-owned stream.
inline std::uint64_t fork_seed(Rng& rng) { return rng(); }

}  // namespace ebm

#endif  // EBM_RNG_H_
