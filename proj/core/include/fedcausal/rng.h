/*
* Copyright 2026 The fedcausal Authors.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     https://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
* ============================================================================
*/
// Seed derivation for independent, reproducible random streams.
//
// Every stream in the project is a std::mt19937_64 seeded from a 64-bit
// value derived by hashing (base seed, tag...) with SplitMix64, so that the
// stream for (replication r, site k) does not depend on how many threads
// ran or in what order.

#ifndef FEDCAUSAL_RNG_H_
#define FEDCAUSAL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedcausal {

using Rng = std::mt19937_64;

std::uint64_t SplitMix64(std::uint64_t x);

// Mixes a base seed with an ordered list of tags.
std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

inline Rng MakeRng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return Rng(DeriveSeed(base, tags));
}

// Uniform on [0, 1) from the top 53 bits of one draw.
double UniformUnit(Rng& rng);

// Standard normal draw by the Box-Muller transform (one value per call,
// two uniforms consumed). Implemented here rather than through
// std::normal_distribution so the draw sequence is identical across
// standard libraries.
double StandardNormal(Rng& rng);

}  // namespace fedcausal

#endif  // FEDCAUSAL_RNG_H_
