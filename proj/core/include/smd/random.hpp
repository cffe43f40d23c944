// Copyright 2026 The smd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace smd {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11). Stateless:
/// the output depends only on (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Maps two 32-bit words to a double in the open interval (0, 1).
double uniform_open(std::uint32_t hi, std::uint32_t lo);

/**
 * Gaussian increments for the particle system, addressed by counter so that
 * every draw is a pure function of (seed, purpose, step, particle, component):
 *
 *   common   - keyed by seed_common; depends only on the step index.
 *   private  - keyed by seed_private; split per particle index, so particle i
 *              sees the same increments in runs with any N > i.
 *   initial  - keyed by seed_private; per-particle initial-condition draws.
 *
 * Nothing depends on N or on the thread that asks.
 */
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed_common, std::uint64_t seed_private);

  void common_normals(std::uint64_t step, std::span<double> out) const;
  void private_normals(std::uint64_t step, std::uint64_t particle, std::span<double> out) const;
  void initial_normals(std::uint64_t particle, std::span<double> out) const;

 private:
  enum class Purpose : std::uint32_t { Common = 1, Private = 2, Initial = 3 };
  static void fill(Philox4x32::Key key, Purpose purpose, std::uint64_t step,
                   std::uint64_t particle, std::span<double> out);

  Philox4x32::Key common_key_;
  Philox4x32::Key private_key_;
};

}  // namespace smd
