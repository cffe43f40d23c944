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

#include "smd/random.hpp"

#include <cmath>
#include <numbers>

namespace smd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

Philox4x32::Key split_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return static_cast<double>(bits) * 0x1.0p-52 + 0x1.0p-53;
}

NoiseSource::NoiseSource(std::uint64_t seed_common, std::uint64_t seed_private)
    : common_key_(split_seed(seed_common)), private_key_(split_seed(seed_private)) {}

void NoiseSource::fill(Philox4x32::Key key, Purpose purpose, std::uint64_t step,
                       std::uint64_t particle, std::span<double> out) {
  // Counter words: step (64 bits), particle (32 bits), purpose << 24 | block.
  for (std::size_t block = 0; 2 * block < out.size(); ++block) {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
        static_cast<std::uint32_t>(particle),
        (static_cast<std::uint32_t>(purpose) << 24) | static_cast<std::uint32_t>(block)};
    const auto words = Philox4x32::block(ctr, key);
    const double u1 = uniform_open(words[0], words[1]);
    const double u2 = uniform_open(words[2], words[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[2 * block] = r * std::cos(theta);
    if (2 * block + 1 < out.size()) out[2 * block + 1] = r * std::sin(theta);
  }
}

void NoiseSource::common_normals(std::uint64_t step, std::span<double> out) const {
  fill(common_key_, Purpose::Common, step, 0, out);
}

void NoiseSource::private_normals(std::uint64_t step, std::uint64_t particle,
                                  std::span<double> out) const {
  fill(private_key_, Purpose::Private, step, particle, out);
}

void NoiseSource::initial_normals(std::uint64_t particle, std::span<double> out) const {
  fill(private_key_, Purpose::Initial, 0, particle, out);
}

}  // namespace smd
