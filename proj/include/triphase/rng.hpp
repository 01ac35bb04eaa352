// Copyright 2026 The triphase Authors
//
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

#ifndef TRIPHASE_RNG_HPP
#define TRIPHASE_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace triphase {

// splitmix64 mixing step; used to derive independent sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random stream.  std::mt19937_64 provides the raw bits, but
// all distribution sampling is implemented here explicitly so that sampled
// datasets are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (used only for test perturbations).
  double normal();

  // Index draw from an unnormalized weight vector via CDF inversion.
  int categorical(const double* w, int k);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Independent stream for a (seed, task index) pair.  Reproducible no matter
// in which order tasks are executed.
inline Rng task_rng(std::uint64_t seed, std::uint64_t task) {
  return Rng(splitmix64(seed + 0x9e3779b97f4a7c15ull * (task + 1)));
}

// n independent categorical draws collected into per-cell counts.
std::vector<long> multinomial(Rng& rng, long n, const std::vector<double>& p);

}  // namespace triphase

#endif  // TRIPHASE_RNG_HPP
