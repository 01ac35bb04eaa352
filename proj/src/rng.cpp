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

#include "triphase/rng.hpp"

#include <cmath>

namespace triphase {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

int Rng::categorical(const double* w, int k) {
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += w[i];
  const double x = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += w[i];
    if (x < acc) return i;
  }
  return k - 1;  // guard against round-off at the top end
}

std::vector<long> multinomial(Rng& rng, long n, const std::vector<double>& p) {
  std::vector<long> counts(p.size(), 0);
  for (long i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(
        rng.categorical(p.data(), static_cast<int>(p.size())))];
  }
  return counts;
}

}  // namespace triphase
