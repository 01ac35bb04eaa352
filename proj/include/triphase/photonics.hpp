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

#ifndef TRIPHASE_PHOTONICS_HPP
#define TRIPHASE_PHOTONICS_HPP

#include <array>
#include <string>
#include <vector>

#include "triphase/common.hpp"

namespace triphase {

// Photon-number occupation pattern over the three modes.
struct FockState {
  std::array<int, 3> occupation{0, 0, 0};

  int total() const { return occupation[0] + occupation[1] + occupation[2]; }

  // One photon in the given mode (1-based).
  static FockState single(int mode);
  // One photon per listed mode (1-based, repeats allowed for bunched states).
  static FockState from_modes(const std::vector<int>& modes);

  // Expanded 0-based mode list, nondecreasing, e.g. (0,1,1) -> {1, 2, 2}...
  std::vector<int> mode_list() const;
  // Compact label built from 1-based mode digits, e.g. "23", "122".
  std::string label() const;

  bool operator==(const FockState& other) const { return occupation == other.occupation; }
};

// Pairwise photon indistinguishability and the relative-delay parameters of a
// Hong-Ou-Mandel scan.  The effective visibility at delay dt is
// V * exp(-(dt/sigma)^2); probabilities mix the fully indistinguishable and
// fully distinguishable distributions linearly in it.
struct DistinguishabilityModel {
  double visibility = 1.0;
  double delay = 0.0;
  double sigma = 1.0;

  double effective_visibility() const;
};

// Probabilities over all unordered output events of a fixed photon number
// (3 events for 1 photon, 6 for 2, 10 for 3).
struct OutputDistribution {
  int n_photons = 0;
  std::vector<FockState> events;
  RVec p;

  double probability_of(const FockState& ev) const;
};

// Matrix permanent by direct n! expansion; exact for the n <= 4 sizes used here.
Complex permanent(const CMat& m);

// All output multisets (as occupation patterns) for n photons over 3 modes,
// in lexicographic mode order: (11), (12), (13), (22), (23), (33) for n = 2.
std::vector<FockState> output_events(int n_photons);

// Event probability with effective visibility v_eff:
//   P = v_eff * |Per(U[T,S])|^2 / N + (1 - v_eff) * Per(|U|^2[T,S]) / N,
// with N the product of input and output occupation factorials.
double event_probability(const Mat3& u, const FockState& input, const FockState& output,
                         double v_eff);

OutputDistribution single_photon_probs(const Mat3& u, int input_mode);
OutputDistribution two_photon_probs(const Mat3& u, const FockState& input,
                                    const DistinguishabilityModel& model);
OutputDistribution three_photon_probs(const Mat3& u, const FockState& input,
                                      const DistinguishabilityModel& model);

// Dispatch on the photon number of the input (1, 2 or 3).
OutputDistribution output_probs(const Mat3& u, const FockState& input,
                                const DistinguishabilityModel& model);

// Two-photon distributions along a delay scan; delays are given as dt/sigma.
std::vector<OutputDistribution> hom_scan(const Mat3& u, const FockState& input,
                                         const std::vector<double>& delays_over_sigma,
                                         const DistinguishabilityModel& model);

}  // namespace triphase

#endif  // TRIPHASE_PHOTONICS_HPP
