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

#include "triphase/photonics.hpp"

#include <algorithm>
#include <cmath>

namespace triphase {

FockState FockState::single(int mode) {
  if (mode < 1 || mode > 3) throw std::domain_error("mode index must be 1..3");
  FockState s;
  s.occupation[mode - 1] = 1;
  return s;
}

FockState FockState::from_modes(const std::vector<int>& modes) {
  FockState s;
  for (int m : modes) {
    if (m < 1 || m > 3) throw std::domain_error("mode index must be 1..3");
    ++s.occupation[m - 1];
  }
  return s;
}

std::vector<int> FockState::mode_list() const {
  std::vector<int> out;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < occupation[m]; ++k) out.push_back(m);
  return out;
}

std::string FockState::label() const {
  std::string out;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < occupation[m]; ++k) out += static_cast<char>('1' + m);
  return out;
}

double DistinguishabilityModel::effective_visibility() const {
  const double x = delay / sigma;
  return visibility * std::exp(-x * x);
}

double OutputDistribution::probability_of(const FockState& ev) const {
  for (std::size_t i = 0; i < events.size(); ++i)
    if (events[i] == ev) return p[static_cast<Eigen::Index>(i)];
  throw std::domain_error("event not in the distribution's outcome set");
}

Complex permanent(const CMat& m) {
  if (m.rows() != m.cols()) throw std::domain_error("permanent requires a square matrix");
  const int n = static_cast<int>(m.rows());
  if (n < 1 || n > 4) throw std::domain_error("permanent supports sizes 1..4");
  std::array<int, 4> idx{0, 1, 2, 3};
  Complex total(0.0, 0.0);
  do {
    Complex term(1.0, 0.0);
    for (int i = 0; i < n; ++i) term *= m(i, idx[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(idx.begin(), idx.begin() + n));
  return total;
}

std::vector<FockState> output_events(int n_photons) {
  if (n_photons < 1 || n_photons > 3)
    throw std::domain_error("supported photon numbers are 1..3");
  std::vector<FockState> out;
  // Combinations with repetition of modes {0,1,2}, lexicographic.
  if (n_photons == 1) {
    for (int a = 0; a < 3; ++a) out.push_back(FockState::from_modes({a + 1}));
  } else if (n_photons == 2) {
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) out.push_back(FockState::from_modes({a + 1, b + 1}));
  } else {
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        for (int c = b; c < 3; ++c)
          out.push_back(FockState::from_modes({a + 1, b + 1, c + 1}));
  }
  return out;
}

namespace {

double factorial_norm(const FockState& s) {
  double n = 1.0;
  for (int occ : s.occupation)
    for (int k = 2; k <= occ; ++k) n *= k;
  return n;
}

CMat submatrix(const Eigen::Ref<const Eigen::Matrix3cd>& u, const std::vector<int>& rows,
               const std::vector<int>& cols) {
  CMat s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          u(rows[i], cols[j]);
  return s;
}

}  // namespace

double event_probability(const Mat3& u, const FockState& input, const FockState& output,
                         double v_eff) {
  if (input.total() != output.total())
    throw std::domain_error("input and output photon numbers differ");
  const std::vector<int> s = input.mode_list();
  const std::vector<int> t = output.mode_list();

  // Bosonic amplitude: |Per(U[T,S])|^2 / (prod t_i! prod s_j!).  The
  // distinguishable part sums assignment probabilities, which only repeat
  // across identical output slots, so it carries the output factor alone;
  // with it, both parts sum to one over the output multisets even for
  // bunched inputs.
  const CMat sub = submatrix(u, t, s);
  const double p_ind =
      std::norm(permanent(sub)) / (factorial_norm(input) * factorial_norm(output));
  const CMat sub_b = sub.cwiseAbs2().cast<Complex>();
  const double p_dist = permanent(sub_b).real() / factorial_norm(output);
  return v_eff * p_ind + (1.0 - v_eff) * p_dist;
}

OutputDistribution single_photon_probs(const Mat3& u, int input_mode) {
  if (input_mode < 1 || input_mode > 3)
    throw std::domain_error("mode index must be 1..3");
  OutputDistribution d;
  d.n_photons = 1;
  d.events = output_events(1);
  d.p = RVec(3);
  for (int j = 0; j < 3; ++j) d.p[j] = std::norm(u(j, input_mode - 1));
  return d;
}

namespace {

OutputDistribution nphoton_probs(const Mat3& u, const FockState& input,
                                 const DistinguishabilityModel& model) {
  OutputDistribution d;
  d.n_photons = input.total();
  d.events = output_events(d.n_photons);
  d.p = RVec(static_cast<Eigen::Index>(d.events.size()));
  const double v = model.effective_visibility();
  for (std::size_t e = 0; e < d.events.size(); ++e)
    d.p[static_cast<Eigen::Index>(e)] = event_probability(u, input, d.events[e], v);
  return d;
}

}  // namespace

OutputDistribution two_photon_probs(const Mat3& u, const FockState& input,
                                    const DistinguishabilityModel& model) {
  if (input.total() != 2)
    throw std::domain_error("two_photon_probs requires a two-photon input");
  const auto& occ = input.occupation;
  if (occ[0] > 1 || occ[1] > 1 || occ[2] > 1)
    throw std::domain_error("two-photon input must occupy two distinct modes");
  return nphoton_probs(u, input, model);
}

OutputDistribution three_photon_probs(const Mat3& u, const FockState& input,
                                      const DistinguishabilityModel& model) {
  if (input.total() != 3)
    throw std::domain_error("three_photon_probs requires a three-photon input");
  return nphoton_probs(u, input, model);
}

OutputDistribution output_probs(const Mat3& u, const FockState& input,
                                const DistinguishabilityModel& model) {
  switch (input.total()) {
    case 1: {
      for (int m = 0; m < 3; ++m)
        if (input.occupation[static_cast<std::size_t>(m)] == 1)
          return single_photon_probs(u, m + 1);
      break;
    }
    case 2:
      return two_photon_probs(u, input, model);
    case 3:
      return three_photon_probs(u, input, model);
    default:
      break;
  }
  throw std::domain_error("supported photon numbers are 1..3");
}

std::vector<OutputDistribution> hom_scan(const Mat3& u, const FockState& input,
                                         const std::vector<double>& delays_over_sigma,
                                         const DistinguishabilityModel& model) {
  std::vector<OutputDistribution> out;
  out.reserve(delays_over_sigma.size());
  for (double d : delays_over_sigma) {
    DistinguishabilityModel at = model;
    at.delay = d;
    at.sigma = 1.0;
    out.push_back(two_photon_probs(u, input, at));
  }
  return out;
}

}  // namespace triphase
