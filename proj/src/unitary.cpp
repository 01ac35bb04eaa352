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

#include "triphase/unitary.hpp"

#include <cmath>

namespace triphase {

namespace {

std::pair<int, int> pair_indices(CouplerPair pair) {
  return pair == CouplerPair::Modes12 ? std::pair<int, int>{0, 1}
                                      : std::pair<int, int>{1, 2};
}

}  // namespace

Mat3 coupler_matrix(double t, CouplerPair pair) {
  if (t < 0.0 || t > 1.0) throw std::domain_error("coupler transmission outside [0,1]");
  const auto [i, j] = pair_indices(pair);
  Mat3 m = Mat3::Identity();
  m(i, i) = m(j, j) = std::sqrt(1.0 - t);
  m(i, j) = m(j, i) = Complex(0.0, std::sqrt(t));
  return m;
}

Mat3 coupler_matrix_dt(double t, CouplerPair pair) {
  const auto [i, j] = pair_indices(pair);
  Mat3 m = Mat3::Zero();
  m(i, i) = m(j, j) = -0.5 / std::sqrt(1.0 - t);
  m(i, j) = m(j, i) = Complex(0.0, 0.5 / std::sqrt(t));
  return m;
}

Mat3 phase_shifter_matrix(int mode, double phase) {
  if (mode < 1 || mode > 3) throw std::domain_error("phase shifter mode must be 1..3");
  Mat3 m = Mat3::Identity();
  m(mode - 1, mode - 1) = std::polar(1.0, phase);
  return m;
}

Mat3 tritter(const TritterParams& p) {
  return coupler_matrix(p.t3, CouplerPair::Modes12) *
         phase_shifter_matrix(1, p.phi_t) *
         coupler_matrix(p.t2, CouplerPair::Modes23) *
         coupler_matrix(p.t1, CouplerPair::Modes12);
}

void tritter_with_grads(const TritterParams& p, Mat3& u, std::array<Mat3, 4>& du) {
  const Mat3 c1 = coupler_matrix(p.t1, CouplerPair::Modes12);
  const Mat3 c2 = coupler_matrix(p.t2, CouplerPair::Modes23);
  const Mat3 ps = phase_shifter_matrix(1, p.phi_t);
  const Mat3 c3 = coupler_matrix(p.t3, CouplerPair::Modes12);

  const Mat3 left = c3 * ps;      // factors left of c2
  const Mat3 right = c2 * c1;     // factors right of ps

  u = left * right;
  du[0] = left * c2 * coupler_matrix_dt(p.t1, CouplerPair::Modes12);
  du[1] = left * coupler_matrix_dt(p.t2, CouplerPair::Modes23) * c1;
  du[2] = coupler_matrix_dt(p.t3, CouplerPair::Modes12) * ps * right;
  Mat3 dps = Mat3::Zero();
  dps(0, 0) = Complex(0.0, 1.0) * ps(0, 0);
  du[3] = c3 * dps * right;
}

TritterParams balanced_tritter_params() { return TritterParams{}; }

Mat3 symmetric_tritter() { return tritter(balanced_tritter_params()); }

Mat3 interferometer(const Mat3& ua, const Mat3& ub, const PhaseVector& phases) {
  Mat3 d = Mat3::Identity();
  d(0, 0) = std::polar(1.0, phases.dphi1 + phases.phi_ref);
  d(1, 1) = std::polar(1.0, phases.dphi2 + phases.phi_ref);
  d(2, 2) = std::polar(1.0, phases.phi_ref);
  return ub * d * ua;
}

Mat3 interferometer(const TritterParams& a, const TritterParams& b,
                    const PhaseVector& phases) {
  return interferometer(tritter(a), tritter(b), phases);
}

double fidelity(const CMat& u, const CMat& v) {
  if (u.rows() != u.cols() || u.rows() != v.rows() || u.cols() != v.cols())
    throw std::domain_error("fidelity requires square matrices of equal dimension");
  return std::abs((u * v.adjoint()).trace()) / static_cast<double>(u.rows());
}

double average_fidelity(const TritterParams& a, const TritterParams& b, int grid_n) {
  const Mat3 ua = tritter(a);
  const Mat3 ub = tritter(b);
  const Mat3 ia = symmetric_tritter();
  double acc = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const PhaseVector ph{2.0 * kPi * i / grid_n, 2.0 * kPi * j / grid_n, 0.0};
      acc += fidelity(interferometer(ua, ub, ph), interferometer(ia, ia, ph));
    }
  }
  return acc / (static_cast<double>(grid_n) * grid_n);
}

double unitarity_defect(const CMat& u) {
  const CMat d = u * u.adjoint() - CMat::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

Mat3 align_global_phase(const Mat3& u, const Mat3& ref) {
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(ref(i, j)) > best) {
        best = std::abs(ref(i, j));
        bi = i;
        bj = j;
      }
  const double theta = std::arg(ref(bi, bj)) - std::arg(u(bi, bj));
  return std::polar(1.0, theta) * u;
}

}  // namespace triphase
