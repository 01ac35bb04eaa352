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

#ifndef TRIPHASE_UNITARY_HPP
#define TRIPHASE_UNITARY_HPP

#include <array>

#include "triphase/common.hpp"

namespace triphase {

// Directional-coupler transmissivities and the internal phase of one tritter
// (three-port splitter built as C(t1) on modes 1-2, C(t2) on modes 2-3, a
// phase on mode 1, then C(t3) on modes 1-2).
struct TritterParams {
  double t1 = 0.5;
  double t2 = 2.0 / 3.0;
  double t3 = 0.5;
  double phi_t = kPi / 2.0;
};

// The two physical phase differences of the interferometer plus the gauge
// reference phase carried by the third arm.  Only dphi1/dphi2 are physical;
// phi_ref drops out of every measurable probability.
struct PhaseVector {
  double dphi1 = 0.0;
  double dphi2 = 0.0;
  double phi_ref = 0.0;
};

enum class CouplerPair { Modes12, Modes23 };

// 3x3 unitary of a directional coupler with transmission t on the selected
// mode pair: sqrt(1-t) on the pair diagonal, i*sqrt(t) off-diagonal.
Mat3 coupler_matrix(double t, CouplerPair pair);

// Derivative of coupler_matrix with respect to t (t strictly inside (0,1)).
Mat3 coupler_matrix_dt(double t, CouplerPair pair);

// Diagonal unitary applying e^{i phase} on one mode (1-based index).
Mat3 phase_shifter_matrix(int mode, double phase);

// Tritter product C(t3)|12 . PS(phi_t)|1 . C(t2)|23 . C(t1)|12
// (right-most factor acts first).
Mat3 tritter(const TritterParams& p);

// Tritter together with its partial derivatives with respect to
// (t1, t2, t3, phi_t), used by analytic fit Jacobians.
void tritter_with_grads(const TritterParams& p, Mat3& u, std::array<Mat3, 4>& du);

// Parameters of the balanced (symmetric) tritter: t1 = t3 = 1/2, t2 = 2/3,
// phi_t = +pi/2 (the positive sign is the canonical choice).
TritterParams balanced_tritter_params();

// The balanced three-port splitter, |U_ij|^2 = 1/3 for every entry.  Realized
// in the physical decomposition gauge (coupler/phase product above); entry
// phases therefore differ from the textbook DFT-like form by diagonal phase
// gauges, which no probability or fidelity anchor is sensitive to.
Mat3 symmetric_tritter();

// Full interferometer U^B . PS_3(ref) . PS_2(dphi2+ref) . PS_1(dphi1+ref) . U^A.
Mat3 interferometer(const Mat3& ua, const Mat3& ub, const PhaseVector& phases);
Mat3 interferometer(const TritterParams& a, const TritterParams& b,
                    const PhaseVector& phases);

// |Tr(u v^dagger)| / m for m x m matrices.
double fidelity(const CMat& u, const CMat& v);

// Mean fidelity between the device interferometer (tritters a, b) and the
// ideal balanced interferometer over an n x n uniform phase grid on [0,2pi)^2.
double average_fidelity(const TritterParams& a, const TritterParams& b, int grid_n);

// max |(U U^dagger - I)_ij|
double unitarity_defect(const CMat& u);

// Multiply u by the global phase that aligns it with ref at ref's
// largest-modulus entry (printed matrices are phase-gauged).
Mat3 align_global_phase(const Mat3& u, const Mat3& ref);

}  // namespace triphase

#endif  // TRIPHASE_UNITARY_HPP
