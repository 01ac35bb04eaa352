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

#ifndef TRIPHASE_THERMAL_HPP
#define TRIPHASE_THERMAL_HPP

#include <array>
#include <utility>

#include "triphase/common.hpp"

namespace triphase {

// Thermo-optic model of the six on-chip heaters: four resistors R_1..R_4
// drive the two internal phases through a 2x4 response matrix, and R_TA/R_TB
// drive the two tritter phases.  Each phase responds linearly (alpha, rad/W)
// and quadratically (alpha_nl, rad/W^2) in the dissipated power.
struct ResistorBank {
  std::array<double, 6> resistance{};           // ohm; order R1..R4, RTA, RTB
  Eigen::Matrix<double, 2, 4> alpha_lin;        // rows: dphi1, dphi2
  Eigen::Matrix<double, 2, 4> alpha_nl;
  Vec2 alpha_t_lin;                             // [TA, TB]
  Vec2 alpha_t_nl;
  double dphi10 = 0.0, dphi20 = 0.0;            // static internal phases
  double phi0_ta = 0.0, phi0_tb = 0.0;          // static tritter phases
};

// All four phases of the device at a given heater state.
struct PhaseState {
  double dphi1 = 0.0;
  double dphi2 = 0.0;
  double phi_ta = 0.0;
  double phi_tb = 0.0;
};

// P = V^2 / R.
double dissipated_power(double volts, double ohms);

// Forward thermal map: powers (R1..R4, RTA, RTB) -> phases.
PhaseState phases_from_powers(const ResistorBank& bank,
                              const std::array<double, 6>& powers_w);

struct PowerSolution {
  Vec2 powers;      // on the two active resistors, W
  Vec2 voltages;    // V, from the bank resistances
  Vec2 achieved;    // achieved (dphi1, dphi2), rad
  int iterations = 0;
};

// Inverse map on the internal phases: find powers on the two active resistors
// (indices into R1..R4) reproducing the target (dphi1, dphi2) modulo 2pi.
// Among all 2pi-shifted branches reachable with powers in [0, p_max], the
// minimal-total-power solution is returned.  Damped Newton from the
// linearized solution, tolerance 1e-12 rad, at most 50 iterations per branch.
// An unreachable target raises numerical_error mentioning the nearest
// achievable phases.
PowerSolution powers_for_target_phases(const ResistorBank& bank, const Vec2& target,
                                       std::pair<int, int> active = {0, 1},
                                       double p_max = 1.2);

// Tritter-heater phase at a given power.  which: 0 = TA, 1 = TB.
double tritter_heater_phase(const ResistorBank& bank, int which, double power_w);

// Smallest power in [0, p_max] realizing the target tritter phase modulo 2pi;
// raises numerical_error when no 2pi-branch is reachable.
double tritter_heater_power_for_phase(const ResistorBank& bank, int which,
                                      double target, double p_max = 1.2);

// Thermalization transient: effective power a time t after switching from
// p_before to p_after with time constant tau.
double transient_response(double p_before, double p_after, double tau, double t);

}  // namespace triphase

#endif  // TRIPHASE_THERMAL_HPP
