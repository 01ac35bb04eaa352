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

#ifndef TRIPHASE_CONFIG_HPP
#define TRIPHASE_CONFIG_HPP

#include <array>
#include <string>

#include "triphase/common.hpp"
#include "triphase/thermal.hpp"
#include "triphase/unitary.hpp"

namespace triphase {

// Complete parameter set of one device: coupler transmissivities, tritter
// phases, static internal phases, the thermal response of the six heaters,
// their resistances, and the photon indistinguishability.  Field names follow
// the symbols used in the device characterization report.
struct DeviceConfig {
  std::string device = "device";

  double T1A = 0.5, T2A = 2.0 / 3.0, T3A = 0.5;
  double T1B = 0.5, T2B = 2.0 / 3.0, T3B = 0.5;
  double phiTA = kPi / 2.0, phiTB = kPi / 2.0;
  double dphi10 = 0.0, dphi20 = 0.0;

  Eigen::Matrix<double, 2, 4> alpha = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix<double, 2, 4> alpha_nl = Eigen::Matrix<double, 2, 4>::Zero();

  double phi0TA = kPi / 2.0, phi0TB = kPi / 2.0;
  double alphaTA = 0.0, alphaTB = 0.0;
  double alphaNL_TA = 0.0, alphaNL_TB = 0.0;

  std::array<double, 6> resistance_ohm{80.0, 80.0, 80.0, 80.0, 80.0, 80.0};
  double visibility = 1.0;

  TritterParams tritter_a() const { return {T1A, T2A, T3A, phiTA}; }
  TritterParams tritter_b() const { return {T1B, T2B, T3B, phiTB}; }
};

// Thermal view of a config.
ResistorBank make_resistor_bank(const DeviceConfig& c);

// The bundled reference device: the characterized-chip parameter tables,
// 80-ohm nominal resistances, V = 0.95.
DeviceConfig reference_device();

// Canonical serialization (2-space-indented JSON, fixed key order, trailing
// newline).  load(save(c)) is the identity and save(load(text)) is
// byte-identical for canonically formatted text.
std::string config_to_string(const DeviceConfig& c);
DeviceConfig config_from_string(const std::string& text);
DeviceConfig load_config(const std::string& path);
void save_config(const DeviceConfig& c, const std::string& path);

// The 26 fit parameters as a flat vector:
// [T1A T2A T3A T1B T2B T3B phiTA phiTB dphi10 dphi20 alpha(row-major 2x4)
//  alpha_nl(row-major 2x4)].
RVec pack_parameters(const DeviceConfig& c);
void unpack_parameters(const RVec& theta, DeviceConfig& c);
const std::array<const char*, 26>& parameter_names();

// Reconstructed device transformations as recorded after characterization
// (entry phases are gauged; compare moduli or align a global phase first).
Mat3 recorded_tritter_a();
Mat3 recorded_tritter_b();

// The recorded identity-configuration pair, for which U^B * U^A is close to
// the identity up to output phases.  The recorded U^A carries a sign typo on
// entry (2,1) that breaks unitarity by 0.53; the value stored here flips that
// entry's real part, restoring unitarity to 9e-4 (no other single-entry
// correction does).
Mat3 recorded_identity_a();
Mat3 recorded_identity_b();

}  // namespace triphase

#endif  // TRIPHASE_CONFIG_HPP
