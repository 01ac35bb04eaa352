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

#ifndef TRIPHASE_CHARACTERIZATION_HPP
#define TRIPHASE_CHARACTERIZATION_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "triphase/common.hpp"
#include "triphase/config.hpp"
#include "triphase/photonics.hpp"

namespace triphase {

// Which resistor family is swept: the four internal heaters (R1..R4, driving
// the two interferometer phases; 36 probability curves) or the two tritter
// heaters (RTA/RTB, driving the tritter phases; 18 curves).
enum class ScanProtocol { InternalResistors, TritterResistors };

// Single-photon probability scans: one resistor active at a time, all others
// unpowered, the full 3x3 input->output probability matrix recorded at every
// power step.
struct ScanDataset {
  ScanProtocol protocol = ScanProtocol::InternalResistors;
  std::string device;
  std::vector<double> powers;  // shared grid, W, strictly increasing from 0
  // prob[r][k](out, in): estimated probability for resistor r at powers[k];
  // sigma holds the matching standard errors.
  std::vector<std::vector<Eigen::Matrix3d>> prob;
  std::vector<std::vector<Eigen::Matrix3d>> sigma;
  long counts_per_point = 0;  // 0 = noiseless (infinite-counts limit)

  int n_resistors() const { return static_cast<int>(prob.size()); }
  int n_curves() const { return 9 * n_resistors(); }
  long n_values() const {
    return static_cast<long>(n_curves()) * static_cast<long>(powers.size());
  }
};

// Synthetic scan from a ground-truth device.  counts_per_point = 0 returns
// the exact model probabilities (standard error 1e-4); otherwise each
// (resistor, power, input) setting draws that many multinomial detections,
// estimates the probability as k/N and its error from the smoothed binomial
// sigma = sqrt(pt (1 - pt) / N) with pt = (k + 0.5)/(N + 1).  Every setting
// has its own deterministic random stream.
ScanDataset generate_scan(const DeviceConfig& truth, ScanProtocol protocol,
                          long counts_per_point, std::uint64_t seed,
                          int n_points = 60, double p_max = 1.0);

// Columns: input, output, resistor, power_W, probability, std_err.
void save_scan_csv(const ScanDataset& scan, std::ostream& os);

// Linear thermal coefficients seeded from per-curve Fourier analysis: each
// curve's dominant oscillation frequency is extracted (zero-padded DFT with
// quadratic peak interpolation), the frequencies of one resistor's nine
// curves are clustered, and the two most common clusters give |alpha| for the
// two phases.  For the internal protocol a proximity heuristic fixes sign and
// row: R1/R2 push the phases up, R3/R4 down, and R2 couples mostly to the
// second phase.  Oscillations slower than one period over the scanned span
// are unresolvable; those entries are zeroed and flagged low-confidence.
struct FourierInit {
  RMat alpha0;  // 2 x n_resistors, rad/W
  Eigen::Matrix<std::uint8_t, 2, Eigen::Dynamic> low_confidence;
};

FourierInit fourier_init(const ScanDataset& scan);

struct FitResult {
  RVec parameters;
  RVec std_errors;  // 1-sigma, from the inverse weighted normal matrix
  double chi2 = 0.0;
  long n_points = 0;
  int n_params = 0;
  bool converged = false;
  int iterations = 0;

  double chi2_per_dof() const {
    return chi2 / static_cast<double>(n_points - n_params);
  }
};

// The single-photon probabilities are invariant under jointly negating both
// tritter phases, both static phases and all thermal coefficients.  This
// picks the representative with sin(phiTA) > 0 (tritter phase in (0, pi)) and
// wraps the four phase entries into [-pi, pi).
RVec canonicalize_parameters(const RVec& theta);

// Weighted least squares over all 26 device parameters (order as
// pack_parameters) against an internal-resistor scan, Levenberg-Marquardt
// with the analytic Jacobian.  Returns the canonicalized parameters.
FitResult fit_device(const ScanDataset& scan, const RVec& init);

// Fully self-starting variant: Fourier initialization, an independent
// 6-parameter fit per resistor around the ideal-coupler head, gauge-coherent
// merging of the per-resistor solutions (both sign branches tried), then the
// joint 26-parameter polish.
FitResult fit_device_blind(const ScanDataset& scan);

// 6-parameter fit of the tritter-heater thermal response
// [phi0TA, phi0TB, alphaTA, alphaTB, alphaNL_TA, alphaNL_TB] against a
// tritter-resistor scan; couplers and static internal phases are held fixed
// at the values in `known`.  Self-initializing (Fourier magnitudes plus a
// coarse grid over static phases and signs).
FitResult fit_tritter_resistors(const ScanDataset& scan, const DeviceConfig& known);

// Sequential balanced-tritter setting procedure:
//   step 1  minimize P(3->3) over the R1/R2 powers (sets the internal phases
//           to the +-(2pi/3, pi/3) branch; tritter-phase independent),
//   step 2  minimize P(3->1) over the RTB power (sets phiTB to +-pi/2,
//           phiTA independent),
//   step 3  minimize P(1->1) over the RTA power (sets phiTA).
// The branch field records which sign family the minimizer reached.
struct TritterSettingReport {
  int branch = +1;
  Vec2 step1_powers = Vec2::Zero();    // R1, R2 (W)
  Vec2 step1_voltages = Vec2::Zero();  // V
  Vec2 step1_phases = Vec2::Zero();    // achieved (dphi1, dphi2), rad
  double step1_residual = 0.0;         // P(3->3) at the optimum

  double step2_power = 0.0, step2_voltage = 0.0;
  double step2_residual = 0.0;  // P(3->1)
  double phi_tb = 0.0;          // achieved tritter phase, rad

  double step3_power = 0.0, step3_voltage = 0.0;
  double step3_residual = 0.0;  // P(1->1)
  double phi_ta = 0.0;

  // Against the sign-matched balanced tritter.
  double fidelity_a = 0.0, fidelity_b = 0.0;
};

TritterSettingReport tritter_setting(const DeviceConfig& config, double p_max = 1.2);

// 2-D probability surfaces over an endpoint-exclusive [0, 2pi)^2 phase grid,
// one block per probed input state (all single modes for 1 photon, all
// distinct pairs for 2, the (1,1,1) state for 3).
struct SurfaceDataset {
  int photons = 1;
  int grid_n = 30;
  double visibility = 1.0;
  long counts_per_point = 0;  // 0 = noiseless
  std::vector<FockState> inputs;
  std::vector<RMat> phat;  // per input: (grid_n * grid_n) x n_events
};

SurfaceDataset generate_surface_scan(const DeviceConfig& truth, int photons,
                                     int grid_n = 30, long counts_per_point = 0,
                                     std::uint64_t seed = 0);

// Coefficient of determination between the fitted model's surfaces and the
// dataset, one R^2 per (input, output event) curve plus the average.
struct SurfaceReport {
  std::vector<double> r2;
  double mean_r2 = 0.0;
};

SurfaceReport verify_surfaces(const DeviceConfig& fitted, const SurfaceDataset& data);

// Phase settings bringing the composed device closest to the identity at
// (dphi1, dphi2) = (0, 0): maximizes the similarity S = mean_i P(i -> i)
// over (phiTA, phiTB, delta1, delta2) by multi-start simplex search seeded
// with the analytic ideal-coupler solution (pi/2, -pi/2, 0, pi).
struct IdentityResult {
  double phi_ta = 0.0, phi_tb = 0.0;
  double dphi1 = 0.0, dphi2 = 0.0;
  double similarity = 0.0;
  bool converged = false;
};

IdentityResult identity_configuration(const DeviceConfig& config, int starts = 48,
                                      std::uint64_t seed = 1);

}  // namespace triphase

#endif  // TRIPHASE_CHARACTERIZATION_HPP
