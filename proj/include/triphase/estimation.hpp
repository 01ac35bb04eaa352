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

#ifndef TRIPHASE_ESTIMATION_HPP
#define TRIPHASE_ESTIMATION_HPP

#include <cstdint>
#include <vector>

#include "triphase/common.hpp"
#include "triphase/photonics.hpp"
#include "triphase/rng.hpp"
#include "triphase/unitary.hpp"

namespace triphase {

// Event probabilities together with their gradients in (dphi1, dphi2).
struct ProbGradients {
  OutputDistribution dist;
  Eigen::Matrix<double, Eigen::Dynamic, 2> grad;  // one row per event
};

// Analytic gradients: dU/d(dphi_j) = U^B (i E_j) D U^A is rank one, and the
// permanent is multilinear in the rows of its submatrix, so each event's
// derivative is a sum of single-row-replaced permanents.  The distinguishable
// part is treated the same way on the |U|^2 entries.
ProbGradients prob_gradient(const Mat3& ua, const Mat3& ub, const PhaseVector& phases,
                            const FockState& input, const DistinguishabilityModel& model);

// Classical Fisher information I_jk = sum_e (d_j P_e)(d_k P_e)/P_e; events
// with P < 1e-12 are excluded from the sum.
Mat2 fisher_matrix(const Mat3& ua, const Mat3& ub, const PhaseVector& phases,
                   const FockState& input, const DistinguishabilityModel& model);

// Condition-number test (threshold 1e12) and the guarded trace of the
// inverse; trace_inverse raises numerical_error at singular points instead of
// returning a meaningless number.
bool information_singular(const Mat2& info);
double trace_inverse(const Mat2& info);

// Quantum Fisher information of the pure phase-encoded state after the
// preparation tritter: H = 4 Cov(n_1, n_2) over the photon numbers on the two
// encoded arms.  Defined only for fully indistinguishable photons; a
// visibility below 1 raises std::invalid_argument.
Mat2 qfim_pure(const Mat3& ua, const FockState& input, double visibility = 1.0);

enum class BenchmarkKind { Simultaneous, Separate };

// Reference bounds for n classical (distinguishable) single-photon probes.
// Simultaneous: all n photons in the optimal three-mode probe splitting
// p1 = p2 = 1 - sqrt(2)/2 onto the encoded arms, H = n * H_1.  Separate:
// n/2 photons per phase in the optimal two-mode probe, H = diag(n/2, n/2)
// (n must be even).
Mat2 classical_benchmark(BenchmarkKind kind, int n_photons);

// Variant with the probes prepared through the device's own first tritter:
// n times the best single-photon information over the three input modes.
// For a balanced tritter this is weaker than the optimal-probe bound above
// (trace 1.0 vs 0.9714 at n = 3).
Mat2 classical_benchmark_mode_probes(int n_photons, const Mat3& ua);

// Number of eigenvalues of (a - b) above +1e-10.
int positive_eigencount(const Mat2& a, const Mat2& b);

// Endpoint-exclusive rectangular grid over the two phases.
struct GridSpec {
  int n1 = 100, n2 = 100;
  double lo1 = 0.0, hi1 = 2.0 * kPi;
  double lo2 = 0.0, hi2 = 2.0 * kPi;

  double x1(int i) const { return lo1 + (hi1 - lo1) * i / n1; }
  double x2(int j) const { return lo2 + (hi2 - lo2) * j / n2; }
};

enum class Benchmark { None, Simultaneous, Separate };

struct CrbMap {
  GridSpec grid;
  RMat values;  // Tr(I^-1); NaN where the information matrix is singular
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> singular;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> beats;
  double benchmark_trace = 0.0;  // NaN when no benchmark was requested
  double min_value = 0.0;
  Vec2 argmin = Vec2::Zero();
  long beat_count = 0;
};

// Tr(I^-1) over the grid, with singular points flagged and (optionally) the
// mask of points beating the chosen classical benchmark.
CrbMap crb_map(const Mat3& ua, const Mat3& ub, const FockState& input,
               const DistinguishabilityModel& model, const GridSpec& grid,
               Benchmark benchmark = Benchmark::None);

// Multinomial draw of m >= 1 events; counts are index-aligned with
// dist.events.
std::vector<long> sample_events(const OutputDistribution& dist, long m, Rng& rng);

struct EstimationResult {
  Vec2 estimate = Vec2::Zero();
  Vec2 variances = Vec2::Zero();  // asymptotic (CRB-based) variances at the estimate
  double total_variance = 0.0;
  long m = 0;
};

// Local maximum-likelihood solver around a known working point: a
// grid_n x grid_n log-probability table over center +- half_width feeds a
// coarse scan (ties resolved toward the lexicographically smallest phase
// pair), then a simplex polish refines within the same window.
class MleSolver {
 public:
  MleSolver(const Mat3& ua, const Mat3& ub, const FockState& input,
            const DistinguishabilityModel& model, const Vec2& center,
            double half_width = 0.5, int grid_n = 64);

  OutputDistribution distribution(const Vec2& phases) const;

  // Phase estimate from per-event counts; raises numerical_error when the
  // likelihood is flat over the search window.
  Vec2 estimate(const std::vector<long>& counts) const;

 private:
  Mat3 ua_, ub_;
  FockState input_;
  DistinguishabilityModel model_;
  Vec2 center_;
  double half_width_;
  int grid_n_;
  RMat logp_;  // (grid_n * grid_n) x n_events
};

EstimationResult mle_estimate(const std::vector<long>& counts, const Mat3& ua,
                              const Mat3& ub, const FockState& input,
                              const DistinguishabilityModel& model, const Vec2& center,
                              double half_width = 0.5);

struct VarianceRow {
  long m = 0;
  double mse1 = 0.0, mse2 = 0.0, total = 0.0;
  double crb_over_m = 0.0;
  double hsim_over_m = 0.0;
  double hsep_over_m = 0.0;  // NaN for odd photon numbers
};

// Monte-Carlo estimation experiment: for each m, draw `repetitions` count
// vectors at the true phases, run the ML estimator, and report mean squared
// errors next to the scaled information bounds.  Each (m, repetition) pair
// gets its own deterministic random stream, so results do not depend on
// evaluation order.
std::vector<VarianceRow> variance_experiment(const Mat3& ua, const Mat3& ub,
                                             const FockState& input,
                                             const DistinguishabilityModel& model,
                                             const Vec2& truth,
                                             const std::vector<long>& m_values,
                                             int repetitions, std::uint64_t seed);

}  // namespace triphase

#endif  // TRIPHASE_ESTIMATION_HPP
