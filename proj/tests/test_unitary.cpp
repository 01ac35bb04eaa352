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

#include <array>
#include <cmath>

#include "doctest.h"
#include "triphase/rng.hpp"
#include "triphase/unitary.hpp"

using namespace triphase;

namespace {

TritterParams random_params(Rng& rng) {
  TritterParams p;
  p.t1 = 0.2 + 0.6 * rng.uniform();
  p.t2 = 0.2 + 0.6 * rng.uniform();
  p.t3 = 0.2 + 0.6 * rng.uniform();
  p.phi_t = 2.0 * kPi * rng.uniform() - kPi;
  return p;
}

}  // namespace

TEST_SUITE("unitary") {
  TEST_CASE("coupler matrix has the right entries and is unitary") {
    const double t = 0.37;
    const Mat3 c12 = coupler_matrix(t, CouplerPair::Modes12);
    CHECK(std::abs(c12(0, 0) - std::sqrt(1.0 - t)) < 1e-14);
    CHECK(std::abs(c12(1, 1) - std::sqrt(1.0 - t)) < 1e-14);
    CHECK(std::abs(c12(0, 1) - Complex(0.0, std::sqrt(t))) < 1e-14);
    CHECK(std::abs(c12(1, 0) - Complex(0.0, std::sqrt(t))) < 1e-14);
    CHECK(std::abs(c12(2, 2) - 1.0) < 1e-14);
    CHECK(std::abs(c12(0, 2)) == 0.0);
    CHECK(unitarity_defect(c12) < 1e-14);

    const Mat3 c23 = coupler_matrix(t, CouplerPair::Modes23);
    CHECK(std::abs(c23(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(c23(1, 2) - Complex(0.0, std::sqrt(t))) < 1e-14);
    CHECK(unitarity_defect(c23) < 1e-14);
  }

  TEST_CASE("coupler derivative matches finite differences") {
    const double t = 0.42, h = 1e-6;
    for (const CouplerPair pair : {CouplerPair::Modes12, CouplerPair::Modes23}) {
      const Mat3 d = coupler_matrix_dt(t, pair);
      const Mat3 fd =
          (coupler_matrix(t + h, pair) - coupler_matrix(t - h, pair)) / (2.0 * h);
      CHECK((d - fd).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("phase shifter applies e^{i phase} on one mode") {
    const Mat3 ps = phase_shifter_matrix(2, 0.8);
    CHECK(std::abs(ps(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(ps(1, 1) - std::polar(1.0, 0.8)) < 1e-15);
    CHECK(std::abs(ps(2, 2) - 1.0) < 1e-15);
    CHECK(std::abs(ps(0, 1)) == 0.0);
  }

  TEST_CASE("tritter equals its explicit factor product") {
    const TritterParams p{0.31, 0.55, 0.62, 1.1};
    const Mat3 manual = coupler_matrix(p.t3, CouplerPair::Modes12) *
                        phase_shifter_matrix(1, p.phi_t) *
                        coupler_matrix(p.t2, CouplerPair::Modes23) *
                        coupler_matrix(p.t1, CouplerPair::Modes12);
    CHECK((tritter(p) - manual).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(unitarity_defect(tritter(p)) < 1e-13);
  }

  TEST_CASE("balanced tritter splits every input evenly") {
    const Mat3 u = symmetric_tritter();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(std::norm(u(i, j)) - 1.0 / 3.0) < 1e-12);
    CHECK(unitarity_defect(u) < 1e-10);
    CHECK((u - tritter(balanced_tritter_params())).cwiseAbs().maxCoeff() < 1e-14);
    const TritterParams bp = balanced_tritter_params();
    CHECK(bp.t1 == doctest::Approx(0.5));
    CHECK(bp.t2 == doctest::Approx(2.0 / 3.0));
    CHECK(bp.t3 == doctest::Approx(0.5));
    CHECK(bp.phi_t == doctest::Approx(kPi / 2.0));
  }

  TEST_CASE("tritter gradients match finite differences") {
    Rng rng(31);
    const double h = 1e-6;
    for (int trial = 0; trial < 12; ++trial) {
      const TritterParams p = random_params(rng);
      Mat3 u;
      std::array<Mat3, 4> du;
      tritter_with_grads(p, u, du);
      CHECK((u - tritter(p)).cwiseAbs().maxCoeff() < 1e-14);
      for (int k = 0; k < 4; ++k) {
        TritterParams lo = p, hi = p;
        double* fields_lo[4] = {&lo.t1, &lo.t2, &lo.t3, &lo.phi_t};
        double* fields_hi[4] = {&hi.t1, &hi.t2, &hi.t3, &hi.phi_t};
        *fields_lo[k] -= h;
        *fields_hi[k] += h;
        const Mat3 fd = (tritter(hi) - tritter(lo)) / (2.0 * h);
        CHECK((du[static_cast<std::size_t>(k)] - fd).cwiseAbs().maxCoeff() < 5e-8);
      }
    }
  }

  TEST_CASE("reference phase is a gauge freedom of the probabilities") {
    Rng rng(17);
    const TritterParams a = random_params(rng), b = random_params(rng);
    const Mat3 u0 = interferometer(a, b, {0.9, -1.3, 0.0});
    const Mat3 u1 = interferometer(a, b, {0.9, -1.3, 2.2});
    CHECK((u0.cwiseAbs2() - u1.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-13);
    // The two interferometer overloads agree.
    const Mat3 u2 = interferometer(tritter(a), tritter(b), {0.9, -1.3, 2.2});
    CHECK((u1 - u2).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("interferometer applies the phases between the tritters") {
    const TritterParams bp = balanced_tritter_params();
    const Mat3 ua = tritter(bp), ub = tritter(bp);
    const PhaseVector ph{0.7, -0.4, 0.3};
    const Mat3 d = phase_shifter_matrix(1, ph.dphi1 + ph.phi_ref) *
                   phase_shifter_matrix(2, ph.dphi2 + ph.phi_ref) *
                   phase_shifter_matrix(3, ph.phi_ref);
    CHECK((interferometer(ua, ub, ph) - ub * d * ua).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("fidelity is one on itself and phase invariant") {
    Rng rng(23);
    const Mat3 u = tritter(random_params(rng));
    CHECK(fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    const Mat3 v = std::polar(1.0, 1.234) * u;
    CHECK(fidelity(u, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(u, symmetric_tritter()) <= 1.0 + 1e-12);
  }

  TEST_CASE("average fidelity of the ideal device is one") {
    const TritterParams bp = balanced_tritter_params();
    CHECK(average_fidelity(bp, bp, 8) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("unitarity defect detects non-unitarity") {
    Mat3 u = symmetric_tritter();
    CHECK(unitarity_defect(u) < 1e-12);
    u(0, 0) += 0.02;
    CHECK(unitarity_defect(u) > 0.005);
  }

  TEST_CASE("global phase alignment undoes a global phase") {
    Rng rng(41);
    const Mat3 u = tritter(random_params(rng));
    const Mat3 rotated = std::polar(1.0, -2.13) * u;
    CHECK((align_global_phase(rotated, u) - u).cwiseAbs().maxCoeff() < 1e-12);
  }
}
