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

#include <cstdio>
#include <string>

#include "doctest.h"
#include "triphase/config.hpp"
#include "triphase/unitary.hpp"

using namespace triphase;

TEST_SUITE("config") {
  TEST_CASE("reference device carries the characterized-chip tables") {
    const DeviceConfig c = reference_device();
    CHECK(c.device == "paper-device");
    CHECK(c.T1A == doctest::Approx(0.414));
    CHECK(c.T2B == doctest::Approx(0.625));
    CHECK(c.phiTA == doctest::Approx(1.893));
    CHECK(c.phiTB == doctest::Approx(1.866));
    CHECK(c.alpha(0, 0) == doctest::Approx(24.35));
    CHECK(c.alpha(1, 1) == doctest::Approx(16.54));
    CHECK(c.alpha_nl(1, 3) == doctest::Approx(-1.21));
    CHECK(c.alphaTA == doctest::Approx(9.06));
    CHECK(c.visibility == doctest::Approx(0.95));
    CHECK(c.resistance_ohm[0] == doctest::Approx(80.0));
    // The coupler deviations are small, so the device tritters stay close to
    // balanced.
    CHECK(fidelity(tritter(c.tritter_a()), symmetric_tritter()) > 0.97);
    CHECK(fidelity(tritter(c.tritter_b()), symmetric_tritter()) > 0.97);
  }

  TEST_CASE("serialization round-trips every field") {
    DeviceConfig c = reference_device();
    c.device = "round-trip";
    c.dphi20 = 0.1234567890123;
    c.alpha(1, 2) = -3.25;
    c.visibility = 0.9;
    const DeviceConfig d = config_from_string(config_to_string(c));
    CHECK(d.device == c.device);
    CHECK(d.T1A == c.T1A);
    CHECK(d.T3B == c.T3B);
    CHECK(d.phiTA == c.phiTA);
    CHECK(d.dphi20 == c.dphi20);
    CHECK(d.alpha(1, 2) == c.alpha(1, 2));
    CHECK(d.alpha_nl(0, 3) == c.alpha_nl(0, 3));
    CHECK(d.phi0TB == c.phi0TB);
    CHECK(d.alphaNL_TA == c.alphaNL_TA);
    CHECK(d.resistance_ohm == c.resistance_ohm);
    CHECK(d.visibility == c.visibility);
  }

  TEST_CASE("canonical text is byte stable") {
    const std::string text = config_to_string(reference_device());
    CHECK(config_to_string(config_from_string(text)) == text);
    CHECK(text.back() == '\n');
    CHECK(text.find("\"device\"") != std::string::npos);
    CHECK(text.find("\"alpha_21\"") != std::string::npos);
  }

  TEST_CASE("file save and load round-trip") {
    const std::string path = "test_config_roundtrip.json";
    DeviceConfig c = reference_device();
    c.device = "file-round-trip";
    save_config(c, path);
    const DeviceConfig d = load_config(path);
    CHECK(d.device == "file-round-trip");
    CHECK(d.alpha(0, 3) == c.alpha(0, 3));
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("definitely/not/a/config.json"),
                    std::invalid_argument);
  }

  TEST_CASE("malformed text is rejected") {
    CHECK_THROWS(config_from_string("{ not json"));
    CHECK_THROWS(config_from_string("{}"));  // missing required keys
  }

  TEST_CASE("parameter packing round-trips") {
    const DeviceConfig c = reference_device();
    const RVec theta = pack_parameters(c);
    REQUIRE(theta.size() == 26);
    CHECK(theta[0] == doctest::Approx(c.T1A));
    CHECK(theta[6] == doctest::Approx(c.phiTA));
    CHECK(theta[9] == doctest::Approx(c.dphi20));
    CHECK(theta[10] == doctest::Approx(c.alpha(0, 0)));
    CHECK(theta[25] == doctest::Approx(c.alpha_nl(1, 3)));
    DeviceConfig d;  // defaults everywhere else
    unpack_parameters(theta, d);
    CHECK((pack_parameters(d) - theta).cwiseAbs().maxCoeff() == 0.0);
    const auto& names = parameter_names();
    CHECK(names.size() == 26);
    CHECK(std::string(names[0]) == "T1A");
    CHECK(std::string(names[7]) == "phiTB");
  }

  TEST_CASE("recorded transformations are near-unitary") {
    CHECK(unitarity_defect(recorded_tritter_a()) < 0.05);
    CHECK(unitarity_defect(recorded_tritter_b()) < 0.05);
    CHECK(unitarity_defect(recorded_identity_a()) < 0.05);
    CHECK(unitarity_defect(recorded_identity_b()) < 0.05);
    // The recorded identity configuration composes to the identity up to
    // output phases: the mean diagonal probability stays close to one.
    const Mat3 prod = recorded_identity_b() * recorded_identity_a();
    double mean_diag = 0.0;
    for (int i = 0; i < 3; ++i) mean_diag += std::norm(prod(i, i)) / 3.0;
    CHECK(mean_diag > 0.97);
    // And the recorded tritters are close to the balanced one.
    CHECK(fidelity(recorded_tritter_a(), symmetric_tritter()) > 0.95);
    CHECK(fidelity(recorded_tritter_b(), symmetric_tritter()) > 0.95);
  }
}
