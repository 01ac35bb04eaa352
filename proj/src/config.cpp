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

#include "triphase/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace triphase {

using ordered_json = nlohmann::ordered_json;

ResistorBank make_resistor_bank(const DeviceConfig& c) {
  ResistorBank b;
  b.resistance = c.resistance_ohm;
  b.alpha_lin = c.alpha;
  b.alpha_nl = c.alpha_nl;
  b.alpha_t_lin = Vec2{c.alphaTA, c.alphaTB};
  b.alpha_t_nl = Vec2{c.alphaNL_TA, c.alphaNL_TB};
  b.dphi10 = c.dphi10;
  b.dphi20 = c.dphi20;
  b.phi0_ta = c.phi0TA;
  b.phi0_tb = c.phi0TB;
  return b;
}

DeviceConfig reference_device() {
  DeviceConfig c;
  c.device = "paper-device";
  c.T1A = 0.414;
  c.T2A = 0.617;
  c.T3A = 0.411;
  c.T1B = 0.415;
  c.T2B = 0.625;
  c.T3B = 0.438;
  c.phiTA = 1.893;
  c.phiTB = 1.866;
  c.dphi10 = -0.355;
  c.dphi20 = -1.441;
  c.alpha << 24.35, 0.72, -23.54, -26.65,
             8.85, 16.54, -17.45, -17.20;
  c.alpha_nl << -0.34, -0.11, -0.16, 0.03,
                -0.66, -0.55, -0.66, -1.21;
  c.phi0TA = 1.137;
  c.phi0TB = 0.914;
  c.alphaTA = 9.06;
  c.alphaTB = 1.83;
  c.alphaNL_TA = -0.35;
  c.alphaNL_TB = 0.75;
  c.resistance_ohm = {80.0, 80.0, 80.0, 80.0, 80.0, 80.0};
  c.visibility = 0.95;
  return c;
}

namespace {

const char* kAlphaNames[8] = {"alpha_11", "alpha_12", "alpha_13", "alpha_14",
                              "alpha_21", "alpha_22", "alpha_23", "alpha_24"};
const char* kAlphaNlNames[8] = {"alpha_nl_11", "alpha_nl_12", "alpha_nl_13",
                                "alpha_nl_14", "alpha_nl_21", "alpha_nl_22",
                                "alpha_nl_23", "alpha_nl_24"};
const char* kResistorNames[6] = {"R1", "R2", "R3", "R4", "RTA", "RTB"};

}  // namespace

std::string config_to_string(const DeviceConfig& c) {
  ordered_json j;
  j["device"] = c.device;
  j["visibility"] = c.visibility;
  j["couplers"] = {{"T1A", c.T1A}, {"T2A", c.T2A}, {"T3A", c.T3A},
                   {"T1B", c.T1B}, {"T2B", c.T2B}, {"T3B", c.T3B}};
  j["tritter_phases"] = {{"phiTA", c.phiTA}, {"phiTB", c.phiTB}};
  j["static_phases"] = {{"dphi10", c.dphi10}, {"dphi20", c.dphi20}};
  ordered_json al, anl;
  for (int k = 0; k < 8; ++k) {
    al[kAlphaNames[k]] = c.alpha(k / 4, k % 4);
    anl[kAlphaNlNames[k]] = c.alpha_nl(k / 4, k % 4);
  }
  j["alpha"] = al;
  j["alpha_nl"] = anl;
  j["tritter_heaters"] = {{"phi0TA", c.phi0TA},         {"phi0TB", c.phi0TB},
                          {"alphaTA", c.alphaTA},       {"alphaTB", c.alphaTB},
                          {"alpha_nl_TA", c.alphaNL_TA}, {"alpha_nl_TB", c.alphaNL_TB}};
  ordered_json res;
  for (int k = 0; k < 6; ++k)
    res[kResistorNames[k]] = c.resistance_ohm[static_cast<std::size_t>(k)];
  j["resistances_ohm"] = res;
  return j.dump(2) + "\n";
}

DeviceConfig config_from_string(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  DeviceConfig c;
  c.device = j.at("device").get<std::string>();
  c.visibility = j.at("visibility").get<double>();
  const auto& cp = j.at("couplers");
  c.T1A = cp.at("T1A");
  c.T2A = cp.at("T2A");
  c.T3A = cp.at("T3A");
  c.T1B = cp.at("T1B");
  c.T2B = cp.at("T2B");
  c.T3B = cp.at("T3B");
  c.phiTA = j.at("tritter_phases").at("phiTA");
  c.phiTB = j.at("tritter_phases").at("phiTB");
  c.dphi10 = j.at("static_phases").at("dphi10");
  c.dphi20 = j.at("static_phases").at("dphi20");
  for (int k = 0; k < 8; ++k) {
    c.alpha(k / 4, k % 4) = j.at("alpha").at(kAlphaNames[k]);
    c.alpha_nl(k / 4, k % 4) = j.at("alpha_nl").at(kAlphaNlNames[k]);
  }
  const auto& th = j.at("tritter_heaters");
  c.phi0TA = th.at("phi0TA");
  c.phi0TB = th.at("phi0TB");
  c.alphaTA = th.at("alphaTA");
  c.alphaTB = th.at("alphaTB");
  c.alphaNL_TA = th.at("alpha_nl_TA");
  c.alphaNL_TB = th.at("alpha_nl_TB");
  for (int k = 0; k < 6; ++k)
    c.resistance_ohm[static_cast<std::size_t>(k)] =
        j.at("resistances_ohm").at(kResistorNames[k]);
  return c;
}

DeviceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_string(ss.str());
}

void save_config(const DeviceConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write config file: " + path);
  out << config_to_string(c);
}

RVec pack_parameters(const DeviceConfig& c) {
  RVec th(26);
  th << c.T1A, c.T2A, c.T3A, c.T1B, c.T2B, c.T3B, c.phiTA, c.phiTB, c.dphi10,
      c.dphi20, c.alpha(0, 0), c.alpha(0, 1), c.alpha(0, 2), c.alpha(0, 3),
      c.alpha(1, 0), c.alpha(1, 1), c.alpha(1, 2), c.alpha(1, 3), c.alpha_nl(0, 0),
      c.alpha_nl(0, 1), c.alpha_nl(0, 2), c.alpha_nl(0, 3), c.alpha_nl(1, 0),
      c.alpha_nl(1, 1), c.alpha_nl(1, 2), c.alpha_nl(1, 3);
  return th;
}

void unpack_parameters(const RVec& theta, DeviceConfig& c) {
  if (theta.size() != 26) throw std::domain_error("parameter vector must have 26 entries");
  c.T1A = theta[0];
  c.T2A = theta[1];
  c.T3A = theta[2];
  c.T1B = theta[3];
  c.T2B = theta[4];
  c.T3B = theta[5];
  c.phiTA = theta[6];
  c.phiTB = theta[7];
  c.dphi10 = theta[8];
  c.dphi20 = theta[9];
  for (int k = 0; k < 8; ++k) {
    c.alpha(k / 4, k % 4) = theta[10 + k];
    c.alpha_nl(k / 4, k % 4) = theta[18 + k];
  }
}

const std::array<const char*, 26>& parameter_names() {
  static const std::array<const char*, 26> names = {
      "T1A",         "T2A",         "T3A",         "T1B",         "T2B",
      "T3B",         "phiTA",       "phiTB",       "dphi10",      "dphi20",
      "alpha_11",    "alpha_12",    "alpha_13",    "alpha_14",    "alpha_21",
      "alpha_22",    "alpha_23",    "alpha_24",    "alpha_nl_11", "alpha_nl_12",
      "alpha_nl_13", "alpha_nl_14", "alpha_nl_21", "alpha_nl_22", "alpha_nl_23",
      "alpha_nl_24"};
  return names;
}

Mat3 recorded_tritter_a() {
  Mat3 u;
  u << Complex(-0.441, 0.557), Complex(-0.468, 0.148), Complex(-0.504, 0.0),
      Complex(-0.466, 0.150), Complex(0.494, -0.391), Complex(0.0, 0.602),
      Complex(-0.505, 0.0), Complex(0.0, 0.601), Complex(0.619, 0.0);
  return u;
}

Mat3 recorded_tritter_b() {
  Mat3 u;
  u << Complex(-0.428, 0.549), Complex(-0.462, 0.170), Complex(-0.523, 0.0),
      Complex(-0.484, 0.149), Complex(0.475, -0.408), Complex(0.0, 0.592),
      Complex(-0.509, 0.0), Complex(0.0, 0.605), Complex(0.613, 0.0);
  return u;
}

Mat3 recorded_identity_a() {
  Mat3 u;
  u << Complex(-0.368, -0.562), Complex(0.476, 0.220), Complex(-0.523, 0.003),
      Complex(0.499, 0.202), Complex(0.431, 0.417), Complex(0.002, 0.592),
      Complex(-0.509, 0.0), Complex(0.0, 0.605), Complex(0.613, 0.0);
  return u;
}

Mat3 recorded_identity_b() {
  Mat3 u;
  u << Complex(-0.392, 0.564), Complex(0.452, -0.266), Complex(-0.504, 0.0),
      Complex(-0.487, 0.191), Complex(-0.390, 0.460), Complex(0.0, 0.605),
      Complex(-0.505, 0.0147), Complex(-0.080, -0.596), Complex(0.619, 0.0);
  return u;
}

}  // namespace triphase
