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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "triphase/config.hpp"
#include "triphase/photonics.hpp"
#include "triphase/unitary.hpp"

using namespace triphase;

namespace {

std::string binary_path() {
  const char* env = std::getenv("TRIPHASE_BIN");
  return env ? env : "./triphase";
}

struct CmdResult {
  int status = -1;
  std::string out;
};

// Run a shell command with a clean TRIPHASE_CONFIG, capturing the requested
// stream(s).
CmdResult run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = "env -u TRIPHASE_CONFIG " + binary_path() + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CmdResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, got);
  const int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

double field(const std::vector<std::string>& row, std::size_t k) {
  return std::strtod(row.at(k).c_str(), nullptr);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help lists the subcommands") {
    const CmdResult res = run("--help", true);
    CHECK(res.status == 0);
    for (const char* sub :
         {"simulate", "crb", "mle", "characterize", "tritter-set", "identity", "config"})
      CHECK(res.out.find(sub) != std::string::npos);
  }

  TEST_CASE("simulate at a phase point matches the library") {
    const CmdResult res = run("simulate --phases 0.8,-1.2 --input 2,3");
    REQUIRE(res.status == 0);
    const auto rows = parse_csv(res.out);
    REQUIRE(rows.size() == 7);  // header + 6 two-photon events
    CHECK(rows[0] == std::vector<std::string>{"dphi1", "dphi2", "input", "output",
                                              "probability"});
    const DeviceConfig cfg = reference_device();
    DistinguishabilityModel model;
    model.visibility = cfg.visibility;
    const OutputDistribution expected = output_probs(
        interferometer(tritter(cfg.tritter_a()), tritter(cfg.tritter_b()),
                       {0.8, -1.2, 0.0}),
        FockState::from_modes({2, 3}), model);
    double total = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(rows[k][2] == "23");
      CHECK(rows[k][3] == expected.events[k - 1].label());
      CHECK(field(rows[k], 4) ==
            doctest::Approx(expected.p[static_cast<Eigen::Index>(k - 1)])
                .epsilon(1e-9));
      total += field(rows[k], 4);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("simulate grids are deterministic and complete") {
    const std::string args = "simulate --grid 4x3 --input 1 --photons 1";
    const CmdResult a = run(args), b = run(args);
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    const auto rows = parse_csv(a.out);
    CHECK(rows.size() == 1 + 4 * 3 * 3);  // 12 grid nodes, 3 events each
    // Endpoint-exclusive grid: no row reaches 2pi.
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(field(rows[k], 0) < 6.0);
  }

  TEST_CASE("simulate honours --out and --visibility") {
    const std::string path = "cli_sim_out.csv";
    const CmdResult to_file =
        run("simulate --phases 1.0,2.0 --input 2,3 --out " + path);
    REQUIRE(to_file.status == 0);
    CHECK(to_file.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const CmdResult direct = run("simulate --phases 1.0,2.0 --input 2,3");
    CHECK(ss.str() == direct.out);
    std::remove(path.c_str());
    // Full indistinguishability changes the two-photon statistics.
    const CmdResult v1 = run("simulate --phases 1.0,2.0 --input 2,3 --visibility 1");
    CHECK(v1.status == 0);
    CHECK(v1.out != direct.out);
  }

  TEST_CASE("crb reports the map and its minimum") {
    const CmdResult res = run("crb --grid 12x12 --input 3 --benchmark sim");
    REQUIRE(res.status == 0);
    const auto rows = parse_csv(res.out);
    REQUIRE(rows.size() == 1 + 144);
    CHECK(rows[0][2] == "tr_inv");
    for (const std::size_t k : {std::size_t(1), std::size_t(77), std::size_t(144)}) {
      CHECK((rows[k][3] == "0" || rows[k][3] == "1"));
      CHECK((rows[k][4] == "0" || rows[k][4] == "1"));
    }
    const CmdResult log = run("crb --grid 12x12 --input 3 --benchmark sim", true);
    CHECK(log.out.find("min Tr(I^-1) = ") != std::string::npos);
    CHECK(log.out.find("benchmark Tr(H^-1) = ") != std::string::npos);
    // Without a benchmark the mask column is empty.
    const CmdResult plain = run("crb --grid 6x6 --input 3");
    const auto prows = parse_csv(plain.out);
    REQUIRE(prows.size() == 37);
    CHECK(prows[5].size() == 5);
    CHECK(prows[5][4].empty());
  }

  TEST_CASE("mle runs are seeded and reproducible") {
    const std::string args = "mle --phases -1.159,2.810 --events 150 --reps 3 --seed 5";
    const CmdResult a = run(args), b = run(args);
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    const auto rows = parse_csv(a.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"m", "mse1", "mse2", "total",
                                              "crb_over_m", "hsim_over_m",
                                              "hsep_over_m"});
    CHECK(field(rows[1], 0) == 150.0);
    CHECK(field(rows[1], 3) ==
          doctest::Approx(field(rows[1], 1) + field(rows[1], 2)).epsilon(1e-9));
    CHECK(field(rows[1], 3) > 0.0);
    const CmdResult c =
        run("mle --phases -1.159,2.810 --events 150 --reps 3 --seed 6");
    CHECK(c.out != a.out);
  }

  TEST_CASE("characterize round-trips the reference device") {
    const std::string fitted_path = "cli_fitted.json";
    const CmdResult res =
        run("characterize --noise none --seed 2 --out " + fitted_path);
    REQUIRE(res.status == 0);
    CHECK(res.out.find("chi2/nu = ") != std::string::npos);
    CHECK(res.out.find("converged: yes") != std::string::npos);
    const std::string tag = "max |delta param| vs truth = ";
    const std::size_t pos = res.out.find(tag);
    REQUIRE(pos != std::string::npos);
    const double dmax = std::strtod(res.out.c_str() + pos + tag.size(), nullptr);
    CHECK(dmax < 1e-6);
    // The emitted config is loadable and carries the recovered parameters.
    const DeviceConfig fitted = load_config(fitted_path);
    const RVec a = pack_parameters(fitted);
    const RVec b = pack_parameters(reference_device());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
    std::remove(fitted_path.c_str());
  }

  TEST_CASE("tritter-set prints the full procedure") {
    const CmdResult res = run("tritter-set");
    REQUIRE(res.status == 0);
    CHECK(res.out.find("branch: +1") != std::string::npos);
    CHECK(res.out.find("step 1: P(3->3) = ") != std::string::npos);
    CHECK(res.out.find("step 2: P(3->1) = ") != std::string::npos);
    CHECK(res.out.find("step 3: P(1->1) = ") != std::string::npos);
    CHECK(res.out.find("fidelity A vs balanced tritter: 0.98") != std::string::npos);
  }

  TEST_CASE("identity search reports the similarity") {
    const CmdResult res = run("identity --starts 4");
    REQUIRE(res.status == 0);
    const std::string tag = "similarity S = ";
    const std::size_t pos = res.out.find(tag);
    REQUIRE(pos != std::string::npos);
    const double s = std::strtod(res.out.c_str() + pos + tag.size(), nullptr);
    CHECK(s > 0.99);
    CHECK(s <= 1.0);
  }

  TEST_CASE("config subcommand emits the canonical form") {
    const CmdResult res = run("config");
    REQUIRE(res.status == 0);
    CHECK(res.out == config_to_string(reference_device()));
    // A custom config is honoured both via the flag and via the environment.
    DeviceConfig custom = reference_device();
    custom.device = "cli-custom";
    custom.alphaTB = 2.5;
    const std::string path = "cli_custom.json";
    save_config(custom, path);
    const CmdResult via_flag = run("--config " + path + " config");
    CHECK(via_flag.out == config_to_string(custom));
    const std::string env_cmd = "env TRIPHASE_CONFIG=" + path + " " + binary_path() +
                                " config 2>/dev/null";
    CmdResult via_env;
    FILE* pipe = popen(env_cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) via_env.out.append(buf, got);
    via_env.status = WEXITSTATUS(pclose(pipe));
    CHECK(via_env.status == 0);
    CHECK(via_env.out == config_to_string(custom));
    std::remove(path.c_str());
  }

  TEST_CASE("usage errors exit with code 2") {
    CHECK(run("no-such-command").status == 2);
    CHECK(run("mle").status == 2);  // --phases is required
    CHECK(run("simulate --phases 1,2 --grid 3x3").status == 2);  // exclusive
    CHECK(run("simulate --input 2,2").status == 2);  // bunched two-photon input
    CHECK(run("simulate --input 1,2 --photons 3").status == 2);
    CHECK(run("simulate --grid 0x4").status == 2);
    CHECK(run("crb --benchmark bogus").status == 2);
    CHECK(run("--config does_not_exist.json config").status == 2);
  }

  TEST_CASE("broken config files exit with code 3") {
    const std::string path = "cli_broken.json";
    std::ofstream(path) << "{ this is not json\n";
    CHECK(run("--config " + path + " config").status == 3);
    std::remove(path.c_str());
  }
}
