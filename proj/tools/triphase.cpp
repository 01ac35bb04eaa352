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
//
// triphase: command-line driver wiring the library modules into reproducible
// simulation/estimation/characterization runs with CSV and JSON artifacts.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "triphase/characterization.hpp"
#include "triphase/config.hpp"
#include "triphase/csv.hpp"
#include "triphase/estimation.hpp"
#include "triphase/photonics.hpp"
#include "triphase/unitary.hpp"

namespace {

using namespace triphase;

DeviceConfig resolve_config(const std::string& flag) {
  if (!flag.empty()) return load_config(flag);
  if (const char* env = std::getenv("TRIPHASE_CONFIG"))
    if (*env != '\0') return load_config(env);
  return reference_device();
}

std::vector<double> parse_doubles(const std::string& text, std::size_t count,
                                  const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("cannot parse ") + what + ": '" + text + "'");
    }
  }
  if (count != 0 && out.size() != count)
    throw std::invalid_argument(std::string(what) + " needs " + std::to_string(count) +
                                " comma-separated values: '" + text + "'");
  return out;
}

FockState parse_input(const std::string& text) {
  std::vector<int> modes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int m = 0;
    try {
      m = std::stoi(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse --input: '" + text + "'");
    }
    if (m < 1 || m > 3)
      throw std::invalid_argument("--input modes must be 1..3: '" + text + "'");
    modes.push_back(m);
  }
  if (modes.empty() || modes.size() > 3)
    throw std::invalid_argument("--input needs 1 to 3 modes: '" + text + "'");
  return FockState::from_modes(modes);
}

void parse_grid(const std::string& text, int& n1, int& n2) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    n1 = std::stoi(text.substr(0, x));
    n2 = std::stoi(text.substr(x + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("--grid must look like NxM: '" + text + "'");
  }
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("--grid sizes must be positive");
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open output file: " + path);
  fn(os);
}

DistinguishabilityModel model_for(const DeviceConfig& cfg, double vis_flag) {
  DistinguishabilityModel model;
  model.visibility = vis_flag >= 0.0 ? vis_flag : cfg.visibility;
  return model;
}

void check_photons(int flag, const FockState& input) {
  if (flag != 0 && flag != input.total())
    throw std::invalid_argument("--photons disagrees with the --input pattern");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string input = "3", phases, grid = "30x30", range, out;
  int photons = 0;
  double visibility = -1.0;
};

void run_simulate(const DeviceConfig& cfg, const SimulateArgs& a) {
  const FockState input = parse_input(a.input);
  check_photons(a.photons, input);
  const DistinguishabilityModel model = model_for(cfg, a.visibility);
  const Mat3 ua = tritter(cfg.tritter_a());
  const Mat3 ub = tritter(cfg.tritter_b());

  std::vector<std::pair<double, double>> points;
  if (!a.phases.empty()) {
    const auto p = parse_doubles(a.phases, 2, "--phases");
    points.emplace_back(p[0], p[1]);
  } else {
    GridSpec gs;
    parse_grid(a.grid, gs.n1, gs.n2);
    if (!a.range.empty()) {
      const auto r = parse_doubles(a.range, 4, "--range");
      gs.lo1 = r[0];
      gs.hi1 = r[1];
      gs.lo2 = r[2];
      gs.hi2 = r[3];
    }
    points.reserve(static_cast<std::size_t>(gs.n1) * gs.n2);
    for (int i = 0; i < gs.n1; ++i)
      for (int j = 0; j < gs.n2; ++j) points.emplace_back(gs.x1(i), gs.x2(j));
  }

  with_output(a.out, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"dphi1", "dphi2", "input", "output", "probability"});
    for (const auto& [d1, d2] : points) {
      const OutputDistribution dist =
          output_probs(interferometer(ua, ub, {d1, d2, 0.0}), input, model);
      for (long e = 0; e < dist.p.size(); ++e)
        w.row({format_double(d1), format_double(d2), input.label(),
               dist.events[e].label(), format_double(dist.p[e])});
    }
  });
}

struct CrbArgs {
  std::string input = "1,2,3", grid = "100x100", range, benchmark = "none", out;
  int photons = 0;
  double visibility = -1.0;
};

void run_crb(const DeviceConfig& cfg, const CrbArgs& a) {
  const FockState input = parse_input(a.input);
  check_photons(a.photons, input);
  const DistinguishabilityModel model = model_for(cfg, a.visibility);
  const Mat3 ua = tritter(cfg.tritter_a());
  const Mat3 ub = tritter(cfg.tritter_b());

  GridSpec gs;
  parse_grid(a.grid, gs.n1, gs.n2);
  if (!a.range.empty()) {
    const auto r = parse_doubles(a.range, 4, "--range");
    gs.lo1 = r[0];
    gs.hi1 = r[1];
    gs.lo2 = r[2];
    gs.hi2 = r[3];
  }
  Benchmark bm = Benchmark::None;
  if (a.benchmark == "sim")
    bm = Benchmark::Simultaneous;
  else if (a.benchmark == "sep")
    bm = Benchmark::Separate;
  else if (a.benchmark != "none")
    throw std::invalid_argument("--benchmark must be sim, sep or none");

  const CrbMap map = crb_map(ua, ub, input, model, gs, bm);

  with_output(a.out, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"dphi1", "dphi2", "tr_inv", "singular", "beats_benchmark"});
    for (int i = 0; i < gs.n1; ++i)
      for (int j = 0; j < gs.n2; ++j)
        w.row({format_double(gs.x1(i)), format_double(gs.x2(j)),
               format_double(map.values(i, j)),
               std::to_string(static_cast<int>(map.singular(i, j))),
               bm == Benchmark::None ? std::string()
                                     : std::to_string(static_cast<int>(map.beats(i, j)))});
  });

  std::cerr << "min Tr(I^-1) = " << format_double(map.min_value) << " at (dphi1, dphi2) = ("
            << format_double(map.argmin[0]) << ", " << format_double(map.argmin[1])
            << ")\n";
  if (bm != Benchmark::None)
    std::cerr << "benchmark Tr(H^-1) = " << format_double(map.benchmark_trace) << "; "
              << map.beat_count << " of " << static_cast<long>(gs.n1) * gs.n2
              << " grid points beat it\n";
}

struct MleArgs {
  std::string phases, input = "2,3", sweep, out;
  long events = 0;
  int reps = 100;
  std::uint64_t seed = 1;
  double visibility = -1.0;
};

void run_mle(const DeviceConfig& cfg, const MleArgs& a) {
  if (a.phases.empty()) throw std::invalid_argument("--phases is required for mle");
  const auto p = parse_doubles(a.phases, 2, "--phases");
  const Vec2 truth(p[0], p[1]);
  const FockState input = parse_input(a.input);
  const DistinguishabilityModel model = model_for(cfg, a.visibility);
  const Mat3 ua = tritter(cfg.tritter_a());
  const Mat3 ub = tritter(cfg.tritter_b());

  std::vector<long> ms;
  if (!a.sweep.empty()) {
    for (const double v : parse_doubles(a.sweep, 0, "--sweep")) ms.push_back(static_cast<long>(v));
  } else if (a.events > 0) {
    ms.push_back(a.events);
  } else {
    ms = {50, 100, 200, 400, 800, 1230};
  }

  const auto rows = variance_experiment(ua, ub, input, model, truth, ms, a.reps, a.seed);
  with_output(a.out, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"m", "mse1", "mse2", "total", "crb_over_m", "hsim_over_m", "hsep_over_m"});
    for (const auto& r : rows)
      w.row({std::to_string(r.m), format_double(r.mse1), format_double(r.mse2),
             format_double(r.total), format_double(r.crb_over_m),
             format_double(r.hsim_over_m), format_double(r.hsep_over_m)});
  });
}

struct CharacterizeArgs {
  std::string protocol = "internal", noise = "2000", out, scan_csv;
  std::uint64_t seed = 1;
};

void run_characterize(const DeviceConfig& cfg, const CharacterizeArgs& a) {
  long counts = 0;
  if (a.noise != "none") {
    try {
      counts = std::stol(a.noise);
    } catch (const std::exception&) {
      throw std::invalid_argument("--noise must be a count or 'none'");
    }
    if (counts < 1) throw std::invalid_argument("--noise count must be >= 1 (or 'none')");
  }

  ScanProtocol proto;
  if (a.protocol == "internal")
    proto = ScanProtocol::InternalResistors;
  else if (a.protocol == "tritter")
    proto = ScanProtocol::TritterResistors;
  else
    throw std::invalid_argument("--protocol must be internal or tritter");

  const ScanDataset scan = generate_scan(cfg, proto, counts, a.seed);
  if (!a.scan_csv.empty())
    with_output(a.scan_csv, [&](std::ostream& os) { save_scan_csv(scan, os); });

  FitResult fr;
  std::vector<std::string> names;
  RVec truth;
  DeviceConfig fitted = cfg;
  if (proto == ScanProtocol::InternalResistors) {
    fr = fit_device_blind(scan);
    truth = canonicalize_parameters(pack_parameters(cfg));
    for (const char* n : parameter_names()) names.emplace_back(n);
    unpack_parameters(fr.parameters, fitted);
  } else {
    fr = fit_tritter_resistors(scan, cfg);
    truth.resize(6);
    truth << cfg.phi0TA, cfg.phi0TB, cfg.alphaTA, cfg.alphaTB, cfg.alphaNL_TA,
        cfg.alphaNL_TB;
    names = {"phi0TA", "phi0TB", "alphaTA", "alphaTB", "alpha_nl_TA", "alpha_nl_TB"};
    fitted.phi0TA = fr.parameters[0];
    fitted.phi0TB = fr.parameters[1];
    fitted.alphaTA = fr.parameters[2];
    fitted.alphaTB = fr.parameters[3];
    fitted.alphaNL_TA = fr.parameters[4];
    fitted.alphaNL_TB = fr.parameters[5];
  }

  for (int k = 0; k < fr.parameters.size(); ++k)
    std::cout << names[k] << " = " << format_double(fr.parameters[k]) << " +- "
              << format_double(fr.std_errors[k]) << "\n";
  const double dmax = (fr.parameters - truth).cwiseAbs().maxCoeff();
  std::cout << "chi2 = " << format_double(fr.chi2) << " over " << fr.n_points
            << " points (" << fr.n_params << " parameters), chi2/nu = "
            << format_double(fr.chi2_per_dof()) << "\n"
            << "max |delta param| vs truth = " << format_double(dmax) << "\n"
            << "converged: " << (fr.converged ? "yes" : "no") << " ("
            << fr.iterations << " iterations)\n";
  if (!a.out.empty()) save_config(fitted, a.out);
}

void run_tritter_set(const DeviceConfig& cfg) {
  const TritterSettingReport rep = tritter_setting(cfg);
  std::cout << "branch: " << (rep.branch > 0 ? "+1" : "-1")
            << " (internal phases near " << (rep.branch > 0 ? "+" : "-")
            << "(2pi/3, pi/3), tritter phases near " << (rep.branch > 0 ? "+" : "-")
            << "pi/2)\n";
  std::cout << "step 1: P(3->3) = " << format_double(rep.step1_residual)
            << " at P_R1 = " << format_double(rep.step1_powers[0]) << " W, P_R2 = "
            << format_double(rep.step1_powers[1]) << " W (V_R1 = "
            << format_double(rep.step1_voltages[0]) << " V, V_R2 = "
            << format_double(rep.step1_voltages[1]) << " V)\n"
            << "        achieved (dphi1, dphi2) = ("
            << format_double(rep.step1_phases[0]) << ", "
            << format_double(rep.step1_phases[1]) << ") rad\n";
  std::cout << "step 2: P(3->1) = " << format_double(rep.step2_residual)
            << " at P_RTB = " << format_double(rep.step2_power) << " W (V_RTB = "
            << format_double(rep.step2_voltage) << " V), phiTB = "
            << format_double(rep.phi_tb) << " rad\n";
  std::cout << "step 3: P(1->1) = " << format_double(rep.step3_residual)
            << " at P_RTA = " << format_double(rep.step3_power) << " W (V_RTA = "
            << format_double(rep.step3_voltage) << " V), phiTA = "
            << format_double(rep.phi_ta) << " rad\n";
  std::cout << "fidelity A vs balanced tritter: " << format_double(rep.fidelity_a, 6)
            << "\nfidelity B vs balanced tritter: " << format_double(rep.fidelity_b, 6)
            << "\n(recorded for the bundled reference device: 0.9830 / 0.9863)\n";
  const double worst = std::max(
      {rep.step1_residual, rep.step2_residual, rep.step3_residual});
  if (worst > 0.05)
    std::cout << "warning: residual " << format_double(worst)
              << " above 0.05; a dark port was not fully nulled\n";
}

void run_identity(const DeviceConfig& cfg, int starts, std::uint64_t seed) {
  const IdentityResult res = identity_configuration(cfg, starts, seed);
  std::cout << "similarity S = " << format_double(res.similarity, 6) << "\n"
            << "phiTA = " << format_double(res.phi_ta) << ", phiTB = "
            << format_double(res.phi_tb) << ", dphi1 = " << format_double(res.dphi1)
            << ", dphi2 = " << format_double(res.dphi2) << " (rad)\n"
            << "converged: " << (res.converged ? "yes" : "no") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "triphase: simulation and estimation toolkit for a reconfigurable "
      "three-mode two-phase interferometer"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "Device configuration JSON (default: $TRIPHASE_CONFIG, else the "
                 "bundled reference device)");

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Output probabilities over a phase scan");
  c_sim->add_option("--input", sim.input, "Input modes, e.g. 3 or 2,3 (default 3)");
  c_sim->add_option("--photons", sim.photons, "Photon number (checked against --input)");
  CLI::Option* o_phases =
      c_sim->add_option("--phases", sim.phases, "Single point dphi1,dphi2 (rad)");
  CLI::Option* o_grid = c_sim->add_option("--grid", sim.grid, "Grid NxM (default 30x30)");
  o_phases->excludes(o_grid);
  c_sim->add_option("--range", sim.range,
                    "Grid range lo1,hi1,lo2,hi2 (default 0,2pi,0,2pi)");
  c_sim->add_option("--visibility", sim.visibility, "Override the config visibility");
  c_sim->add_option("--out", sim.out, "CSV output path (default stdout)");

  CrbArgs crb;
  CLI::App* c_crb = app.add_subcommand("crb", "Map of the Cramer-Rao bound Tr(I^-1)");
  c_crb->add_option("--input", crb.input, "Input modes (default 1,2,3)");
  c_crb->add_option("--photons", crb.photons, "Photon number (checked against --input)");
  c_crb->add_option("--grid", crb.grid, "Grid NxM (default 100x100)");
  c_crb->add_option("--range", crb.range, "Grid range lo1,hi1,lo2,hi2");
  c_crb->add_option("--benchmark", crb.benchmark, "Classical benchmark mask: sim, sep, none");
  c_crb->add_option("--visibility", crb.visibility, "Override the config visibility");
  c_crb->add_option("--out", crb.out, "CSV output path (default stdout)");

  MleArgs mle;
  CLI::App* c_mle = app.add_subcommand("mle", "Monte Carlo maximum-likelihood estimation");
  c_mle->add_option("--phases", mle.phases, "True phases dphi1,dphi2 (rad)")->required();
  c_mle->add_option("--input", mle.input, "Input modes (default 2,3)");
  CLI::Option* o_events = c_mle->add_option("--events", mle.events, "Events per repetition");
  CLI::Option* o_sweep =
      c_mle->add_option("--sweep", mle.sweep, "Comma-separated list of event counts");
  o_events->excludes(o_sweep);
  c_mle->add_option("--reps", mle.reps, "Repetitions per event count (default 100)");
  c_mle->add_option("--seed", mle.seed, "Random seed (default 1)");
  c_mle->add_option("--visibility", mle.visibility, "Override the config visibility");
  c_mle->add_option("--out", mle.out, "CSV output path (default stdout)");

  CharacterizeArgs chr;
  CLI::App* c_chr = app.add_subcommand(
      "characterize", "Synthetic scan of the config-as-truth device, then refit");
  c_chr->add_option("--protocol", chr.protocol, "Scan protocol: internal or tritter");
  c_chr->add_option("--noise", chr.noise, "Counts per point, or 'none' (default 2000)");
  c_chr->add_option("--seed", chr.seed, "Random seed (default 1)");
  c_chr->add_option("--out", chr.out, "Write the fitted device config JSON here");
  c_chr->add_option("--scan-csv", chr.scan_csv, "Write the generated scan CSV here");

  CLI::App* c_set = app.add_subcommand("tritter-set", "Balanced-tritter setting procedure");
  int id_starts = 48;
  std::uint64_t id_seed = 1;
  CLI::App* c_id = app.add_subcommand("identity", "Identity-configuration search");
  c_id->add_option("--starts", id_starts, "Random restarts (default 48)");
  c_id->add_option("--seed", id_seed, "Random seed (default 1)");

  std::string cfg_out;
  CLI::App* c_cfg = app.add_subcommand("config", "Print the active config canonically");
  c_cfg->add_option("--out", cfg_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const DeviceConfig cfg = resolve_config(config_path);
    if (c_sim->parsed()) run_simulate(cfg, sim);
    if (c_crb->parsed()) run_crb(cfg, crb);
    if (c_mle->parsed()) run_mle(cfg, mle);
    if (c_chr->parsed()) run_characterize(cfg, chr);
    if (c_set->parsed()) run_tritter_set(cfg);
    if (c_id->parsed()) run_identity(cfg, id_starts, id_seed);
    if (c_cfg->parsed())
      with_output(cfg_out, [&](std::ostream& os) { os << config_to_string(cfg); });
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
