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

#include "triphase/characterization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>

#include "triphase/csv.hpp"
#include "triphase/optimize.hpp"
#include "triphase/rng.hpp"

namespace triphase {
namespace {

constexpr int kNParams = 26;

// Ideal-coupler head [T1A T2A T3A T1B T2B T3B phiTA phiTB] used as the fixed
// backbone of the per-resistor stage of the blind fit.
constexpr std::array<double, 8> kIdealHead = {
    0.5, 2.0 / 3.0, 0.5, 0.5, 2.0 / 3.0, 0.5, kPi / 2.0, kPi / 2.0};

// Tritters and their parameter gradients for a fixed head block.
struct HeadCache {
  Mat3 ua, ub;
  std::array<Mat3, 4> dua, dub;
};

HeadCache make_head_cache(const double* th) {
  HeadCache hc;
  tritter_with_grads({th[0], th[1], th[2], th[6]}, hc.ua, hc.dua);
  tritter_with_grads({th[3], th[4], th[5], th[7]}, hc.ub, hc.dub);
  return hc;
}

// Single-photon probability table P(out, in) = |U^B D U^A|^2 at internal
// phases (d1, d2), optionally with its derivatives with respect to the eight
// head parameters and the two phases.
struct PointEval {
  Eigen::Matrix3d p;
  std::array<Eigen::Matrix3d, 8> dhead;
  Eigen::Matrix3d dd1, dd2;
};

PointEval eval_point(const HeadCache& hc, double d1, double d2, bool grads) {
  const Complex e1 = std::polar(1.0, d1);
  const Complex e2 = std::polar(1.0, d2);
  Mat3 ubd = hc.ub;  // U^B . D
  ubd.col(0) *= e1;
  ubd.col(1) *= e2;
  const Mat3 u = ubd * hc.ua;

  PointEval pe;
  pe.p = u.cwiseAbs2();
  if (!grads) return pe;

  const Mat3 uc = u.conjugate();
  Mat3 dua_side = hc.ua;  // D . U^A
  dua_side.row(0) *= e1;
  dua_side.row(1) *= e2;
  for (int k = 0; k < 3; ++k) {
    pe.dhead[k] = 2.0 * uc.cwiseProduct(ubd * hc.dua[k]).real();
    pe.dhead[3 + k] = 2.0 * uc.cwiseProduct(hc.dub[k] * dua_side).real();
  }
  pe.dhead[6] = 2.0 * uc.cwiseProduct(ubd * hc.dua[3]).real();
  pe.dhead[7] = 2.0 * uc.cwiseProduct(hc.dub[3] * dua_side).real();

  // dU/dd_j is rank one: i e^{i d_j} ub.col(j) ua.row(j).
  const Mat3 g1 = (Complex(0.0, 1.0) * e1) * (hc.ub.col(0) * hc.ua.row(0));
  const Mat3 g2 = (Complex(0.0, 1.0) * e2) * (hc.ub.col(1) * hc.ua.row(1));
  pe.dd1 = 2.0 * uc.cwiseProduct(g1).real();
  pe.dd2 = 2.0 * uc.cwiseProduct(g2).real();
  return pe;
}

void check_internal_scan(const ScanDataset& scan, const char* who) {
  if (scan.protocol != ScanProtocol::InternalResistors || scan.n_resistors() != 4)
    throw std::invalid_argument(std::string(who) +
                                " expects a four-resistor internal scan");
  if (scan.powers.size() < 2)
    throw std::invalid_argument(std::string(who) + ": scan has too few power points");
}

// Weighted residuals and analytic Jacobian of the full 26-parameter model
// against an internal-resistor scan.  Row order: resistor, power point,
// output, input.
RVec internal_residual(const ScanDataset& scan, const RVec& th) {
  const int npts = static_cast<int>(scan.powers.size());
  RVec out(36 * npts);
  const HeadCache hc = make_head_cache(th.data());
  for (int r = 0; r < 4; ++r) {
    for (int pt = 0; pt < npts; ++pt) {
      const double pw = scan.powers[pt];
      const double d1 = th[8] + th[10 + r] * pw + th[18 + r] * pw * pw;
      const double d2 = th[9] + th[14 + r] * pw + th[22 + r] * pw * pw;
      const PointEval pe = eval_point(hc, d1, d2, false);
      const Eigen::Matrix3d& pr = scan.prob[r][pt];
      const Eigen::Matrix3d& sg = scan.sigma[r][pt];
      for (int o = 0; o < 3; ++o)
        for (int i = 0; i < 3; ++i)
          out[((r * npts + pt) * 3 + o) * 3 + i] = (pe.p(o, i) - pr(o, i)) / sg(o, i);
    }
  }
  return out;
}

RMat internal_jacobian(const ScanDataset& scan, const RVec& th) {
  const int npts = static_cast<int>(scan.powers.size());
  RMat jac = RMat::Zero(36 * npts, kNParams);
  const HeadCache hc = make_head_cache(th.data());
  for (int r = 0; r < 4; ++r) {
    for (int pt = 0; pt < npts; ++pt) {
      const double pw = scan.powers[pt];
      const double d1 = th[8] + th[10 + r] * pw + th[18 + r] * pw * pw;
      const double d2 = th[9] + th[14 + r] * pw + th[22 + r] * pw * pw;
      const PointEval pe = eval_point(hc, d1, d2, true);
      const Eigen::Matrix3d& sg = scan.sigma[r][pt];
      for (int o = 0; o < 3; ++o) {
        for (int i = 0; i < 3; ++i) {
          const long row = ((r * npts + pt) * 3 + o) * 3 + i;
          const double w = 1.0 / sg(o, i);
          for (int k = 0; k < 8; ++k) jac(row, k) = pe.dhead[k](o, i) * w;
          const double g1 = pe.dd1(o, i) * w;
          const double g2 = pe.dd2(o, i) * w;
          jac(row, 8) = g1;
          jac(row, 9) = g2;
          jac(row, 10 + r) = pw * g1;
          jac(row, 14 + r) = pw * g2;
          jac(row, 18 + r) = pw * pw * g1;
          jac(row, 22 + r) = pw * pw * g2;
        }
      }
    }
  }
  return jac;
}

FitResult pack_fit(const LmResult& lm, const RMat& jac_final, long n_rows,
                   bool canonical) {
  FitResult fr;
  fr.parameters = canonical ? canonicalize_parameters(lm.x) : lm.x;
  fr.chi2 = lm.chi2;
  fr.n_points = n_rows;
  fr.n_params = static_cast<int>(lm.x.size());
  fr.converged = lm.converged;
  fr.iterations = lm.iterations;

  // 1-sigma errors from the inverse of the weighted normal matrix; sign
  // flips of the canonicalization do not change them.
  const RMat normal = jac_final.transpose() * jac_final;
  Eigen::FullPivLU<RMat> lu(normal);
  if (lu.isInvertible()) {
    const RMat cov = lu.inverse();
    fr.std_errors = cov.diagonal().array().max(0.0).sqrt();
  } else {
    fr.std_errors =
        RVec::Constant(lm.x.size(), std::numeric_limits<double>::quiet_NaN());
  }
  return fr;
}

Vec2 wrap2(const Vec2& v) { return Vec2(wrap_angle(v[0]), wrap_angle(v[1])); }

// Independent fit of one resistor's curves around the ideal-coupler head:
// x = [dphi10, dphi20, alpha1, alpha2, alpha_nl1, alpha_nl2].
struct StageAFit {
  Vec2 d0 = Vec2::Zero();
  Eigen::Vector4d coeffs = Eigen::Vector4d::Zero();
  double chi2 = std::numeric_limits<double>::infinity();
};

StageAFit stage_a_fit(const ScanDataset& scan, int r, double a1_init, double a2_init) {
  const int npts = static_cast<int>(scan.powers.size());
  const HeadCache hc = make_head_cache(kIdealHead.data());

  const auto resid = [&scan, &hc, npts, r](const RVec& x) -> RVec {
    RVec out(9 * npts);
    for (int pt = 0; pt < npts; ++pt) {
      const double pw = scan.powers[pt];
      const double d1 = x[0] + x[2] * pw + x[4] * pw * pw;
      const double d2 = x[1] + x[3] * pw + x[5] * pw * pw;
      const PointEval pe = eval_point(hc, d1, d2, false);
      const Eigen::Matrix3d& pr = scan.prob[r][pt];
      const Eigen::Matrix3d& sg = scan.sigma[r][pt];
      for (int o = 0; o < 3; ++o)
        for (int i = 0; i < 3; ++i)
          out[(pt * 3 + o) * 3 + i] = (pe.p(o, i) - pr(o, i)) / sg(o, i);
    }
    return out;
  };
  const auto jac = [&scan, &hc, npts, r](const RVec& x) -> RMat {
    RMat out(9 * npts, 6);
    for (int pt = 0; pt < npts; ++pt) {
      const double pw = scan.powers[pt];
      const double d1 = x[0] + x[2] * pw + x[4] * pw * pw;
      const double d2 = x[1] + x[3] * pw + x[5] * pw * pw;
      const PointEval pe = eval_point(hc, d1, d2, true);
      const Eigen::Matrix3d& sg = scan.sigma[r][pt];
      for (int o = 0; o < 3; ++o) {
        for (int i = 0; i < 3; ++i) {
          const long row = (pt * 3 + o) * 3 + i;
          const double w = 1.0 / sg(o, i);
          const double g1 = pe.dd1(o, i) * w;
          const double g2 = pe.dd2(o, i) * w;
          out(row, 0) = g1;
          out(row, 1) = g2;
          out(row, 2) = pw * g1;
          out(row, 3) = pw * g2;
          out(row, 4) = pw * pw * g1;
          out(row, 5) = pw * pw * g2;
        }
      }
    }
    return out;
  };

  // Coarse sweep of the two static offsets, harmonic coefficients from the
  // Fourier seeds.
  struct Cell {
    double cost, d1, d2;
  };
  std::vector<Cell> cells;
  cells.reserve(256);
  RVec x0(6);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      const double d1 = -kPi + 2.0 * kPi * a / 16.0;
      const double d2 = -kPi + 2.0 * kPi * b / 16.0;
      x0 << d1, d2, a1_init, a2_init, 0.0, 0.0;
      cells.push_back({resid(x0).squaredNorm(), d1, d2});
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.cost < b.cost; });

  LmOptions lo;
  lo.max_iterations = 200;
  StageAFit best;
  for (int c = 0; c < 6 && c < static_cast<int>(cells.size()); ++c) {
    x0 << cells[c].d1, cells[c].d2, a1_init, a2_init, 0.0, 0.0;
    const LmResult lr = levenberg_marquardt(resid, jac, x0, lo);
    if (lr.chi2 < best.chi2) {
      best.chi2 = lr.chi2;
      best.d0 = Vec2(lr.x[0], lr.x[1]);
      best.coeffs = lr.x.segment(2, 4);
    }
  }
  return best;
}

}  // namespace

ScanDataset generate_scan(const DeviceConfig& truth, ScanProtocol protocol,
                          long counts_per_point, std::uint64_t seed, int n_points,
                          double p_max) {
  if (n_points < 2) throw std::domain_error("generate_scan needs at least two power points");
  if (p_max <= 0.0) throw std::domain_error("generate_scan: p_max must be positive");
  if (counts_per_point < 0)
    throw std::invalid_argument("generate_scan: counts_per_point must be >= 0");

  ScanDataset d;
  d.protocol = protocol;
  d.device = truth.device;
  d.counts_per_point = counts_per_point;
  d.powers.resize(n_points);
  for (int i = 0; i < n_points; ++i)
    d.powers[i] = p_max * static_cast<double>(i) / (n_points - 1);

  const int n_res = protocol == ScanProtocol::InternalResistors ? 4 : 2;
  d.prob.assign(n_res, std::vector<Eigen::Matrix3d>(n_points));
  d.sigma.assign(n_res, std::vector<Eigen::Matrix3d>(n_points));

  const Mat3 ua0 = tritter(truth.tritter_a());
  const Mat3 ub0 = tritter(truth.tritter_b());

  for (int r = 0; r < n_res; ++r) {
    for (int pt = 0; pt < n_points; ++pt) {
      const double pw = d.powers[pt];
      Mat3 u;
      if (protocol == ScanProtocol::InternalResistors) {
        const double d1 =
            truth.dphi10 + truth.alpha(0, r) * pw + truth.alpha_nl(0, r) * pw * pw;
        const double d2 =
            truth.dphi20 + truth.alpha(1, r) * pw + truth.alpha_nl(1, r) * pw * pw;
        u = interferometer(ua0, ub0, {d1, d2, 0.0});
      } else {
        const double pta =
            truth.phi0TA + (r == 0 ? truth.alphaTA * pw + truth.alphaNL_TA * pw * pw : 0.0);
        const double ptb =
            truth.phi0TB + (r == 1 ? truth.alphaTB * pw + truth.alphaNL_TB * pw * pw : 0.0);
        u = interferometer(tritter({truth.T1A, truth.T2A, truth.T3A, pta}),
                           tritter({truth.T1B, truth.T2B, truth.T3B, ptb}),
                           {truth.dphi10, truth.dphi20, 0.0});
      }
      const Eigen::Matrix3d pmodel = u.cwiseAbs2();
      Eigen::Matrix3d& pr = d.prob[r][pt];
      Eigen::Matrix3d& sg = d.sigma[r][pt];
      if (counts_per_point == 0) {
        pr = pmodel;
        sg.setConstant(1e-4);
      } else {
        const double n = static_cast<double>(counts_per_point);
        for (int in = 0; in < 3; ++in) {
          Rng rng = task_rng(seed, (static_cast<std::uint64_t>(r) * n_points + pt) * 3 + in);
          const std::vector<double> w = {pmodel(0, in), pmodel(1, in), pmodel(2, in)};
          const std::vector<long> k = multinomial(rng, counts_per_point, w);
          for (int o = 0; o < 3; ++o) {
            pr(o, in) = static_cast<double>(k[o]) / n;
            const double pt_s = (static_cast<double>(k[o]) + 0.5) / (n + 1.0);
            sg(o, in) = std::sqrt(pt_s * (1.0 - pt_s) / n);
          }
        }
      }
    }
  }
  return d;
}

void save_scan_csv(const ScanDataset& scan, std::ostream& os) {
  static const char* kInternalNames[4] = {"R1", "R2", "R3", "R4"};
  static const char* kTritterNames[2] = {"RTA", "RTB"};
  CsvWriter w(os);
  w.row({"input", "output", "resistor", "power_W", "probability", "std_err"});
  const int npts = static_cast<int>(scan.powers.size());
  for (int r = 0; r < scan.n_resistors(); ++r) {
    const char* label = scan.protocol == ScanProtocol::InternalResistors
                            ? kInternalNames[r]
                            : kTritterNames[r];
    for (int in = 0; in < 3; ++in)
      for (int o = 0; o < 3; ++o)
        for (int pt = 0; pt < npts; ++pt)
          w.row({std::to_string(in + 1), std::to_string(o + 1), label,
                 format_double(scan.powers[pt]), format_double(scan.prob[r][pt](o, in)),
                 format_double(scan.sigma[r][pt](o, in))});
  }
}

FourierInit fourier_init(const ScanDataset& scan) {
  const int n_res = scan.n_resistors();
  const int n = static_cast<int>(scan.powers.size());
  if (n_res == 0 || n < 4)
    throw std::invalid_argument("fourier_init needs a populated scan");
  const double dt = scan.powers[1] - scan.powers[0];
  const double span = scan.powers.back() - scan.powers.front();
  // Below one full oscillation over the span the frequency estimate carries
  // no information.
  const double f_min = 2.0 * kPi / span;
  const int pad = 16 * n;  // zero-padded length, for peak resolution
  const int nyq = pad / 2;

  FourierInit fi;
  fi.alpha0 = RMat::Zero(2, n_res);
  fi.low_confidence.setZero(2, n_res);

  std::vector<double> y(n), mag(nyq + 1);
  for (int r = 0; r < n_res; ++r) {
    std::vector<std::pair<double, double>> peaks;  // (frequency, peak magnitude)
    peaks.reserve(9);
    for (int in = 0; in < 3; ++in) {
      for (int o = 0; o < 3; ++o) {
        double mean = 0.0;
        for (int t = 0; t < n; ++t) {
          y[t] = scan.prob[r][t](o, in);
          mean += y[t];
        }
        mean /= n;
        for (int t = 0; t < n; ++t) y[t] -= mean;

        // Magnitude spectrum of the zero-padded curve (direct sum; only n
        // samples are nonzero).
        for (int k = 0; k <= nyq; ++k) {
          Complex acc(0.0, 0.0);
          for (int t = 0; t < n; ++t)
            acc += y[t] * std::polar(1.0, -2.0 * kPi * k * t / pad);
          mag[k] = std::abs(acc);
        }
        int kbest = 1;
        double vbest = -1.0;
        for (int k = 1; k <= nyq; ++k)
          if (mag[k] > vbest) {
            vbest = mag[k];
            kbest = k;
          }
        if (vbest <= 1e-9) {  // flat curve, no oscillation at all
          peaks.emplace_back(0.0, 0.0);
          continue;
        }
        double kk = kbest;
        if (kbest >= 1 && kbest < nyq) {
          const double a = mag[kbest - 1], b = mag[kbest], c = mag[kbest + 1];
          const double den = a - 2.0 * b + c;
          if (std::abs(den) > 0.0) kk += 0.5 * (a - c) / den;  // parabolic peak
        }
        peaks.emplace_back(2.0 * kPi * kk / (pad * dt), vbest);
      }
    }

    // Curves whose strongest spectral line sits far below the strongest
    // curve in the scan are dominated by counting noise, not by a harmonic;
    // drop them so their random peak bins cannot seed a cluster.  Genuinely
    // flat curves (zero magnitude) still vote for frequency zero.
    double vmax = 0.0;
    for (const auto& pk : peaks) vmax = std::max(vmax, pk.second);
    std::vector<double> freqs;
    freqs.reserve(peaks.size());
    for (const auto& pk : peaks) {
      if (pk.second <= 1e-9)
        freqs.push_back(0.0);
      else if (pk.second >= 0.05 * vmax)
        freqs.push_back(pk.first);
    }

    // Greedy clustering of the nine per-curve frequencies; the two largest
    // clusters are the two phase harmonics.
    std::sort(freqs.begin(), freqs.end());
    std::vector<std::pair<double, int>> clusters;  // (sum, count)
    for (const double f : freqs) {
      bool placed = false;
      for (auto& cl : clusters) {
        if (std::abs(cl.first / cl.second - f) < 2.5) {
          cl.first += f;
          cl.second += 1;
          placed = true;
          break;
        }
      }
      if (!placed) clusters.emplace_back(f, 1);
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
                       return a.second > b.second;
                     });
    // A real harmonic is shared by several curves; once any cluster has two
    // members, lone-frequency clusters are noise artefacts.
    if (!clusters.empty() && clusters[0].second >= 2)
      clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                    [](const std::pair<double, int>& cl) {
                                      return cl.second < 2;
                                    }),
                     clusters.end());
    const double c0 = clusters.empty() ? 0.0 : clusters[0].first / clusters[0].second;
    const double c1 =
        clusters.size() < 2 ? 0.0 : clusters[1].first / clusters[1].second;
    const double big = std::abs(c0) >= std::abs(c1) ? c0 : c1;
    const double small = std::abs(c0) >= std::abs(c1) ? c1 : c0;

    double row0, row1;
    if (scan.protocol == ScanProtocol::InternalResistors) {
      // R1/R2 heat the phases up, R3/R4 down; R2 couples mostly to the
      // second phase, the others to the first.
      const double sign = r >= 2 ? -1.0 : 1.0;
      if (r == 1) {
        row0 = sign * std::abs(small);
        row1 = sign * std::abs(big);
      } else {
        row0 = sign * std::abs(big);
        row1 = sign * std::abs(small);
      }
    } else {
      row0 = std::abs(big);
      row1 = std::abs(small);
    }
    if (std::abs(row0) < f_min) {
      row0 = 0.0;
      fi.low_confidence(0, r) = 1;
    }
    if (std::abs(row1) < f_min) {
      row1 = 0.0;
      fi.low_confidence(1, r) = 1;
    }
    fi.alpha0(0, r) = row0;
    fi.alpha0(1, r) = row1;
  }
  return fi;
}

RVec canonicalize_parameters(const RVec& theta) {
  if (theta.size() != kNParams)
    throw std::domain_error("canonicalize_parameters expects 26 entries");
  RVec th = theta;
  for (int k = 6; k < 10; ++k) th[k] = wrap_angle(th[k]);
  if (std::sin(th[6]) < 0.0) {
    for (int k = 6; k < 10; ++k) th[k] = wrap_angle(-th[k]);
    th.segment(10, 16) *= -1.0;
  }
  return th;
}

FitResult fit_device(const ScanDataset& scan, const RVec& init) {
  check_internal_scan(scan, "fit_device");
  if (init.size() != kNParams)
    throw std::domain_error("fit_device: init must have 26 entries");

  const ResidualFn resid = [&scan](const RVec& th) { return internal_residual(scan, th); };
  const JacobianFn jac = [&scan](const RVec& th) { return internal_jacobian(scan, th); };
  LmOptions lo;
  lo.max_iterations = 400;
  const LmResult lr = levenberg_marquardt(resid, jac, init, lo);
  return pack_fit(lr, jac(lr.x), 36 * static_cast<long>(scan.powers.size()), true);
}

FitResult fit_device_blind(const ScanDataset& scan) {
  check_internal_scan(scan, "fit_device_blind");
  const FourierInit fi = fourier_init(scan);

  std::array<StageAFit, 4> stage;
  for (int r = 0; r < 4; ++r)
    stage[r] = stage_a_fit(scan, r, fi.alpha0(0, r), fi.alpha0(1, r));

  const ResidualFn resid = [&scan](const RVec& th) { return internal_residual(scan, th); };
  const JacobianFn jac = [&scan](const RVec& th) { return internal_jacobian(scan, th); };

  // The per-resistor solutions each carry their own sign gauge; merge them
  // coherently on both global branches and keep the better joint fit.
  LmResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (const double gauge : {1.0, -1.0}) {
    const Vec2 d0ref = gauge * stage[0].d0;
    Vec2 acc = Vec2::Zero();
    std::array<Eigen::Vector4d, 4> cols;
    for (int r = 0; r < 4; ++r) {
      const double plus = wrap2(stage[r].d0 - d0ref).norm();
      const double minus = wrap2(-stage[r].d0 - d0ref).norm();
      const double s = plus <= minus ? 1.0 : -1.0;
      acc += wrap2(s * stage[r].d0 - d0ref);
      cols[r] = s * stage[r].coeffs;
    }
    const Vec2 d0 = wrap2(acc / 4.0 + d0ref);

    RVec th(kNParams);
    for (int k = 0; k < 8; ++k) th[k] = kIdealHead[k];
    th[6] *= gauge;
    th[7] *= gauge;
    th[8] = d0[0];
    th[9] = d0[1];
    for (int r = 0; r < 4; ++r) {
      th[10 + r] = cols[r][0];
      th[14 + r] = cols[r][1];
      th[18 + r] = cols[r][2];
      th[22 + r] = cols[r][3];
    }
    LmOptions lo;
    lo.max_iterations = 120;
    const LmResult lr = levenberg_marquardt(resid, jac, th, lo);
    if (lr.chi2 < best.chi2) best = lr;
  }

  LmOptions lo_fin;
  lo_fin.max_iterations = 400;
  lo_fin.ftol = 1e-14;
  lo_fin.xtol = 1e-14;
  const LmResult fin = levenberg_marquardt(resid, jac, best.x, lo_fin);
  return pack_fit(fin, jac(fin.x), 36 * static_cast<long>(scan.powers.size()), true);
}

FitResult fit_tritter_resistors(const ScanDataset& scan, const DeviceConfig& known) {
  if (scan.protocol != ScanProtocol::TritterResistors || scan.n_resistors() != 2)
    throw std::invalid_argument(
        "fit_tritter_resistors expects a two-resistor tritter scan");
  if (scan.powers.size() < 2)
    throw std::invalid_argument("fit_tritter_resistors: scan has too few power points");

  const int npts = static_cast<int>(scan.powers.size());
  const long n_rows = 18L * npts;
  const Complex e1 = std::polar(1.0, known.dphi10);
  const Complex e2 = std::polar(1.0, known.dphi20);

  // theta = [phi0TA phi0TB alphaTA alphaTB alphaNL_TA alphaNL_TB].
  const auto fill = [&](const RVec& th, bool grads, RVec* rout, RMat* jout) {
    for (int r = 0; r < 2; ++r) {
      for (int pt = 0; pt < npts; ++pt) {
        const double pw = scan.powers[pt];
        const double pta = th[0] + (r == 0 ? th[2] * pw + th[4] * pw * pw : 0.0);
        const double ptb = th[1] + (r == 1 ? th[3] * pw + th[5] * pw * pw : 0.0);
        Mat3 ua, ub;
        std::array<Mat3, 4> dua, dub;
        if (grads) {
          tritter_with_grads({known.T1A, known.T2A, known.T3A, pta}, ua, dua);
          tritter_with_grads({known.T1B, known.T2B, known.T3B, ptb}, ub, dub);
        } else {
          ua = tritter({known.T1A, known.T2A, known.T3A, pta});
          ub = tritter({known.T1B, known.T2B, known.T3B, ptb});
        }
        Mat3 ubd = ub;
        ubd.col(0) *= e1;
        ubd.col(1) *= e2;
        const Mat3 u = ubd * ua;
        const Eigen::Matrix3d p = u.cwiseAbs2();

        Eigen::Matrix3d dpa, dpb;
        if (grads) {
          const Mat3 uc = u.conjugate();
          Mat3 dua_side = ua;
          dua_side.row(0) *= e1;
          dua_side.row(1) *= e2;
          dpa = 2.0 * uc.cwiseProduct(ubd * dua[3]).real();
          dpb = 2.0 * uc.cwiseProduct(dub[3] * dua_side).real();
        }
        const Eigen::Matrix3d& pr = scan.prob[r][pt];
        const Eigen::Matrix3d& sg = scan.sigma[r][pt];
        for (int o = 0; o < 3; ++o) {
          for (int i = 0; i < 3; ++i) {
            const long row = ((r * npts + pt) * 3 + o) * 3 + i;
            const double w = 1.0 / sg(o, i);
            if (rout) (*rout)[row] = (p(o, i) - pr(o, i)) * w;
            if (jout) {
              const double ga = dpa(o, i) * w;
              const double gb = dpb(o, i) * w;
              (*jout)(row, 0) = ga;
              (*jout)(row, 1) = gb;
              (*jout)(row, 2) = r == 0 ? pw * ga : 0.0;
              (*jout)(row, 3) = r == 1 ? pw * gb : 0.0;
              (*jout)(row, 4) = r == 0 ? pw * pw * ga : 0.0;
              (*jout)(row, 5) = r == 1 ? pw * pw * gb : 0.0;
            }
          }
        }
      }
    }
  };
  const ResidualFn resid = [&fill, n_rows](const RVec& th) {
    RVec r(n_rows);
    fill(th, false, &r, nullptr);
    return r;
  };
  const JacobianFn jac = [&fill, n_rows](const RVec& th) {
    RMat j(n_rows, 6);
    fill(th, true, nullptr, &j);
    return j;
  };

  // Self-starting: oscillation magnitudes from the Fourier seeds (with a
  // bracketing fallback when the sweep is below the resolution limit), both
  // signs, and a coarse grid over the two static phases.
  const FourierInit fi = fourier_init(scan);
  const auto candidates = [](double f) {
    std::vector<double> m;
    if (f > 0.5)
      m = {f, -f};
    else
      m = {1.0, -1.0, 4.0, -4.0};
    return m;
  };
  const std::vector<double> mags_a = candidates(std::abs(fi.alpha0(0, 0)));
  const std::vector<double> mags_b = candidates(std::abs(fi.alpha0(0, 1)));

  struct Seed {
    double cost;
    RVec x;
  };
  std::vector<Seed> seeds;
  RVec x0(6);
  for (int ia = 0; ia < 8; ++ia) {
    const double p0a = -kPi + 2.0 * kPi * ia / 8.0;
    for (int ib = 0; ib < 8; ++ib) {
      const double p0b = -kPi + 2.0 * kPi * ib / 8.0;
      for (const double ma : mags_a) {
        for (const double mb : mags_b) {
          x0 << p0a, p0b, ma, mb, 0.0, 0.0;
          seeds.push_back({resid(x0).squaredNorm(), x0});
        }
      }
    }
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const Seed& a, const Seed& b) { return a.cost < b.cost; });

  LmResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 8 && s < static_cast<int>(seeds.size()); ++s) {
    const LmResult lr = levenberg_marquardt(resid, jac, seeds[s].x, {});
    if (lr.chi2 < best.chi2) best = lr;
  }
  return pack_fit(best, jac(best.x), n_rows, false);
}

TritterSettingReport tritter_setting(const DeviceConfig& config, double p_max) {
  if (p_max <= 0.0) throw std::domain_error("tritter_setting: p_max must be positive");
  const ResistorBank bank = make_resistor_bank(config);

  const auto device_at = [&](const std::array<double, 6>& powers) {
    const PhaseState st = phases_from_powers(bank, powers);
    const Mat3 ua = tritter({config.T1A, config.T2A, config.T3A, st.phi_ta});
    const Mat3 ub = tritter({config.T1B, config.T2B, config.T3B, st.phi_tb});
    return interferometer(ua, ub, {st.dphi1, st.dphi2, 0.0});
  };

  TritterSettingReport rep;

  // Step 1: dark 3 -> 3 port over the two internal heaters.  The objective
  // does not depend on the tritter phases, so these stay unpowered.
  const auto f1 = [&](double p1, double p2) {
    return std::norm(device_at({p1, p2, 0.0, 0.0, 0.0, 0.0})(2, 2));
  };
  const int g = 32;
  std::vector<double> vals(g * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      vals[i * g + j] = f1(p_max * i / (g - 1), p_max * j / (g - 1));
  const int arg = static_cast<int>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  const double vmin = vals[arg];
  // The phase branches repeat every 2pi, so several basins host equivalent
  // zeros, and the coarse grid cannot rank their sharp bottoms.  Polish every
  // low-lying cell, cheapest (lowest total power) first, and keep the best
  // result, breaking value ties toward the lowest-power branch.
  std::vector<int> cand;
  for (int i = 0; i < g * g; ++i)
    if (vals[i] <= vmin + 0.05) cand.push_back(i);
  std::stable_sort(cand.begin(), cand.end(),
                   [&](int a, int b) { return a / g + a % g < b / g + b % g; });
  if (cand.size() > 12) cand.resize(12);
  if (std::find(cand.begin(), cand.end(), arg) == cand.end()) cand.push_back(arg);
  const auto polish1 = [&](int cell) {
    const auto fn = [&](const RVec& x) {
      if (x[0] < 0.0 || x[0] > p_max || x[1] < 0.0 || x[1] > p_max) return 1e9;
      return f1(x[0], x[1]);
    };
    NelderMeadOptions no;
    no.xtol = 1e-10;
    no.ftol = 1e-15;
    no.max_iterations = 2000;
    no.initial_step = p_max / 32.0;
    RVec x0(2);
    x0 << p_max * (cell / g) / (g - 1), p_max * (cell % g) / (g - 1);
    return nelder_mead(fn, x0, no);
  };
  NelderMeadResult s1 = polish1(cand[0]);
  for (std::size_t ci = 1; ci < cand.size(); ++ci) {
    const NelderMeadResult s1b = polish1(cand[ci]);
    const bool tie = std::abs(s1b.f - s1.f) <= 1e-9;
    if (s1b.f < s1.f - 1e-9 || (tie && s1b.x.sum() < s1.x.sum())) s1 = s1b;
  }
  const double kp1 = s1.x[0], kp2 = s1.x[1];
  rep.step1_powers = Vec2(kp1, kp2);
  rep.step1_voltages =
      Vec2(std::sqrt(kp1 * bank.resistance[0]), std::sqrt(kp2 * bank.resistance[1]));
  rep.step1_residual = s1.f;
  const PhaseState st1 = phases_from_powers(bank, {kp1, kp2, 0.0, 0.0, 0.0, 0.0});
  rep.step1_phases = Vec2(wrap_angle(st1.dphi1), wrap_angle(st1.dphi2));
  rep.branch = rep.step1_phases[0] >= 0.0 ? +1 : -1;

  // 1-D coarse scan plus golden-section refinement.
  const auto line_min = [&](const std::function<double(double)>& fn) {
    const int m = 200;
    int kb = 0;
    double vb = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      const double v = fn(p_max * k / (m - 1));
      if (v < vb) {
        vb = v;
        kb = k;
      }
    }
    const double lo = p_max * std::max(kb - 1, 0) / (m - 1);
    const double hi = p_max * std::min(kb + 1, m - 1) / (m - 1);
    return minimize_scalar(fn, lo, hi, 1e-12);
  };

  // Step 2: dark 3 -> 1 port over the second tritter heater.
  const auto f2 = [&](double p) {
    return std::norm(device_at({kp1, kp2, 0.0, 0.0, 0.0, p})(0, 2));
  };
  const double ptb = line_min(f2);
  rep.step2_power = ptb;
  rep.step2_voltage = std::sqrt(ptb * bank.resistance[5]);
  rep.step2_residual = f2(ptb);
  rep.phi_tb = wrap_angle(tritter_heater_phase(bank, 1, ptb));

  // Step 3: dark 1 -> 1 port over the first tritter heater.
  const auto f3 = [&](double p) {
    return std::norm(device_at({kp1, kp2, 0.0, 0.0, p, ptb})(0, 0));
  };
  const double pta = line_min(f3);
  rep.step3_power = pta;
  rep.step3_voltage = std::sqrt(pta * bank.resistance[4]);
  rep.step3_residual = f3(pta);
  rep.phi_ta = wrap_angle(tritter_heater_phase(bank, 0, pta));

  const double sa = std::sin(rep.phi_ta) >= 0.0 ? 1.0 : -1.0;
  const double sb = std::sin(rep.phi_tb) >= 0.0 ? 1.0 : -1.0;
  rep.fidelity_a =
      fidelity(tritter({config.T1A, config.T2A, config.T3A, rep.phi_ta}),
               tritter({0.5, 2.0 / 3.0, 0.5, sa * kPi / 2.0}));
  rep.fidelity_b =
      fidelity(tritter({config.T1B, config.T2B, config.T3B, rep.phi_tb}),
               tritter({0.5, 2.0 / 3.0, 0.5, sb * kPi / 2.0}));
  return rep;
}

SurfaceDataset generate_surface_scan(const DeviceConfig& truth, int photons, int grid_n,
                                     long counts_per_point, std::uint64_t seed) {
  if (photons < 1 || photons > 3)
    throw std::domain_error("generate_surface_scan: photons must be 1, 2 or 3");
  if (grid_n < 2) throw std::domain_error("generate_surface_scan: grid too small");
  if (counts_per_point < 0)
    throw std::invalid_argument("generate_surface_scan: counts_per_point must be >= 0");

  SurfaceDataset d;
  d.photons = photons;
  d.grid_n = grid_n;
  d.visibility = truth.visibility;
  d.counts_per_point = counts_per_point;
  if (photons == 1)
    d.inputs = {FockState::single(1), FockState::single(2), FockState::single(3)};
  else if (photons == 2)
    d.inputs = {FockState::from_modes({1, 2}), FockState::from_modes({1, 3}),
                FockState::from_modes({2, 3})};
  else
    d.inputs = {FockState::from_modes({1, 2, 3})};

  const Mat3 ua = tritter(truth.tritter_a());
  const Mat3 ub = tritter(truth.tritter_b());
  DistinguishabilityModel model;
  model.visibility = truth.visibility;

  for (std::size_t ii = 0; ii < d.inputs.size(); ++ii) {
    RMat block;
    for (int i = 0; i < grid_n; ++i) {
      for (int j = 0; j < grid_n; ++j) {
        const double d1 = 2.0 * kPi * i / grid_n;
        const double d2 = 2.0 * kPi * j / grid_n;
        const OutputDistribution dist =
            output_probs(interferometer(ua, ub, {d1, d2, 0.0}), d.inputs[ii], model);
        if (block.size() == 0)
          block.resize(static_cast<long>(grid_n) * grid_n, dist.p.size());
        const long row = static_cast<long>(i) * grid_n + j;
        if (counts_per_point == 0) {
          block.row(row) = dist.p.transpose();
        } else {
          Rng rng = task_rng(
              seed, (static_cast<std::uint64_t>(ii) * grid_n + i) * grid_n + j);
          const std::vector<double> w(dist.p.data(), dist.p.data() + dist.p.size());
          const std::vector<long> k = multinomial(rng, counts_per_point, w);
          for (long e = 0; e < dist.p.size(); ++e)
            block(row, e) =
                static_cast<double>(k[e]) / static_cast<double>(counts_per_point);
        }
      }
    }
    d.phat.push_back(std::move(block));
  }
  return d;
}

SurfaceReport verify_surfaces(const DeviceConfig& fitted, const SurfaceDataset& data) {
  if (data.inputs.empty() || data.phat.size() != data.inputs.size())
    throw std::invalid_argument("verify_surfaces: empty or inconsistent dataset");

  const Mat3 ua = tritter(fitted.tritter_a());
  const Mat3 ub = tritter(fitted.tritter_b());
  DistinguishabilityModel model;
  model.visibility = fitted.visibility;
  const int gn = data.grid_n;

  SurfaceReport rep;
  for (std::size_t ii = 0; ii < data.inputs.size(); ++ii) {
    RMat mod;
    for (int i = 0; i < gn; ++i) {
      for (int j = 0; j < gn; ++j) {
        const double d1 = 2.0 * kPi * i / gn;
        const double d2 = 2.0 * kPi * j / gn;
        const OutputDistribution dist =
            output_probs(interferometer(ua, ub, {d1, d2, 0.0}), data.inputs[ii], model);
        if (mod.size() == 0) mod.resize(static_cast<long>(gn) * gn, dist.p.size());
        mod.row(static_cast<long>(i) * gn + j) = dist.p.transpose();
      }
    }
    if (data.phat[ii].rows() != mod.rows() || data.phat[ii].cols() != mod.cols())
      throw std::invalid_argument("verify_surfaces: dataset shape mismatch");
    for (long e = 0; e < mod.cols(); ++e) {
      const RVec y = data.phat[ii].col(e);
      const double ss_res = (y - mod.col(e)).squaredNorm();
      const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
      double r2;
      if (ss_tot > 0.0)
        r2 = 1.0 - ss_res / ss_tot;
      else
        r2 = ss_res == 0.0 ? 1.0 : 0.0;
      rep.r2.push_back(r2);
    }
  }
  double acc = 0.0;
  for (const double v : rep.r2) acc += v;
  rep.mean_r2 = acc / static_cast<double>(rep.r2.size());
  return rep;
}

IdentityResult identity_configuration(const DeviceConfig& config, int starts,
                                      std::uint64_t seed) {
  if (starts < 0) throw std::domain_error("identity_configuration: starts must be >= 0");

  // x = (phiTA, phiTB, delta1, delta2); maximize the mean diagonal survival.
  const auto misfit = [&](const RVec& x) {
    const Mat3 ua = tritter({config.T1A, config.T2A, config.T3A, x[0]});
    const Mat3 ub = tritter({config.T1B, config.T2B, config.T3B, x[1]});
    const Mat3 u = interferometer(ua, ub, {x[2], x[3], 0.0});
    const double s =
        (std::norm(u(0, 0)) + std::norm(u(1, 1)) + std::norm(u(2, 2))) / 3.0;
    return 1.0 - s;
  };

  NelderMeadOptions no;
  no.xtol = 1e-11;
  no.ftol = 1e-14;
  no.max_iterations = 4000;
  no.initial_step = 0.35;

  // The ideal-coupler solution seeds the first start.
  RVec x0(4);
  x0 << kPi / 2.0, -kPi / 2.0, 0.0, kPi;
  NelderMeadResult best = nelder_mead(misfit, x0, no);
  Rng rng(seed);
  for (int s = 0; s < starts; ++s) {
    for (int k = 0; k < 4; ++k) x0[k] = -kPi + 2.0 * kPi * rng.uniform();
    const NelderMeadResult r = nelder_mead(misfit, x0, no);
    if (r.f < best.f) best = r;
  }

  IdentityResult res;
  res.phi_ta = wrap_angle(best.x[0]);
  res.phi_tb = wrap_angle(best.x[1]);
  res.dphi1 = wrap_angle(best.x[2]);
  res.dphi2 = wrap_angle(best.x[3]);
  res.similarity = 1.0 - best.f;
  res.converged = best.converged;
  return res;
}

}  // namespace triphase
