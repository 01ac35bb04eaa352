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

#include "triphase/estimation.hpp"

#include <cmath>
#include <limits>

#include "triphase/optimize.hpp"

namespace triphase {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kLogFloor = 1e-300;

double factorial_norm(const FockState& s) {
  double n = 1.0;
  for (int occ : s.occupation)
    for (int k = 2; k <= occ; ++k) n *= k;
  return n;
}

CMat submatrix(const Mat3& u, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMat s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u(rows[i], cols[j]);
  return s;
}

// Sum over rows of the permanent with that row replaced by the corresponding
// row of `repl` (the derivative of a row-multilinear function).
Complex permanent_row_derivative(const CMat& base, const CMat& repl) {
  const Eigen::Index n = base.rows();
  Complex total(0.0, 0.0);
  CMat work = base;
  for (Eigen::Index r = 0; r < n; ++r) {
    work.row(r) = repl.row(r);
    total += permanent(work);
    work.row(r) = base.row(r);
  }
  return total;
}

}  // namespace

ProbGradients prob_gradient(const Mat3& ua, const Mat3& ub, const PhaseVector& phases,
                            const FockState& input, const DistinguishabilityModel& model) {
  const Mat3 u = interferometer(ua, ub, phases);
  const double v = model.effective_visibility();

  // Rank-one phase derivatives dU/d(dphi_j) and the matching |U|^2 derivatives.
  Mat3 du[2];
  Eigen::Matrix3d db[2];
  const double enc[2] = {phases.dphi1 + phases.phi_ref, phases.dphi2 + phases.phi_ref};
  for (int j = 0; j < 2; ++j) {
    const Complex f = Complex(0.0, 1.0) * std::polar(1.0, enc[j]);
    for (int o = 0; o < 3; ++o)
      for (int i = 0; i < 3; ++i) du[j](o, i) = f * ub(o, j) * ua(j, i);
    db[j] = 2.0 * u.conjugate().cwiseProduct(du[j]).real();
  }

  ProbGradients out;
  out.dist = output_probs(u, input, model);
  const auto n_events = static_cast<Eigen::Index>(out.dist.events.size());
  out.grad.resize(n_events, 2);

  const std::vector<int> s = input.mode_list();
  const double in_norm = factorial_norm(input);
  for (Eigen::Index e = 0; e < n_events; ++e) {
    const FockState& ev = out.dist.events[static_cast<std::size_t>(e)];
    const std::vector<int> t = ev.mode_list();
    const double norm = in_norm * factorial_norm(ev);

    const CMat sub = submatrix(u, t, s);
    const Complex per = permanent(sub);
    const CMat sub_b = sub.cwiseAbs2().cast<Complex>();

    for (int j = 0; j < 2; ++j) {
      const CMat dsub = submatrix(du[j], t, s);
      const Complex dper = permanent_row_derivative(sub, dsub);
      const double dp_ind = 2.0 * (std::conj(per) * dper).real() / norm;

      CMat dsub_b(t.size(), s.size());
      for (std::size_t r = 0; r < t.size(); ++r)
        for (std::size_t c = 0; c < s.size(); ++c)
          dsub_b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              db[j](t[r], s[c]);
      // The distinguishable part carries the output factorial only, matching
      // event_probability.
      const double dp_dist =
          permanent_row_derivative(sub_b, dsub_b).real() / factorial_norm(ev);

      out.grad(e, j) = v * dp_ind + (1.0 - v) * dp_dist;
    }
  }
  return out;
}

Mat2 fisher_matrix(const Mat3& ua, const Mat3& ub, const PhaseVector& phases,
                   const FockState& input, const DistinguishabilityModel& model) {
  const ProbGradients pg = prob_gradient(ua, ub, phases, input, model);
  Mat2 info = Mat2::Zero();
  for (Eigen::Index e = 0; e < pg.dist.p.size(); ++e) {
    const double p = pg.dist.p[e];
    if (p < kProbFloor) continue;
    const Vec2 g{pg.grad(e, 0), pg.grad(e, 1)};
    info += g * g.transpose() / p;
  }
  return info;
}

bool information_singular(const Mat2& info) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(info);
  const double lo = std::abs(es.eigenvalues()[0]);
  const double hi = std::abs(es.eigenvalues()[1]);
  const double big = std::max(lo, hi);
  const double small = std::min(lo, hi);
  if (small <= 0.0) return true;
  return big / small > 1e12;
}

double trace_inverse(const Mat2& info) {
  if (information_singular(info))
    throw numerical_error("information matrix is singular (condition number above 1e12)");
  return info.inverse().trace();
}

Mat2 qfim_pure(const Mat3& ua, const FockState& input, double visibility) {
  if (visibility < 1.0)
    throw std::invalid_argument(
        "qfim_pure requires fully indistinguishable photons (visibility = 1)");
  DistinguishabilityModel pure;
  const OutputDistribution d = output_probs(ua, input, pure);
  double n1 = 0.0, n2 = 0.0, n11 = 0.0, n22 = 0.0, n12 = 0.0;
  for (std::size_t e = 0; e < d.events.size(); ++e) {
    const double p = d.p[static_cast<Eigen::Index>(e)];
    const double o1 = d.events[e].occupation[0];
    const double o2 = d.events[e].occupation[1];
    n1 += p * o1;
    n2 += p * o2;
    n11 += p * o1 * o1;
    n22 += p * o2 * o2;
    n12 += p * o1 * o2;
  }
  Mat2 h;
  h << n11 - n1 * n1, n12 - n1 * n2, n12 - n1 * n2, n22 - n2 * n2;
  return 4.0 * h;
}

Mat2 classical_benchmark(BenchmarkKind kind, int n_photons) {
  if (n_photons < 1) throw std::invalid_argument("photon number must be positive");
  if (kind == BenchmarkKind::Separate) {
    if (n_photons % 2 != 0)
      throw std::invalid_argument("separate estimation needs an even photon split");
    Mat2 h = Mat2::Zero();
    h(0, 0) = h(1, 1) = n_photons / 2.0;
    return h;
  }
  const double p = 1.0 - std::sqrt(2.0) / 2.0;
  Mat2 h1;
  h1 << p * (1.0 - p), -p * p, -p * p, p * (1.0 - p);
  return 4.0 * n_photons * h1;
}

Mat2 classical_benchmark_mode_probes(int n_photons, const Mat3& ua) {
  if (n_photons < 1) throw std::invalid_argument("photon number must be positive");
  double best = std::numeric_limits<double>::infinity();
  Mat2 h_best = Mat2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double p1 = std::norm(ua(0, i));
    const double p2 = std::norm(ua(1, i));
    Mat2 h;
    h << 4.0 * p1 * (1.0 - p1), -4.0 * p1 * p2, -4.0 * p1 * p2, 4.0 * p2 * (1.0 - p2);
    if (information_singular(h)) continue;
    const double t = h.inverse().trace();
    if (t < best) {
      best = t;
      h_best = h;
    }
  }
  if (!std::isfinite(best))
    throw numerical_error("no input mode yields a nonsingular single-photon information");
  return n_photons * h_best;
}

int positive_eigencount(const Mat2& a, const Mat2& b) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(a - b);
  int count = 0;
  for (int k = 0; k < 2; ++k)
    if (es.eigenvalues()[k] > 1e-10) ++count;
  return count;
}

CrbMap crb_map(const Mat3& ua, const Mat3& ub, const FockState& input,
               const DistinguishabilityModel& model, const GridSpec& grid,
               Benchmark benchmark) {
  if (grid.n1 < 1 || grid.n2 < 1) throw std::domain_error("grid must be nonempty");

  CrbMap map;
  map.grid = grid;
  map.values.resize(grid.n1, grid.n2);
  map.singular.setZero(grid.n1, grid.n2);
  map.beats.setZero(grid.n1, grid.n2);
  map.benchmark_trace = std::numeric_limits<double>::quiet_NaN();
  if (benchmark != Benchmark::None) {
    const BenchmarkKind kind = benchmark == Benchmark::Simultaneous
                                   ? BenchmarkKind::Simultaneous
                                   : BenchmarkKind::Separate;
    map.benchmark_trace = trace_inverse(classical_benchmark(kind, input.total()));
  }

  map.min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n1; ++i) {
    for (int j = 0; j < grid.n2; ++j) {
      const PhaseVector ph{grid.x1(i), grid.x2(j), 0.0};
      const Mat2 info = fisher_matrix(ua, ub, ph, input, model);
      if (information_singular(info)) {
        map.values(i, j) = std::numeric_limits<double>::quiet_NaN();
        map.singular(i, j) = 1;
        continue;
      }
      const double t = info.inverse().trace();
      map.values(i, j) = t;
      if (benchmark != Benchmark::None && t < map.benchmark_trace) {
        map.beats(i, j) = 1;
        ++map.beat_count;
      }
      if (t < map.min_value) {
        map.min_value = t;
        map.argmin = Vec2{ph.dphi1, ph.dphi2};
      }
    }
  }
  if (!std::isfinite(map.min_value))
    throw numerical_error("information matrix singular over the whole grid");
  return map;
}

std::vector<long> sample_events(const OutputDistribution& dist, long m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("event count must be at least 1");
  std::vector<double> w(dist.p.data(), dist.p.data() + dist.p.size());
  return multinomial(rng, m, w);
}

MleSolver::MleSolver(const Mat3& ua, const Mat3& ub, const FockState& input,
                     const DistinguishabilityModel& model, const Vec2& center,
                     double half_width, int grid_n)
    : ua_(ua),
      ub_(ub),
      input_(input),
      model_(model),
      center_(center),
      half_width_(half_width),
      grid_n_(grid_n) {
  if (half_width <= 0.0) throw std::domain_error("search half-width must be positive");
  if (grid_n < 2) throw std::domain_error("grid must have at least two points per axis");

  const Eigen::Index n_events =
      static_cast<Eigen::Index>(output_events(input.total()).size());
  logp_.resize(static_cast<Eigen::Index>(grid_n) * grid_n, n_events);
  for (int i1 = 0; i1 < grid_n; ++i1) {
    const double d1 = center[0] - half_width + 2.0 * half_width * i1 / (grid_n - 1);
    for (int i2 = 0; i2 < grid_n; ++i2) {
      const double d2 = center[1] - half_width + 2.0 * half_width * i2 / (grid_n - 1);
      const OutputDistribution d = distribution(Vec2{d1, d2});
      const Eigen::Index row = static_cast<Eigen::Index>(i1) * grid_n + i2;
      for (Eigen::Index e = 0; e < n_events; ++e)
        logp_(row, e) = std::log(std::max(d.p[e], kLogFloor));
    }
  }
}

OutputDistribution MleSolver::distribution(const Vec2& phases) const {
  const Mat3 u = interferometer(ua_, ub_, PhaseVector{phases[0], phases[1], 0.0});
  return output_probs(u, input_, model_);
}

Vec2 MleSolver::estimate(const std::vector<long>& counts) const {
  if (static_cast<Eigen::Index>(counts.size()) != logp_.cols())
    throw std::invalid_argument("count vector does not match the outcome set");
  long m = 0;
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("event counts must be nonnegative");
    m += c;
  }
  if (m < 1) throw std::invalid_argument("at least one event is required");

  RVec cv(logp_.cols());
  for (Eigen::Index e = 0; e < cv.size(); ++e)
    cv[e] = static_cast<double>(counts[static_cast<std::size_t>(e)]);
  const RVec ll = logp_ * cv;

  // Strict-max scan in row-major order keeps the lexicographically smallest
  // phase pair on ties.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ll.size(); ++i)
    if (ll[i] > ll[best]) best = i;
  if (ll[best] - ll.minCoeff() <= 1e-9 * std::max(1.0, std::abs(ll[best])))
    throw numerical_error("flat likelihood: the counts carry no phase information");

  const int i1 = static_cast<int>(best / grid_n_);
  const int i2 = static_cast<int>(best % grid_n_);
  RVec x0(2);
  x0[0] = center_[0] - half_width_ + 2.0 * half_width_ * i1 / (grid_n_ - 1);
  x0[1] = center_[1] - half_width_ + 2.0 * half_width_ * i2 / (grid_n_ - 1);

  const auto nll = [&](const RVec& x) {
    if (std::abs(x[0] - center_[0]) > half_width_ ||
        std::abs(x[1] - center_[1]) > half_width_)
      return 1e9;
    const OutputDistribution d = distribution(Vec2{x[0], x[1]});
    double s = 0.0;
    for (Eigen::Index e = 0; e < d.p.size(); ++e)
      s -= cv[e] * std::log(std::max(d.p[e], kLogFloor));
    return s;
  };
  NelderMeadOptions opts;
  opts.xtol = 1e-7;
  opts.ftol = 1e-12;
  opts.max_iterations = 600;
  opts.initial_step = 0.02;
  const NelderMeadResult r = nelder_mead(nll, x0, opts);
  return Vec2{r.x[0], r.x[1]};
}

EstimationResult mle_estimate(const std::vector<long>& counts, const Mat3& ua,
                              const Mat3& ub, const FockState& input,
                              const DistinguishabilityModel& model, const Vec2& center,
                              double half_width) {
  const MleSolver solver(ua, ub, input, model, center, half_width);
  EstimationResult res;
  res.estimate = solver.estimate(counts);
  for (long c : counts) res.m += c;

  const PhaseVector at{res.estimate[0], res.estimate[1], 0.0};
  const Mat2 info = fisher_matrix(ua, ub, at, input, model);
  if (information_singular(info)) {
    res.variances.setConstant(std::numeric_limits<double>::infinity());
  } else {
    const Mat2 inv = info.inverse();
    res.variances = Vec2{inv(0, 0), inv(1, 1)} / static_cast<double>(res.m);
  }
  res.total_variance = res.variances.sum();
  return res;
}

std::vector<VarianceRow> variance_experiment(const Mat3& ua, const Mat3& ub,
                                             const FockState& input,
                                             const DistinguishabilityModel& model,
                                             const Vec2& truth,
                                             const std::vector<long>& m_values,
                                             int repetitions, std::uint64_t seed) {
  if (repetitions < 2) throw std::invalid_argument("at least two repetitions required");

  const MleSolver solver(ua, ub, input, model, truth);
  const OutputDistribution p0 = solver.distribution(truth);
  const Mat2 info = fisher_matrix(ua, ub, PhaseVector{truth[0], truth[1], 0.0}, input, model);
  const double trinv = trace_inverse(info);

  const int n = input.total();
  const double hsim = trace_inverse(classical_benchmark(BenchmarkKind::Simultaneous, n));
  double hsep = std::numeric_limits<double>::quiet_NaN();
  if (n % 2 == 0)
    hsep = trace_inverse(classical_benchmark(BenchmarkKind::Separate, n));

  std::vector<VarianceRow> rows;
  rows.reserve(m_values.size());
  for (std::size_t im = 0; im < m_values.size(); ++im) {
    const long m = m_values[im];
    Vec2 acc = Vec2::Zero();
    for (int rep = 0; rep < repetitions; ++rep) {
      const std::uint64_t task =
          (static_cast<std::uint64_t>(im) << 32) | static_cast<std::uint64_t>(rep);
      Rng rng = task_rng(seed, task);
      const std::vector<long> counts = sample_events(p0, m, rng);
      const Vec2 est = solver.estimate(counts);
      acc += (est - truth).cwiseAbs2();
    }
    VarianceRow row;
    row.m = m;
    row.mse1 = acc[0] / repetitions;
    row.mse2 = acc[1] / repetitions;
    row.total = row.mse1 + row.mse2;
    row.crb_over_m = trinv / m;
    row.hsim_over_m = hsim / m;
    row.hsep_over_m = hsep / m;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace triphase
