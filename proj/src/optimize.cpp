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

#include "triphase/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace triphase {

namespace {

double chi2_of(const RVec& r) {
  const double c = r.squaredNorm();
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                             RVec x0, const LmOptions& opts) {
  LmResult out;
  RVec x = std::move(x0);
  RVec r = residual(x);
  double chi2 = chi2_of(r);
  double lambda = opts.lambda0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it + 1;
    const RMat J = jacobian(x);
    const RMat A = J.transpose() * J;
    const RVec g = J.transpose() * r;

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      RMat Ad = A;
      for (int i = 0; i < Ad.rows(); ++i) {
        const double d = A(i, i);
        Ad(i, i) = d + lambda * (d > 0 ? d : 1.0);
      }
      const RVec step = Ad.ldlt().solve(-g);
      const RVec x_try = x + step;
      const RVec r_try = residual(x_try);
      const double chi2_try = chi2_of(r_try);
      if (chi2_try < chi2) {
        const double rel = (chi2 - chi2_try) / std::max(chi2, 1e-300);
        const double step_rel = step.norm() / (1.0 + x.norm());
        x = x_try;
        r = r_try;
        chi2 = chi2_try;
        lambda = std::max(lambda / 4.0, 1e-14);
        accepted = true;
        if (rel < opts.ftol || step_rel < opts.xtol) {
          out.x = x;
          out.chi2 = chi2;
          out.converged = true;
          return out;
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e14) break;
      }
    }
    if (!accepted) {
      // Damping exhausted: local minimum to working precision.
      out.x = x;
      out.chi2 = chi2;
      out.converged = true;
      return out;
    }
  }
  out.x = x;
  out.chi2 = chi2;
  out.converged = false;
  return out;
}

NelderMeadResult nelder_mead(const std::function<double(const RVec&)>& fn, RVec x0,
                             const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  std::vector<RVec> pts;
  std::vector<double> vals;
  pts.reserve(n + 1);
  pts.push_back(x0);
  for (int i = 0; i < n; ++i) {
    RVec p = x0;
    p[i] += opts.initial_step;
    pts.push_back(p);
  }
  for (const auto& p : pts) vals.push_back(fn(p));

  auto order = [&] {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<RVec> p2;
    std::vector<double> v2;
    for (int i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  NelderMeadResult out;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    order();
    double diam = 0.0;
    for (int i = 1; i <= n; ++i) diam = std::max(diam, (pts[i] - pts[0]).norm());
    if (diam < opts.xtol && std::abs(vals[n] - vals[0]) < opts.ftol) {
      out.converged = true;
      break;
    }

    RVec centroid = RVec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[i];
    centroid /= n;

    const RVec refl = centroid + (centroid - pts[n]);
    const double f_refl = fn(refl);
    if (f_refl < vals[0]) {
      const RVec exp_pt = centroid + 2.0 * (centroid - pts[n]);
      const double f_exp = fn(exp_pt);
      if (f_exp < f_refl) {
        pts[n] = exp_pt;
        vals[n] = f_exp;
      } else {
        pts[n] = refl;
        vals[n] = f_refl;
      }
    } else if (f_refl < vals[n - 1]) {
      pts[n] = refl;
      vals[n] = f_refl;
    } else {
      const RVec contr = centroid + 0.5 * (pts[n] - centroid);
      const double f_contr = fn(contr);
      if (f_contr < vals[n]) {
        pts[n] = contr;
        vals[n] = f_contr;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = fn(pts[i]);
        }
      }
    }
  }
  order();
  out.x = pts[0];
  out.f = vals[0];
  out.iterations = it;
  return out;
}

double minimize_scalar(const std::function<double(double)>& fn, double lo, double hi,
                       double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace triphase
