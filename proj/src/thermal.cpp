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

#include "triphase/thermal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace triphase {

double dissipated_power(double volts, double ohms) {
  if (ohms <= 0.0) throw std::domain_error("resistance must be positive");
  if (volts < 0.0) throw std::domain_error("voltage must be nonnegative");
  return volts * volts / ohms;
}

PhaseState phases_from_powers(const ResistorBank& bank,
                              const std::array<double, 6>& powers_w) {
  PhaseState st;
  st.dphi1 = bank.dphi10;
  st.dphi2 = bank.dphi20;
  for (int i = 0; i < 4; ++i) {
    const double p = powers_w[static_cast<std::size_t>(i)];
    st.dphi1 += bank.alpha_lin(0, i) * p + bank.alpha_nl(0, i) * p * p;
    st.dphi2 += bank.alpha_lin(1, i) * p + bank.alpha_nl(1, i) * p * p;
  }
  st.phi_ta = bank.phi0_ta + bank.alpha_t_lin[0] * powers_w[4] +
              bank.alpha_t_nl[0] * powers_w[4] * powers_w[4];
  st.phi_tb = bank.phi0_tb + bank.alpha_t_lin[1] * powers_w[5] +
              bank.alpha_t_nl[1] * powers_w[5] * powers_w[5];
  return st;
}

namespace {

struct NewtonOutcome {
  Vec2 p = Vec2::Zero();
  Vec2 phases = Vec2::Zero();
  bool ok = false;
  int iterations = 0;
};

// Internal phases produced by powers on the two active resistors only.
Vec2 internal_phases(const ResistorBank& bank, std::pair<int, int> act, const Vec2& p) {
  Vec2 out{bank.dphi10, bank.dphi20};
  const int idx[2] = {act.first, act.second};
  for (int k = 0; k < 2; ++k) {
    const double pw = p[k];
    out[0] += bank.alpha_lin(0, idx[k]) * pw + bank.alpha_nl(0, idx[k]) * pw * pw;
    out[1] += bank.alpha_lin(1, idx[k]) * pw + bank.alpha_nl(1, idx[k]) * pw * pw;
  }
  return out;
}

NewtonOutcome damped_newton(const ResistorBank& bank, std::pair<int, int> act,
                            const Vec2& target, double p_max) {
  const int idx[2] = {act.first, act.second};
  Mat2 lin;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) lin(j, k) = bank.alpha_lin(j, idx[k]);

  NewtonOutcome out;
  // Linearized starting point, clamped into the feasible box.
  Vec2 p = lin.fullPivLu().solve(target - Vec2{bank.dphi10, bank.dphi20});
  for (int k = 0; k < 2; ++k) p[k] = std::min(std::max(p[k], 0.0), p_max);

  Vec2 f = internal_phases(bank, act, p) - target;
  for (int it = 0; it < 50; ++it) {
    out.iterations = it + 1;
    if (f.cwiseAbs().maxCoeff() < 1e-12) {
      out.ok = true;
      break;
    }
    Mat2 jac;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        jac(j, k) = bank.alpha_lin(j, idx[k]) + 2.0 * bank.alpha_nl(j, idx[k]) * p[k];
    const Vec2 step = jac.fullPivLu().solve(-f);
    double damp = 1.0;
    for (int half = 0; half < 25; ++half, damp *= 0.5) {
      const Vec2 p_try = p + damp * step;
      const Vec2 f_try = internal_phases(bank, act, p_try) - target;
      if (f_try.norm() < f.norm()) {
        p = p_try;
        f = f_try;
        break;
      }
    }
  }
  out.p = p;
  out.phases = internal_phases(bank, act, p);
  out.ok = out.ok && p.minCoeff() > -1e-9 && p.maxCoeff() < p_max + 1e-9;
  return out;
}

}  // namespace

PowerSolution powers_for_target_phases(const ResistorBank& bank, const Vec2& target,
                                       std::pair<int, int> active, double p_max) {
  if (active.first < 0 || active.first > 3 || active.second < 0 || active.second > 3 ||
      active.first == active.second)
    throw std::domain_error("active resistors must be two distinct indices in 0..3");

  bool found = false;
  NewtonOutcome best;
  double best_total = std::numeric_limits<double>::infinity();
  Vec2 nearest = Vec2{bank.dphi10, bank.dphi20};
  double nearest_miss = std::numeric_limits<double>::infinity();

  const double two_pi = 2.0 * kPi;
  for (int k1 = -2; k1 <= 2; ++k1) {
    for (int k2 = -2; k2 <= 2; ++k2) {
      const Vec2 shifted{target[0] + two_pi * k1, target[1] + two_pi * k2};
      NewtonOutcome cand = damped_newton(bank, active, shifted, p_max);
      const Vec2 clamped{std::min(std::max(cand.p[0], 0.0), p_max),
                         std::min(std::max(cand.p[1], 0.0), p_max)};
      const Vec2 ach = internal_phases(bank, active, clamped);
      const double miss = std::hypot(wrap_angle(ach[0] - target[0]),
                                     wrap_angle(ach[1] - target[1]));
      if (miss < nearest_miss) {
        nearest_miss = miss;
        nearest = ach;
      }
      if (cand.ok) {
        const double total = cand.p.sum();
        if (total < best_total) {
          best_total = total;
          best = cand;
          found = true;
        }
      }
    }
  }

  if (!found) {
    std::ostringstream msg;
    msg << "target phases unreachable with powers in [0, " << p_max
        << "] W; nearest achievable (" << nearest[0] << ", " << nearest[1] << ") rad";
    throw numerical_error(msg.str());
  }

  PowerSolution sol;
  sol.powers = Vec2{std::max(best.p[0], 0.0), std::max(best.p[1], 0.0)};
  sol.voltages =
      Vec2{std::sqrt(sol.powers[0] *
                     bank.resistance[static_cast<std::size_t>(active.first)]),
           std::sqrt(sol.powers[1] *
                     bank.resistance[static_cast<std::size_t>(active.second)])};
  sol.achieved = best.phases;
  sol.iterations = best.iterations;
  return sol;
}

double tritter_heater_phase(const ResistorBank& bank, int which, double power_w) {
  if (which != 0 && which != 1) throw std::domain_error("tritter heater index is 0 or 1");
  const double p0 = which == 0 ? bank.phi0_ta : bank.phi0_tb;
  return p0 + bank.alpha_t_lin[which] * power_w + bank.alpha_t_nl[which] * power_w * power_w;
}

double tritter_heater_power_for_phase(const ResistorBank& bank, int which,
                                      double target, double p_max) {
  if (which != 0 && which != 1) throw std::domain_error("tritter heater index is 0 or 1");
  const double p0 = which == 0 ? bank.phi0_ta : bank.phi0_tb;
  const double a = bank.alpha_t_nl[which];
  const double b = bank.alpha_t_lin[which];

  double best = std::numeric_limits<double>::infinity();
  for (int k = -3; k <= 3; ++k) {
    const double c = p0 - (target + 2.0 * kPi * k);
    double roots[2];
    int n_roots = 0;
    if (std::abs(a) < 1e-15) {
      if (std::abs(b) > 1e-15) roots[n_roots++] = -c / b;
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        roots[n_roots++] = (-b + s) / (2.0 * a);
        roots[n_roots++] = (-b - s) / (2.0 * a);
      }
    }
    for (int r = 0; r < n_roots; ++r)
      if (roots[r] >= -1e-12 && roots[r] <= p_max && roots[r] < best)
        best = std::max(roots[r], 0.0);
  }
  if (!std::isfinite(best))
    throw numerical_error("tritter phase target unreachable within the power budget");
  return best;
}

double transient_response(double p_before, double p_after, double tau, double t) {
  if (tau <= 0.0) throw std::domain_error("time constant must be positive");
  if (t < 0.0) throw std::domain_error("time must be nonnegative");
  return p_after + (p_before - p_after) * std::exp(-t / tau);
}

}  // namespace triphase
