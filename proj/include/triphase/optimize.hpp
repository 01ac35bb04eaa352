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

#ifndef TRIPHASE_OPTIMIZE_HPP
#define TRIPHASE_OPTIMIZE_HPP

#include <functional>

#include "triphase/common.hpp"

namespace triphase {

// ---------------------------------------------------------------------------
// Levenberg-Marquardt for weighted least squares with an analytic Jacobian.
// ---------------------------------------------------------------------------

struct LmOptions {
  int max_iterations = 400;
  // Converged when the relative chi-square decrease over an accepted step
  // drops below ftol, or the step norm drops below xtol * (1 + |x|).
  double ftol = 1e-10;
  double xtol = 1e-12;
  double lambda0 = 1e-3;
};

struct LmResult {
  RVec x;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<RVec(const RVec&)>;
using JacobianFn = std::function<RMat(const RVec&)>;

// Classic Marquardt damping on the normal equations,
// (J^T J + lambda * diag(J^T J)) * step = -J^T r.
// A step producing a NaN/worse chi-square is rejected and lambda increased,
// which also keeps the iterate inside the model's validity region.
LmResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                             RVec x0, const LmOptions& opts = {});

// ---------------------------------------------------------------------------
// Derivative-free minimizers used for the small polish problems.
// ---------------------------------------------------------------------------

struct NelderMeadOptions {
  double xtol = 1e-9;    // simplex diameter
  double ftol = 1e-12;   // function value spread
  int max_iterations = 4000;
  double initial_step = 0.1;
};

struct NelderMeadResult {
  RVec x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const RVec&)>& fn, RVec x0,
                             const NelderMeadOptions& opts = {});

// Golden-section search for a scalar minimum on [lo, hi].
double minimize_scalar(const std::function<double(double)>& fn, double lo, double hi,
                       double tol = 1e-10);

}  // namespace triphase

#endif  // TRIPHASE_OPTIMIZE_HPP
