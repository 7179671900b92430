/*
 *  Copyright 2026 The ordpd Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#ifndef ORDPD_OPTIMIZE_HPP
#define ORDPD_OPTIMIZE_HPP

#include <functional>
#include <string>
#include <vector>

#include "ordpd/model.hpp"

namespace ordpd {

// Unconstrained coordinates for ordered cut-offs:
//   gamma_1 = a_1,  gamma_j = gamma_{j-1} + exp(a_j)  (j >= 2),
// slopes are carried through unchanged.
Vector to_unconstrained(const Theta& theta);
Theta from_unconstrained(const VectorRef& a, int categories);
/// Maps a gradient w.r.t. the packed theta to one w.r.t. the unconstrained
/// coordinates a (chain rule through the cumulative exp map).
Vector unconstrained_gradient(const VectorRef& a, const VectorRef& grad_theta,
                              int categories);

struct OptimizerOptions {
  int max_iter = 500;
  double grad_tol = 1e-8;
};

struct OptimizerResult {
  Theta theta;
  double value = 0.0;
  /// Infinity norm of the gradient in the packed (gamma, beta) coordinates.
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status{};
  /// Objective at the start and after every accepted step.
  std::vector<double> trace{};
};

/// Returns f(theta) and writes grad f(theta) (packed coordinates).  May throw
/// ordpd::Error at infeasible points; trial points that throw are rejected.
using ObjectiveFn = std::function<double(const Theta&, Vector&)>;

/// Quasi-Newton (BFGS) minimisation in the unconstrained coordinates with a
/// backtracking Armijo line search, falling back to steepest descent with
/// step halving when the quasi-Newton direction cannot make progress.
/// Converged means the packed-gradient infinity norm is <= grad_tol.
OptimizerResult minimize_ordered(const ObjectiveFn& f, const Theta& start,
                                 const OptimizerOptions& options);

}  // namespace ordpd

#endif  // ORDPD_OPTIMIZE_HPP
