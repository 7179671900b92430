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


#ifndef ORDPD_INFERENCE_HPP
#define ORDPD_INFERENCE_HPP

#include "ordpd/link.hpp"
#include "ordpd/model.hpp"

namespace ordpd {

/// Inversions refuse matrices whose condition number exceeds this.
inline constexpr double kMaxCondition = 1e12;

/// xi_i = sum_j u_j p_j^{1+a} = sum_j grad p_j p_j^a at one covariate vector.
Vector xi_hat(const Theta& theta, const Link& link, const VectorRef& x, double alpha);

/// Plug-in estimate of Psi_n(a): the observed responses replace the true
/// distributions,
///   (1/n) sum_i [ sum_j (grad u_j + (1+a) u_j u_j^T) p_j^{1+a}
///                 - (grad u_Y + a u_Y u_Y^T) p_Y^a ].
Matrix psi_hat_n(const Theta& theta, const Link& link, const Dataset& data,
                 double alpha);

/// Model-based Omega_n(a):
///   (1/n) sum_i [ sum_j u_j u_j^T p_j^{1+2a} - xi_i xi_i^T ].
Matrix omega_hat_n(const Theta& theta, const Link& link, const Dataset& data,
                   double alpha);

/// Psi_n(a) with the model itself as the true distribution,
///   (1/n) sum_i sum_j u_j u_j^T p_j^{1+a}.
/// Positive semidefinite by construction; used for influence functions.
Matrix psi_model_n(const Theta& theta, const Link& link, const Dataset& data,
                   double alpha);

/// Inverse of a symmetric matrix via LDL^T, throwing SingularPsi when the
/// eigenvalue-based condition number exceeds max_condition or the matrix is
/// not definite.
Matrix guarded_inverse(const Matrix& sym, double max_condition = kMaxCondition);

struct Sandwich {
  Matrix psi_hat;
  Matrix omega_hat;
  Matrix cov;  // Psi^{-1} Omega Psi^{-1} / n
  Vector se;   // sqrt(diag(cov))
  int n = 0;

  /// Sum of asymptotic standard deviations divided by sqrt(n); with cov
  /// already scaled by 1/n this is the sum of the standard errors.
  double total_se() const { return se.sum(); }
};

Sandwich sandwich(const Theta& theta, const Link& link, const Dataset& data,
                  double alpha);

/// tr(cov_mle) / tr(cov_alpha).
double efficiency(const Matrix& cov_mle, const Matrix& cov_alpha);

}  // namespace ordpd

#endif  // ORDPD_INFERENCE_HPP
