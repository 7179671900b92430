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


#include "ordpd/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "ordpd/errors.hpp"

namespace ordpd {

namespace {

// p^e for a possibly negative exponent; terms with an underflowed p carry a
// vanishing gradient and are dropped (0 * inf = 0).
double safe_power(double p, double e) {
  if (e < 0.0 && p <= kUnderflowThreshold) return 0.0;
  return power(p, e);
}

}  // namespace

Vector xi_hat(const Theta& theta, const Link& link, const VectorRef& x,
              double alpha) {
  const CutTerms t(theta, link, x);
  Vector xi = Vector::Zero(theta.dim());
  for (int j = 1; j <= t.categories(); ++j)
    t.add_prob_gradient(j, x, power(t.prob[j - 1], alpha), xi);
  return xi;
}

Matrix psi_hat_n(const Theta& theta, const Link& link, const Dataset& data,
                 double alpha) {
  const int q = theta.dim();
  Matrix psi = Matrix::Zero(q, q);
  Vector grad(q);
  for (int i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    const CutTerms t(theta, link, x);
    for (int j = 1; j <= t.categories(); ++j) {
      const double pj = t.prob[j - 1];
      t.add_prob_hessian(j, x, power(pj, alpha), psi);
      const double w = alpha * safe_power(pj, alpha - 1.0);
      if (w == 0.0) continue;
      grad.setZero();
      t.add_prob_gradient(j, x, 1.0, grad);
      psi.noalias() += w * grad * grad.transpose();
    }
    // (grad u + a u u^T) p^a = p^{a-1} hess p + (a-1) p^{a-2} grad p grad p^T
    const int y = data.y()[i];
    const double py = t.prob[y - 1];
    if (py <= kUnderflowThreshold)
      throw DegenerateProbability(
          fmt::format("observed-category probability underflows at row {}", i));
    t.add_prob_hessian(y, x, -power(py, alpha - 1.0), psi);
    grad.setZero();
    t.add_prob_gradient(y, x, 1.0, grad);
    psi.noalias() -= ((alpha - 1.0) * power(py, alpha - 2.0)) * grad * grad.transpose();
  }
  psi /= data.n();
  return 0.5 * (psi + psi.transpose());
}

Matrix omega_hat_n(const Theta& theta, const Link& link, const Dataset& data,
                   double alpha) {
  const int q = theta.dim();
  Matrix omega = Matrix::Zero(q, q);
  Vector grad(q);
  Vector xi(q);
  for (int i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    const CutTerms t(theta, link, x);
    xi.setZero();
    for (int j = 1; j <= t.categories(); ++j) {
      const double pj = t.prob[j - 1];
      grad.setZero();
      t.add_prob_gradient(j, x, 1.0, grad);
      xi += power(pj, alpha) * grad;
      // u u^T p^{1+2a} = grad p grad p^T p^{2a-1}
      omega.noalias() += safe_power(pj, 2.0 * alpha - 1.0) * grad * grad.transpose();
    }
    omega.noalias() -= xi * xi.transpose();
  }
  omega /= data.n();
  return 0.5 * (omega + omega.transpose());
}

Matrix psi_model_n(const Theta& theta, const Link& link, const Dataset& data,
                   double alpha) {
  const int q = theta.dim();
  Matrix psi = Matrix::Zero(q, q);
  Vector grad(q);
  for (int i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    const CutTerms t(theta, link, x);
    for (int j = 1; j <= t.categories(); ++j) {
      grad.setZero();
      t.add_prob_gradient(j, x, 1.0, grad);
      psi.noalias() += safe_power(t.prob[j - 1], alpha - 1.0) * grad * grad.transpose();
    }
  }
  psi /= data.n();
  return 0.5 * (psi + psi.transpose());
}

Matrix guarded_inverse(const Matrix& sym, double max_condition) {
  if (sym.rows() != sym.cols() || sym.rows() == 0)
    throw std::invalid_argument("guarded_inverse needs a non-empty square matrix");
  if (!sym.allFinite()) throw SingularPsi("matrix has non-finite entries");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector abs_ev = eig.eigenvalues().cwiseAbs();
  const double largest = abs_ev.maxCoeff();
  const double smallest = abs_ev.minCoeff();
  if (!(largest > 0.0) || !(smallest * max_condition >= largest))
    throw SingularPsi(fmt::format("condition number {:.3g} exceeds {:.3g}",
                                  smallest > 0.0 ? largest / smallest : INFINITY,
                                  max_condition));
  const Eigen::LDLT<Matrix> ldlt(sym);
  if (ldlt.info() != Eigen::Success) throw SingularPsi("LDLT factorisation failed");
  Matrix inv = ldlt.solve(Matrix::Identity(sym.rows(), sym.cols()));
  return 0.5 * (inv + inv.transpose());
}

Sandwich sandwich(const Theta& theta, const Link& link, const Dataset& data,
                  double alpha) {
  Sandwich s;
  s.n = data.n();
  s.psi_hat = psi_hat_n(theta, link, data, alpha);
  s.omega_hat = omega_hat_n(theta, link, data, alpha);
  const Matrix inv = guarded_inverse(s.psi_hat);
  s.cov = inv * s.omega_hat * inv / static_cast<double>(data.n());
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  s.se = s.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return s;
}

double efficiency(const Matrix& cov_mle, const Matrix& cov_alpha) {
  const double num = cov_mle.trace();
  const double den = cov_alpha.trace();
  if (!(num > 0.0) || !(den > 0.0))
    throw SingularPsi("efficiency needs covariance matrices with positive trace");
  return num / den;
}

}  // namespace ordpd
