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

#ifndef ORDPD_MODEL_HPP
#define ORDPD_MODEL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ordpd/link.hpp"

namespace ordpd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major so that X.row(i).transpose() binds to a contiguous VectorRef.
using DesignMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Probabilities at or below this value are treated as exact zeros wherever
/// they would be divided by or logged.
inline constexpr double kUnderflowThreshold = 1e-300;

/// Parameter of the cumulative-link model: m-1 strictly increasing cut-offs
/// followed by p slopes.  The sentinels gamma_0 = -inf and gamma_m = +inf are
/// implicit.  Packed layout everywhere is (gamma_1..gamma_{m-1}, beta_1..beta_p).
class Theta {
 public:
  Theta(Vector gamma, Vector beta);

  static Theta from_packed(const VectorRef& packed, int categories);

  const Vector& gamma() const { return gamma_; }
  const Vector& beta() const { return beta_; }
  int categories() const { return static_cast<int>(gamma_.size()) + 1; }
  int covariates() const { return static_cast<int>(beta_.size()); }
  int dim() const { return categories() - 1 + covariates(); }
  Vector packed() const;

 private:
  Vector gamma_;
  Vector beta_;
};

/// Fixed design X (n x p) and ordinal responses y_i in {1..m}.
class Dataset {
 public:
  /// categories <= 0 infers m as the largest observed response.
  Dataset(DesignMatrix x, std::vector<int> y, int categories = 0,
          std::vector<std::string> column_names = {});

  const DesignMatrix& x() const { return x_; }
  const std::vector<int>& y() const { return y_; }
  int n() const { return static_cast<int>(y_.size()); }
  int p() const { return static_cast<int>(x_.cols()); }
  int categories() const { return m_; }
  const std::vector<std::string>& column_names() const { return names_; }

  auto row(int i) const { return x_.row(i).transpose(); }

  /// Rows selected by index, in the given order.
  Dataset subset(const std::vector<int>& rows) const;
  /// Category counts, index 0 is category 1.
  std::vector<int> category_counts() const;

 private:
  DesignMatrix x_;
  std::vector<int> y_;
  int m_;
  std::vector<std::string> names_;
};

/// Link quantities at the m-1 cut-offs for one covariate vector, from which
/// probabilities and their first and second derivatives are assembled.
/// Boundary entries 0 and m of `dens`/`dens_deriv` are the sentinel zeros.
struct CutTerms {
  double eta = 0.0;
  Vector prob;        // m entries, category j at index j-1
  Vector dens;        // m+1 entries, f(gamma_s - eta) at index s
  Vector dens_deriv;  // m+1 entries, f'(gamma_s - eta) at index s

  CutTerms(const Theta& theta, const Link& link, const VectorRef& x);

  int categories() const { return static_cast<int>(prob.size()); }

  /// Gradient of p_j (j in 1..m) w.r.t. the packed parameter.
  Vector prob_gradient(int j, const VectorRef& x) const;
  /// Accumulates scale * grad p_j into out (avoids temporaries in hot loops).
  void add_prob_gradient(int j, const VectorRef& x, double scale,
                         Eigen::Ref<Vector> out) const;
  Matrix prob_hessian(int j, const VectorRef& x) const;
  void add_prob_hessian(int j, const VectorRef& x, double scale,
                        Eigen::Ref<Matrix> out) const;
};

Vector category_probs(const Theta& theta, const Link& link, const VectorRef& x);

/// Sum of log p_i(Y_i); throws DegenerateProbability if any observed-category
/// probability is at or below the underflow threshold.
double log_likelihood(const Theta& theta, const Link& link, const Dataset& data);

Vector prob_gradient(const Theta& theta, const Link& link, const VectorRef& x,
                     int j);

/// Likelihood score u_j = grad p_j / p_j.
Vector score(const Theta& theta, const Link& link, const VectorRef& x, int j);

Matrix prob_hessian(const Theta& theta, const Link& link, const VectorRef& x,
                    int j);

/// argmax_j p_j(x); ties go to the smaller category.
int most_probable_category(const Theta& theta, const Link& link, const VectorRef& x);

/// p_j at linear predictor t (j in 1..m), computed as in CutTerms.
double category_prob_at(const Theta& theta, const Link& link, double t, int j);

/// A_j(t) = (f(gamma_j - t) - f(gamma_{j-1} - t)) / (F(gamma_j - t) - F(gamma_{j-1} - t)),
/// j in 1..m, so that d ln p_j / d beta = -A_j(t) x.  When the denominator
/// underflows, the tail limit f'/f at the
/// nearer cut-off is returned.
double residual_factor(const Theta& theta, const Link& link, double t, int j);

/// p^a computed as exp(a ln p); 0^a = 0 for a > 0 and 1 for a = 0.
double power(double p, double a);

}  // namespace ordpd

#endif  // ORDPD_MODEL_HPP
