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

#include "ordpd/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ordpd/errors.hpp"

namespace ordpd {

Theta::Theta(Vector gamma, Vector beta)
    : gamma_(std::move(gamma)), beta_(std::move(beta)) {
  if (gamma_.size() < 1)
    throw InvalidTheta("theta needs at least one cut-off (m >= 2)");
  if (beta_.size() < 1) throw InvalidTheta("theta needs at least one slope");
  if (!gamma_.allFinite() || !beta_.allFinite())
    throw InvalidTheta("theta has non-finite entries");
  for (Eigen::Index s = 1; s < gamma_.size(); ++s) {
    if (!(gamma_[s - 1] < gamma_[s]))
      throw InvalidTheta("cut-offs must be strictly increasing (gamma_" +
                         std::to_string(s) + " >= gamma_" +
                         std::to_string(s + 1) + ")");
  }
}

Theta Theta::from_packed(const VectorRef& packed, int categories) {
  const int cuts = categories - 1;
  if (cuts < 1 || packed.size() <= cuts)
    throw InvalidTheta("packed theta has the wrong length");
  return Theta(packed.head(cuts), packed.tail(packed.size() - cuts));
}

Vector Theta::packed() const {
  Vector out(dim());
  out << gamma_, beta_;
  return out;
}

Dataset::Dataset(DesignMatrix x, std::vector<int> y, int categories,
                 std::vector<std::string> column_names)
    : x_(std::move(x)), y_(std::move(y)), m_(categories),
      names_(std::move(column_names)) {
  if (y_.empty()) throw InvalidData("dataset is empty");
  if (static_cast<Eigen::Index>(y_.size()) != x_.rows())
    throw InvalidData("covariate rows and responses differ in length");
  if (x_.cols() < 1) throw InvalidData("dataset needs at least one covariate");
  if (!x_.allFinite()) throw InvalidData("covariates contain non-finite values");
  const int max_y = *std::max_element(y_.begin(), y_.end());
  if (m_ <= 0) m_ = max_y;
  if (m_ < 2) throw InvalidData("need at least two categories");
  for (int v : y_) {
    if (v < 1 || v > m_)
      throw InvalidData("response " + std::to_string(v) + " outside 1.." +
                        std::to_string(m_));
  }
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != x_.cols())
    throw InvalidData("column name count does not match covariates");
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  DesignMatrix xs(rows.size(), x_.cols());
  std::vector<int> ys(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    xs.row(r) = x_.row(rows[r]);
    ys[r] = y_[rows[r]];
  }
  return Dataset(std::move(xs), std::move(ys), m_, names_);
}

std::vector<int> Dataset::category_counts() const {
  std::vector<int> counts(m_, 0);
  for (int v : y_) ++counts[v - 1];
  return counts;
}

CutTerms::CutTerms(const Theta& theta, const Link& link, const VectorRef& x) {
  if (x.size() != theta.covariates())
    throw InvalidData("covariate vector length does not match theta");
  const int m = theta.categories();
  eta = x.dot(theta.beta());
  prob.resize(m);
  dens = Vector::Zero(m + 1);
  dens_deriv = Vector::Zero(m + 1);
  const Vector& g = theta.gamma();
  for (int s = 1; s < m; ++s) {
    const double z = g[s - 1] - eta;
    dens[s] = link.pdf(z);
    dens_deriv[s] = link.pdf_deriv(z);
  }
  prob[0] = link.cdf(g[0] - eta);
  prob[m - 1] = link.survival(g[m - 2] - eta);
  for (int j = 2; j < m; ++j) {
    const double upper = g[j - 1] - eta;
    const double lower = g[j - 2] - eta;
    // Both arguments in the upper tail: difference of survivals keeps digits.
    prob[j - 1] = lower > 0.0 ? link.survival(lower) - link.survival(upper)
                              : link.cdf(upper) - link.cdf(lower);
  }
  for (int j = 0; j < m; ++j) prob[j] = std::max(prob[j], 0.0);
}

void CutTerms::add_prob_gradient(int j, const VectorRef& x, double scale,
                                 Eigen::Ref<Vector> out) const {
  const int m = categories();
  const int cuts = m - 1;
  if (j <= cuts) out[j - 1] += scale * dens[j];
  if (j >= 2) out[j - 2] -= scale * dens[j - 1];
  out.tail(x.size()) += (scale * (dens[j - 1] - dens[j])) * x;
}

Vector CutTerms::prob_gradient(int j, const VectorRef& x) const {
  Vector out = Vector::Zero(categories() - 1 + x.size());
  add_prob_gradient(j, x, 1.0, out);
  return out;
}

void CutTerms::add_prob_hessian(int j, const VectorRef& x, double scale,
                                Eigen::Ref<Matrix> out) const {
  const int cuts = categories() - 1;
  const Eigen::Index p = x.size();
  auto beta_col = [&](Eigen::Index s) { return out.col(s).tail(p); };
  auto beta_row = [&](Eigen::Index s) { return out.row(s).tail(p); };
  if (j <= cuts) {
    const double d = scale * dens_deriv[j];
    out(j - 1, j - 1) += d;
    beta_col(j - 1) -= d * x;
    beta_row(j - 1) -= d * x.transpose();
  }
  if (j >= 2) {
    const double d = scale * dens_deriv[j - 1];
    out(j - 2, j - 2) -= d;
    beta_col(j - 2) += d * x;
    beta_row(j - 2) += d * x.transpose();
  }
  // Elementwise s * (x_a x_b) keeps the block exactly symmetric.
  const double s = scale * (dens_deriv[j] - dens_deriv[j - 1]);
  const Eigen::Index q0 = out.rows() - p;
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) out(q0 + a, q0 + b) += s * (x[a] * x[b]);
}

Matrix CutTerms::prob_hessian(int j, const VectorRef& x) const {
  const Eigen::Index q = categories() - 1 + x.size();
  Matrix out = Matrix::Zero(q, q);
  add_prob_hessian(j, x, 1.0, out);
  return out;
}

Vector category_probs(const Theta& theta, const Link& link, const VectorRef& x) {
  return CutTerms(theta, link, x).prob;
}

double log_likelihood(const Theta& theta, const Link& link, const Dataset& data) {
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const CutTerms t(theta, link, data.row(i));
    const double p = t.prob[data.y()[i] - 1];
    if (p <= kUnderflowThreshold)
      throw DegenerateProbability("observed-category probability underflows at row " +
                                  std::to_string(i));
    total += std::log(p);
  }
  return total;
}

Vector prob_gradient(const Theta& theta, const Link& link, const VectorRef& x,
                     int j) {
  if (j < 1 || j > theta.categories())
    throw std::out_of_range("category index outside 1..m");
  return CutTerms(theta, link, x).prob_gradient(j, x);
}

Vector score(const Theta& theta, const Link& link, const VectorRef& x, int j) {
  if (j < 1 || j > theta.categories())
    throw std::out_of_range("category index outside 1..m");
  const CutTerms t(theta, link, x);
  const double p = t.prob[j - 1];
  if (p <= kUnderflowThreshold)
    throw DegenerateProbability("score undefined: category probability underflows");
  return t.prob_gradient(j, x) / p;
}

Matrix prob_hessian(const Theta& theta, const Link& link, const VectorRef& x,
                    int j) {
  if (j < 1 || j > theta.categories())
    throw std::out_of_range("category index outside 1..m");
  return CutTerms(theta, link, x).prob_hessian(j, x);
}

double power(double p, double a) {
  if (a == 0.0) return 1.0;
  if (p <= 0.0) return 0.0;
  return std::exp(a * std::log(p));
}

namespace {

struct Interval {
  bool has_upper;
  bool has_lower;
  double upper;
  double lower;
};

Interval interval_at(const Theta& theta, double t, int j) {
  const int m = theta.categories();
  if (j < 1 || j > m) throw std::out_of_range("category index outside 1..m");
  const Vector& g = theta.gamma();
  Interval iv{j < m, j > 1, 0.0, 0.0};
  if (iv.has_upper) iv.upper = g[j - 1] - t;
  if (iv.has_lower) iv.lower = g[j - 2] - t;
  return iv;
}

double interval_mass(const Link& link, const Interval& iv) {
  if (!iv.has_upper) return link.survival(iv.lower);
  if (!iv.has_lower) return link.cdf(iv.upper);
  const double mass = iv.lower > 0.0 ? link.survival(iv.lower) - link.survival(iv.upper)
                                     : link.cdf(iv.upper) - link.cdf(iv.lower);
  return std::max(mass, 0.0);
}

}  // namespace

int most_probable_category(const Theta& theta, const Link& link, const VectorRef& x) {
  const Vector p = category_probs(theta, link, x);
  int best = 0;
  for (int j = 1; j < p.size(); ++j) {
    if (p[j] > p[best]) best = j;
  }
  return best + 1;
}

double category_prob_at(const Theta& theta, const Link& link, double t, int j) {
  return interval_mass(link, interval_at(theta, t, j));
}

double residual_factor(const Theta& theta, const Link& link, double t, int j) {
  const Interval iv = interval_at(theta, t, j);
  const double f_upper = iv.has_upper ? link.pdf(iv.upper) : 0.0;
  const double f_lower = iv.has_lower ? link.pdf(iv.lower) : 0.0;
  const double mass = interval_mass(link, iv);
  if (mass > kUnderflowThreshold) return (f_upper - f_lower) / mass;
  // Upper tail of the latent scale: the lower cut-off dominates.
  if (iv.has_lower && (!iv.has_upper || iv.lower > 0.0))
    return link.log_pdf_deriv(iv.lower);
  return link.log_pdf_deriv(iv.upper);
}

}  // namespace ordpd
