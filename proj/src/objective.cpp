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

#include "ordpd/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ordpd/errors.hpp"

namespace ordpd {

namespace {

[[noreturn]] void degenerate(int i) {
  throw DegenerateProbability("observed-category probability underflows at row " +
                              std::to_string(i));
}

}  // namespace

DpdObjective::DpdObjective(double alpha, Link link, const Dataset& data)
    : alpha_(alpha), link_(link), data_(&data) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("DPD tuning parameter must lie in [0,1]");
}

double DpdObjective::v_i(const Theta& theta, int i) const {
  const CutTerms t(theta, link_, data_->row(i));
  const double p_obs = t.prob[data_->y()[i] - 1];
  if (alpha_ == 0.0) {
    if (p_obs <= kUnderflowThreshold) degenerate(i);
    return -std::log(p_obs);
  }
  double mass = 0.0;
  for (int j = 0; j < t.categories(); ++j) mass += power(t.prob[j], 1.0 + alpha_);
  return mass - (1.0 + 1.0 / alpha_) * power(p_obs, alpha_);
}

double DpdObjective::h_n(const Theta& theta) const {
  double total = 0.0;
  for (int i = 0; i < data_->n(); ++i) total += v_i(theta, i);
  return total / data_->n();
}

Vector DpdObjective::h_n_gradient(const Theta& theta) const {
  Vector grad;
  value_and_gradient(theta, grad);
  return grad;
}

double DpdObjective::value_and_gradient(const Theta& theta, Vector& grad) const {
  const Dataset& d = *data_;
  grad = Vector::Zero(theta.dim());
  double total = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const auto x = d.row(i);
    const CutTerms t(theta, link_, x);
    const int y = d.y()[i];
    const double p_obs = t.prob[y - 1];
    if (alpha_ == 0.0) {
      if (p_obs <= kUnderflowThreshold) degenerate(i);
      total -= std::log(p_obs);
      t.add_prob_gradient(y, x, -1.0 / p_obs, grad);
      continue;
    }
    for (int j = 1; j <= t.categories(); ++j) {
      const double pj = t.prob[j - 1];
      total += power(pj, 1.0 + alpha_);
      t.add_prob_gradient(j, x, (1.0 + alpha_) * power(pj, alpha_), grad);
    }
    total -= (1.0 + 1.0 / alpha_) * power(p_obs, alpha_);
    if (alpha_ < 1.0) {
      if (p_obs <= kUnderflowThreshold) degenerate(i);
      t.add_prob_gradient(y, x, -(1.0 + alpha_) * power(p_obs, alpha_ - 1.0), grad);
    } else {
      t.add_prob_gradient(y, x, -(1.0 + alpha_), grad);
    }
  }
  grad /= d.n();
  return total / d.n();
}

WeightedLikelihoodObjective::WeightedLikelihoodObjective(Link link,
                                                         const Dataset& data,
                                                         Vector weights)
    : link_(link), data_(&data), weights_(std::move(weights)) {
  if (weights_.size() != data.n())
    throw std::invalid_argument("one weight per observation required");
}

double WeightedLikelihoodObjective::value(const Theta& theta) const {
  Vector unused;
  return value_and_gradient(theta, unused);
}

double WeightedLikelihoodObjective::value_and_gradient(const Theta& theta,
                                                       Vector& grad) const {
  const Dataset& d = *data_;
  grad = Vector::Zero(theta.dim());
  double total = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const double w = weights_[i];
    if (w == 0.0) continue;
    const auto x = d.row(i);
    const CutTerms t(theta, link_, x);
    const int y = d.y()[i];
    const double p_obs = t.prob[y - 1];
    if (p_obs <= kUnderflowThreshold) degenerate(i);
    total -= w * std::log(p_obs);
    t.add_prob_gradient(y, x, -w / p_obs, grad);
  }
  grad /= d.n();
  return total / d.n();
}

}  // namespace ordpd
