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

#ifndef ORDPD_OBJECTIVE_HPP
#define ORDPD_OBJECTIVE_HPP

#include "ordpd/link.hpp"
#include "ordpd/model.hpp"

namespace ordpd {

/// Averaged density power divergence between the per-observation empirical
/// distributions and the model, minus the theta-free term:
///
///   V_i = sum_j p_ij^{1+a} - (1 + 1/a) p_i(Y_i)^a     (a > 0)
///   V_i = -ln p_i(Y_i)                                 (a = 0)
///   H_n = mean_i V_i
///
/// Summation is sequential in row order, so results are reproducible bit for
/// bit.  The objective holds a reference to the dataset.
class DpdObjective {
 public:
  DpdObjective(double alpha, Link link, const Dataset& data);

  double alpha() const { return alpha_; }
  const Link& link() const { return link_; }
  const Dataset& data() const { return *data_; }

  /// i is 0-based.
  double v_i(const Theta& theta, int i) const;
  double h_n(const Theta& theta) const;
  /// (1+a)/n sum_i [ sum_j p_ij^a grad p_ij - p_i(Y_i)^{a-1} grad p_i(Y_i) ]
  Vector h_n_gradient(const Theta& theta) const;
  /// Value and gradient from a single pass over the data.
  double value_and_gradient(const Theta& theta, Vector& grad) const;

 private:
  double alpha_;
  Link link_;
  const Dataset* data_;
};

/// Weighted negative mean log-likelihood, -(1/n) sum_i w_i ln p_i(Y_i).
class WeightedLikelihoodObjective {
 public:
  WeightedLikelihoodObjective(Link link, const Dataset& data, Vector weights);

  const Vector& weights() const { return weights_; }
  double value(const Theta& theta) const;
  double value_and_gradient(const Theta& theta, Vector& grad) const;

 private:
  Link link_;
  const Dataset* data_;
  Vector weights_;
};

}  // namespace ordpd

#endif  // ORDPD_OBJECTIVE_HPP
