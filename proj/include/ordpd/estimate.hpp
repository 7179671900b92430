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


#ifndef ORDPD_ESTIMATE_HPP
#define ORDPD_ESTIMATE_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ordpd/link.hpp"
#include "ordpd/model.hpp"
#include "ordpd/robust_scale.hpp"

namespace ordpd {

enum class IannarioWeight { w1, w2, w3 };

IannarioWeight iannario_weight_from_name(std::string_view name);
std::string_view iannario_weight_name(IannarioWeight kind);
/// w3 for logit, w2 otherwise.
IannarioWeight default_iannario_weight(const Link& link);
/// 0.8 for logit and cauchit, 1.5 for probit and cloglog.
double default_iannario_c(const Link& link);

struct Mle {};
struct Mdpde {
  double alpha = 0.0;
};
struct CrouxWml {};
struct Iannario {
  double c = 1.5;
  IannarioWeight weight = IannarioWeight::w2;
};
using EstimatorSpec = std::variant<Mle, Mdpde, CrouxWml, Iannario>;

/// Short label such as "MLE", "MDPDE(0.3)", "Croux", "Iannario(1.5,w2)".
std::string estimator_label(const EstimatorSpec& spec);

struct FitConfig {
  EstimatorSpec estimator = Mle{};
  int max_iter = 500;
  double grad_tol = 1e-8;
  /// Starting value; default_init() when empty.
  std::optional<Theta> init;
  /// Zero-MAD handling for the robust covariate distances used by the
  /// Croux and Iannario weights.
  ZeroScalePolicy scatter = ZeroScalePolicy::fallback;
  /// Attach the sandwich covariance to MLE/MDPDE fits.
  bool covariance = true;

  void validate() const;
};

struct FitResult {
  Theta theta_hat;
  double objective_value = 0.0;
  /// Infinity norm of the objective gradient at theta_hat, in (gamma, beta).
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status{};
  std::optional<Matrix> covariance{};
  /// Set for MLE (0) and MDPDE fits.
  std::optional<double> alpha{};
  std::vector<std::string> warnings{};
};

/// Starting value: beta = 0 and gamma_j = F^{-1} of the cumulative category
/// frequency, clipped to [1/(2n), 1 - 1/(2n)].  Ties (unobserved categories)
/// are broken by adding j * 1e-4 to gamma_j.
Theta default_init(const Dataset& data, const Link& link);

/// Minimiser of the averaged density power divergence H_n.  A non-converged
/// fit is returned with converged = false and the best iterate.
FitResult fit_mdpde(const Dataset& data, const Link& link, double alpha,
                    const FitConfig& cfg = {});
FitResult fit_mle(const Dataset& data, const Link& link, const FitConfig& cfg = {});

/// Weights (p+3)/(d_i+3) from squared robust distances of the covariates.
Vector croux_weights(const Dataset& data, ZeroScalePolicy policy);
FitResult fit_croux_wml(const Dataset& data, const Link& link,
                        const FitConfig& cfg = {});

/// Huber-type weights at theta.  `norms` holds the robust norm of each
/// covariate row.
Vector iannario_weights(const Theta& theta, const Link& link, const Dataset& data,
                        double c, IannarioWeight kind, const Vector& norms);
/// Robust Euclidean norm of each row in median/MAD standardized coordinates.
Vector robust_row_norms(const Dataset& data, ZeroScalePolicy policy);
/// Solves the weighted score equation by iterative reweighting: weights are
/// frozen at the current iterate, the weighted likelihood is maximised, and
/// the loop stops once successive iterates differ by less than grad_tol.
FitResult fit_iannario(const Dataset& data, const Link& link, double c,
                       IannarioWeight weight, const FitConfig& cfg = {});

/// Dispatches on cfg.estimator.
FitResult fit(const Dataset& data, const Link& link, const FitConfig& cfg);

}  // namespace ordpd

#endif  // ORDPD_ESTIMATE_HPP
