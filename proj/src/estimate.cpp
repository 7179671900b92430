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


#include "ordpd/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "ordpd/errors.hpp"
#include "ordpd/inference.hpp"
#include "ordpd/objective.hpp"
#include "ordpd/optimize.hpp"

namespace ordpd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void note_empty_categories(const Dataset& data, std::vector<std::string>& warnings) {
  const auto counts = data.category_counts();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0)
      warnings.push_back(fmt::format(
          "category {} is unobserved; neighbouring cut-offs may diverge", j + 1));
  }
}

FitResult from_optimizer(OptimizerResult r) {
  FitResult out{std::move(r.theta)};
  out.objective_value = r.value;
  out.grad_norm = r.grad_norm;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.status = std::move(r.status);
  return out;
}

OptimizerOptions optimizer_options(const FitConfig& cfg) {
  return {cfg.max_iter, cfg.grad_tol};
}

}  // namespace

IannarioWeight iannario_weight_from_name(std::string_view name) {
  if (name == "w1") return IannarioWeight::w1;
  if (name == "w2") return IannarioWeight::w2;
  if (name == "w3") return IannarioWeight::w3;
  throw std::invalid_argument(fmt::format("unknown weight function '{}'", name));
}

std::string_view iannario_weight_name(IannarioWeight kind) {
  switch (kind) {
    case IannarioWeight::w1: return "w1";
    case IannarioWeight::w2: return "w2";
    case IannarioWeight::w3: return "w3";
  }
  return "w2";
}

IannarioWeight default_iannario_weight(const Link& link) {
  return link.kind() == LinkKind::logit ? IannarioWeight::w3 : IannarioWeight::w2;
}

double default_iannario_c(const Link& link) {
  switch (link.kind()) {
    case LinkKind::logit:
    case LinkKind::cauchit: return 0.8;
    case LinkKind::probit:
    case LinkKind::cloglog: return 1.5;
  }
  return 1.5;
}

std::string estimator_label(const EstimatorSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Mle&) { return std::string("MLE"); },
          [](const Mdpde& s) { return fmt::format("MDPDE({:g})", s.alpha); },
          [](const CrouxWml&) { return std::string("Croux"); },
          [](const Iannario& s) {
            return fmt::format("Iannario({:g},{})", s.c, iannario_weight_name(s.weight));
          },
      },
      spec);
}

void FitConfig::validate() const {
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (const auto* m = std::get_if<Mdpde>(&estimator)) {
    if (!(m->alpha >= 0.0 && m->alpha <= 1.0))
      throw std::invalid_argument("alpha must lie in [0,1]");
  }
  if (const auto* s = std::get_if<Iannario>(&estimator)) {
    if (!(s->c > 0.0)) throw std::invalid_argument("tuning constant c must be positive");
  }
}

Theta default_init(const Dataset& data, const Link& link) {
  const int m = data.categories();
  const double n = data.n();
  const auto counts = data.category_counts();
  const double lo = 1.0 / (2.0 * n);
  const double hi = 1.0 - lo;
  Vector gamma(m - 1);
  double cum = 0.0;
  for (int j = 0; j < m - 1; ++j) {
    cum += counts[j];
    gamma[j] = link.quantile(std::clamp(cum / n, lo, hi));
  }
  bool ties = false;
  for (int j = 1; j < m - 1; ++j) ties = ties || !(gamma[j - 1] < gamma[j]);
  if (ties) {
    for (int j = 0; j < m - 1; ++j) gamma[j] += (j + 1) * 1e-4;
  }
  return Theta(std::move(gamma), Vector::Zero(data.p()));
}

FitResult fit_mdpde(const Dataset& data, const Link& link, double alpha,
                    const FitConfig& cfg) {
  cfg.validate();
  const DpdObjective objective(alpha, link, data);
  const Theta start = cfg.init ? *cfg.init : default_init(data, link);
  if (start.categories() != data.categories() || start.covariates() != data.p())
    throw InvalidTheta("starting value does not match the data dimensions");
  auto r = minimize_ordered(
      [&objective](const Theta& th, Vector& g) {
        return objective.value_and_gradient(th, g);
      },
      start, optimizer_options(cfg));
  FitResult out = from_optimizer(std::move(r));
  out.alpha = alpha;
  note_empty_categories(data, out.warnings);
  if (cfg.covariance) {
    try {
      out.covariance = sandwich(out.theta_hat, link, data, alpha).cov;
    } catch (const Error& e) {
      out.warnings.push_back(fmt::format("covariance unavailable: {}", e.what()));
    }
  }
  return out;
}

FitResult fit_mle(const Dataset& data, const Link& link, const FitConfig& cfg) {
  return fit_mdpde(data, link, 0.0, cfg);
}

Vector croux_weights(const Dataset& data, ZeroScalePolicy policy) {
  const auto scale = RobustStandardizer::fit(data.x(), policy);
  const Vector d = scale.squared_distances(data.x());
  const double p = data.p();
  return ((p + 3.0) / (d.array() + 3.0)).matrix();
}

namespace {

FitResult fit_weighted(const Dataset& data, const Link& link, const Vector& weights,
                       const Theta& start, const FitConfig& cfg) {
  const WeightedLikelihoodObjective objective(link, data, weights);
  auto r = minimize_ordered(
      [&objective](const Theta& th, Vector& g) {
        return objective.value_and_gradient(th, g);
      },
      start, optimizer_options(cfg));
  return from_optimizer(std::move(r));
}

}  // namespace

FitResult fit_croux_wml(const Dataset& data, const Link& link, const FitConfig& cfg) {
  cfg.validate();
  const Theta start = cfg.init ? *cfg.init : default_init(data, link);
  FitResult out = fit_weighted(data, link, croux_weights(data, cfg.scatter), start, cfg);
  note_empty_categories(data, out.warnings);
  return out;
}

Vector robust_row_norms(const Dataset& data, ZeroScalePolicy policy) {
  const auto scale = RobustStandardizer::fit(data.x(), policy);
  return scale.squared_distances(data.x()).cwiseSqrt();
}

Vector iannario_weights(const Theta& theta, const Link& link, const Dataset& data,
                        double c, IannarioWeight kind, const Vector& norms) {
  Vector w(data.n());
  for (int i = 0; i < data.n(); ++i) {
    double size = norms[i];
    if (kind != IannarioWeight::w3) {
      const double t = data.row(i).dot(theta.beta());
      const double e = std::abs(residual_factor(theta, link, t, data.y()[i]));
      size = kind == IannarioWeight::w1 ? e : e * norms[i];
    }
    w[i] = size > c ? c / size : 1.0;
  }
  return w;
}

FitResult fit_iannario(const Dataset& data, const Link& link, double c,
                       IannarioWeight weight, const FitConfig& cfg) {
  cfg.validate();
  if (!(c > 0.0)) throw std::invalid_argument("tuning constant c must be positive");
  const Vector norms = robust_row_norms(data, cfg.scatter);
  Theta current = cfg.init ? *cfg.init : default_init(data, link);
  // The first pass starts from the unweighted likelihood so that residual
  // weights are evaluated at a sensible fit.
  FitConfig inner = cfg;
  inner.covariance = false;
  FitResult out = fit_weighted(data, link, Vector::Ones(data.n()), current, inner);
  int total_iterations = out.iterations;
  bool settled = false;
  bool all_unit = true;
  int round = 0;
  for (; round < cfg.max_iter; ++round) {
    current = out.theta_hat;
    const Vector w = iannario_weights(current, link, data, c, weight, norms);
    all_unit = (w.array() == 1.0).all();
    out = fit_weighted(data, link, w, current, inner);
    total_iterations += out.iterations;
    const double step =
        (out.theta_hat.packed() - current.packed()).lpNorm<Eigen::Infinity>();
    if (step < cfg.grad_tol) {
      settled = true;
      break;
    }
  }
  out.iterations = total_iterations;
  out.converged = out.converged && settled;
  if (!settled) out.status = "reweighting did not settle";
  note_empty_categories(data, out.warnings);
  if (all_unit) out.warnings.push_back("all weights equal 1; the fit is the MLE");
  return out;
}

FitResult fit(const Dataset& data, const Link& link, const FitConfig& cfg) {
  return std::visit(
      Overloaded{
          [&](const Mle&) { return fit_mle(data, link, cfg); },
          [&](const Mdpde& s) { return fit_mdpde(data, link, s.alpha, cfg); },
          [&](const CrouxWml&) { return fit_croux_wml(data, link, cfg); },
          [&](const Iannario& s) { return fit_iannario(data, link, s.c, s.weight, cfg); },
      },
      cfg.estimator);
}

}  // namespace ordpd
