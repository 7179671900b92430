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

#include "ordpd/link.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ordpd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// 1/2 + atan(x)/pi, rewritten so the lower tail keeps full relative accuracy.
double cauchy_cdf(double x) {
  if (x < 0.0) return std::atan(-1.0 / x) / std::numbers::pi;
  if (x == 0.0) return 0.5;
  return 1.0 - std::atan(1.0 / x) / std::numbers::pi;
}

}  // namespace

Link Link::from_name(std::string_view name) {
  if (name == "logit") return Link(LinkKind::logit);
  if (name == "probit") return Link(LinkKind::probit);
  if (name == "cauchit") return Link(LinkKind::cauchit);
  if (name == "cloglog") return Link(LinkKind::cloglog);
  throw std::invalid_argument("unknown link '" + std::string(name) +
                              "' (expected logit, probit, cauchit or cloglog)");
}

std::string_view Link::name() const {
  switch (kind_) {
    case LinkKind::logit: return "logit";
    case LinkKind::probit: return "probit";
    case LinkKind::cauchit: return "cauchit";
    case LinkKind::cloglog: return "cloglog";
  }
  return "unknown";
}

double Link::cdf(double x) const {
  switch (kind_) {
    case LinkKind::logit: return logistic_cdf(x);
    case LinkKind::probit: return 0.5 * std::erfc(-x * kInvSqrt2);
    case LinkKind::cauchit: return cauchy_cdf(x);
    case LinkKind::cloglog: return -std::expm1(-std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::survival(double x) const {
  switch (kind_) {
    case LinkKind::logit: return logistic_cdf(-x);
    case LinkKind::probit: return 0.5 * std::erfc(x * kInvSqrt2);
    case LinkKind::cauchit: return cauchy_cdf(-x);
    case LinkKind::cloglog: return std::exp(-std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::pdf(double x) const {
  switch (kind_) {
    case LinkKind::logit: {
      const double e = std::exp(-std::abs(x));
      const double d = 1.0 + e;
      return e / (d * d);
    }
    case LinkKind::probit: return kInvSqrt2Pi * std::exp(-0.5 * x * x);
    case LinkKind::cauchit: return 1.0 / (std::numbers::pi * (1.0 + x * x));
    case LinkKind::cloglog: return std::exp(x - std::exp(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::pdf_deriv(double x) const {
  const double f = pdf(x);
  // 0 * inf = 0: far tails of cloglog have f = 0 and an infinite log-slope.
  if (f == 0.0) return 0.0;
  return f * log_pdf_deriv(x);
}

double Link::log_pdf_deriv(double x) const {
  switch (kind_) {
    case LinkKind::logit: return std::tanh(-0.5 * x);
    case LinkKind::probit: return -x;
    case LinkKind::cauchit: return -2.0 * x / (1.0 + x * x);
    case LinkKind::cloglog: return -std::expm1(x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Link::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("quantile: probability outside [0,1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p == 0.0) return -inf;
  if (p == 1.0) return inf;
  switch (kind_) {
    case LinkKind::logit: return std::log(p) - std::log1p(-p);
    case LinkKind::probit:
      return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    case LinkKind::cauchit:
      // -cot(pi p) and cot(pi (1 - p)) avoid the cancellation in p - 1/2.
      return p < 0.5 ? -1.0 / std::tan(std::numbers::pi * p)
                     : 1.0 / std::tan(std::numbers::pi * (1.0 - p));
    case LinkKind::cloglog: return std::log(-std::log1p(-p));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace ordpd
