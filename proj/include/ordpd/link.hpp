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

#ifndef ORDPD_LINK_HPP
#define ORDPD_LINK_HPP

#include <array>
#include <string>
#include <string_view>

namespace ordpd {

enum class LinkKind { logit, probit, cauchit, cloglog };

/// Standard error distribution of the latent regression.  The link function
/// proper is the inverse of cdf(); every member is a pure function.
///
/// cloglog uses F(x) = 1 - exp(-exp(x)), so it is not symmetric about 0.
class Link {
 public:
  constexpr explicit Link(LinkKind kind = LinkKind::probit) : kind_(kind) {}

  /// Parses "logit" | "probit" | "cauchit" | "cloglog"; throws
  /// std::invalid_argument otherwise.
  static Link from_name(std::string_view name);

  LinkKind kind() const { return kind_; }
  std::string_view name() const;
  bool symmetric() const { return kind_ != LinkKind::cloglog; }

  double cdf(double x) const;
  /// 1 - F(x), evaluated without cancellation in the upper tail.
  double survival(double x) const;
  double pdf(double x) const;
  double pdf_deriv(double x) const;
  /// f'(x) / f(x) in closed form; finite wherever f underflows.
  double log_pdf_deriv(double x) const;
  double quantile(double p) const;

  friend bool operator==(const Link&, const Link&) = default;

 private:
  LinkKind kind_;
};

inline constexpr std::array<Link, 4> kAllLinks = {
    Link(LinkKind::logit), Link(LinkKind::probit), Link(LinkKind::cauchit),
    Link(LinkKind::cloglog)};

}  // namespace ordpd

#endif  // ORDPD_LINK_HPP
