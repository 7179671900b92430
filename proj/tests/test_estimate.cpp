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


#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ordpd/errors.hpp"
#include "ordpd/estimate.hpp"
#include "ordpd/objective.hpp"
#include "ordpd/optimize.hpp"
#include "ordpd/simulate.hpp"
#include "test_support.hpp"

using namespace ordpd;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using testing::vec;

namespace {

double max_diff(const Theta& a, const Theta& b) {
  return (a.packed() - b.packed()).cwiseAbs().maxCoeff();
}

FitConfig quiet() {
  FitConfig cfg;
  cfg.covariance = false;
  return cfg;
}

}  // namespace

TEST_CASE("default starting value", "[estimate]") {
  DesignMatrix x = DesignMatrix::Zero(6, 1);
  const Dataset three(x, {1, 1, 2, 2, 3, 3});
  const Theta t = default_init(three, Link(LinkKind::logit));
  CHECK_THAT(t.gamma()[0], WithinAbs(-std::log(2.0), 1e-12));
  CHECK_THAT(t.gamma()[1], WithinAbs(std::log(2.0), 1e-12));
  CHECK(t.beta()[0] == 0.0);

  const Dataset two(DesignMatrix::Zero(4, 1), {1, 2, 1, 2});
  CHECK_THAT(default_init(two, Link(LinkKind::probit)).gamma()[0], WithinAbs(0.0, 1e-14));

  // Middle category never observed: cut-offs still strictly increasing.
  const Dataset gap(DesignMatrix::Zero(4, 1), {1, 1, 3, 3}, 3);
  CHECK_NOTHROW(default_init(gap, Link(LinkKind::probit)));
  const Theta g = default_init(gap, Link(LinkKind::probit));
  CHECK(g.gamma()[0] < g.gamma()[1]);

  // Empty top category: the clipped frequency keeps the cut-off finite.
  const Dataset top(DesignMatrix::Zero(4, 1), {1, 2, 2, 1}, 3);
  CHECK(default_init(top, Link(LinkKind::logit)).gamma().allFinite());
}

TEST_CASE("unconstrained coordinates round trip", "[estimate][property]") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 200; ++rep) {
    const Theta t = testing::random_theta(gen, 2 + rep % 6, 1 + rep % 3);
    const Vector a = to_unconstrained(t);
    const Theta back = from_unconstrained(a, t.categories());
    CHECK(max_diff(back, t) < 1e-12);
    CHECK((to_unconstrained(back) - a).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Arbitrary unconstrained vectors always map to ordered cut-offs.
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 200; ++rep) {
    Vector a(6);
    for (auto& v : a) v = 3.0 * normal(gen);
    CHECK_NOTHROW(from_unconstrained(a, 5));
  }
}

TEST_CASE("chain rule through the cut-off map", "[estimate]") {
  std::mt19937_64 gen(22);
  const Theta truth = testing::random_theta(gen, 5, 2);
  const Dataset d = testing::random_dataset(gen, truth, LinkKind::logit, 80);
  const DpdObjective obj(0.3, Link(LinkKind::logit), d);
  const Vector a = to_unconstrained(truth);
  const Vector g = unconstrained_gradient(a, obj.h_n_gradient(truth), 5);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    Vector up = a, dn = a;
    up[k] += 1e-6;
    dn[k] -= 1e-6;
    const double fd = (obj.h_n(from_unconstrained(up, 5)) - obj.h_n(from_unconstrained(dn, 5))) / 2e-6;
    CHECK_THAT(g[k], WithinAbs(fd, 1e-6));
  }
}

TEST_CASE("optimizer trace is non-increasing", "[estimate][property]") {
  std::mt19937_64 gen(23);
  for (LinkKind k : {LinkKind::logit, LinkKind::probit, LinkKind::cauchit, LinkKind::cloglog}) {
    for (double alpha : {0.0, 0.5, 1.0}) {
      const Theta truth = testing::random_theta(gen, 4, 2);
      const Dataset d = testing::random_dataset(gen, truth, k, 100);
      const DpdObjective obj(alpha, Link(k), d);
      const auto r = minimize_ordered(
          [&](const Theta& t, Vector& g) { return obj.value_and_gradient(t, g); },
          default_init(d, Link(k)), {});
      REQUIRE(r.trace.size() >= 2);
      for (std::size_t s = 1; s < r.trace.size(); ++s) CHECK(r.trace[s] <= r.trace[s - 1]);
      CHECK(r.converged);
      CHECK(r.grad_norm <= 1e-8);
      CHECK(r.value == r.trace.back());
    }
  }
}

TEST_CASE("intercept-only fit is the binomial estimate", "[estimate]") {
  for (LinkKind k : {LinkKind::logit, LinkKind::probit, LinkKind::cauchit, LinkKind::cloglog}) {
    const Dataset d(DesignMatrix::Zero(10, 1), {1, 1, 1, 2, 2, 2, 2, 2, 2, 2});
    const Link link(k);
    const FitResult r = fit_mle(d, link, quiet());
    REQUIRE(r.converged);
    CHECK_THAT(r.theta_hat.gamma()[0], WithinAbs(link.quantile(0.3), 1e-7));
    CHECK_THAT(r.theta_hat.beta()[0], WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("perfect-fit instance stays at the truth", "[estimate]") {
  const Dataset d(DesignMatrix::Zero(4, 1), {1, 2, 2, 3});
  const Theta truth(vec({std::log(1.0 / 3.0), std::log(3.0)}), vec({0.0}));
  FitConfig cfg = quiet();
  cfg.init = truth;
  for (double alpha : {0.0, 0.5, 1.0}) {
    const FitResult r = fit_mdpde(d, Link(LinkKind::logit), alpha, cfg);
    CHECK(r.converged);
    CHECK(max_diff(r.theta_hat, truth) < 1e-10);
  }
}

TEST_CASE("converged fits satisfy the gradient tolerance", "[estimate]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 200);
  const Dataset d = generate(spec, 3);
  for (double alpha : {0.0, 0.1, 0.5, 1.0}) {
    const FitResult r = fit_mdpde(d, spec.link, alpha);
    REQUIRE(r.converged);
    CHECK(r.grad_norm <= 1e-8);
    const Vector g = DpdObjective(alpha, spec.link, d).h_n_gradient(r.theta_hat);
    CHECK(g.cwiseAbs().maxCoeff() <= 1e-8);
    REQUIRE(r.covariance.has_value());
    CHECK(r.covariance->rows() == r.theta_hat.dim());
    REQUIRE(r.alpha.has_value());
    CHECK(*r.alpha == alpha);
    // Close to the generating parameter at n = 200.
    CHECK(max_diff(r.theta_hat, spec.truth) < 0.6);
  }
}

TEST_CASE("MLE and near-zero tuning parameter agree", "[estimate]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 200);
  const Dataset d = generate(spec, 4);
  const FitResult mle = fit_mle(d, spec.link, quiet());
  const FitResult near = fit_mdpde(d, spec.link, 1e-8, quiet());
  REQUIRE(mle.converged);
  CHECK(max_diff(mle.theta_hat, near.theta_hat) < 1e-4);

  // a = 1 and a = 0 differ, but not by much on clean data.
  const FitResult one = fit_mdpde(d, spec.link, 1.0, quiet());
  REQUIRE(one.converged);
  const double gap = max_diff(one.theta_hat, mle.theta_hat);
  CHECK(gap > 1e-6);
  CHECK(gap < 0.5);
}

TEST_CASE("MDPDE is the minimiser on a coarse lattice neighbourhood", "[estimate]") {
  // Grid search over a lattice around the fitted value never beats the fit.
  const ModelSpec spec = model_spec(2, Link(LinkKind::logit), 120);
  const Dataset d = generate(spec, 5);
  const DpdObjective obj(1.0, spec.link, d);
  const FitResult r = fit_mdpde(d, spec.link, 1.0, quiet());
  REQUIRE(r.converged);
  const Vector c = r.theta_hat.packed();
  const double best = obj.h_n(r.theta_hat);
  for (double s : {-0.2, -0.05, 0.05, 0.2}) {
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      Vector v = c;
      v[k] += s;
      try {
        CHECK(obj.h_n(Theta::from_packed(v, 5)) >= best);
      } catch (const InvalidTheta&) {
      }
    }
  }
}

TEST_CASE("Croux weights", "[estimate]") {
  // Median 0 and 1.4828 * MAD = 1.4828 in each column, so the first row has
  // squared distance 1 + 1 = 2 and weight (2 + 3) / (2 + 3) = 1.
  DesignMatrix x(5, 2);
  x.col(0) << -1.4828, -1.0, 0.0, 1.0, 1.4828;
  x.col(1) = x.col(0);
  const Dataset d(x, {1, 2, 1, 2, 2});
  const Vector w = croux_weights(d, ZeroScalePolicy::strict);
  CHECK_THAT(w[0], WithinAbs(1.0, 1e-12));
  CHECK_THAT(w[2], WithinAbs(5.0 / 3.0, 1e-12));

  const Dataset flat(DesignMatrix::Constant(5, 2, 0.7), {1, 2, 1, 2, 2});
  CHECK_THROWS_AS(croux_weights(flat, ZeroScalePolicy::strict), SingularScatter);
  const Vector wf = croux_weights(flat, ZeroScalePolicy::fallback);
  CHECK((wf.array() == 5.0 / 3.0).all());
}

TEST_CASE("Croux with constant weights is the MLE", "[estimate]") {
  DesignMatrix x(40, 1);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
    y[i] = 1 + (i * 7 % 11) % 3;
  }
  const Dataset d(x, y);
  const Vector w = croux_weights(d, ZeroScalePolicy::strict);
  CHECK((w.array() == w[0]).all());
  const FitResult mle = fit_mle(d, Link(LinkKind::logit), quiet());
  const FitResult croux = fit_croux_wml(d, Link(LinkKind::logit), quiet());
  REQUIRE(mle.converged);
  REQUIRE(croux.converged);
  CHECK(max_diff(mle.theta_hat, croux.theta_hat) < 1e-7);

  FitConfig strict = quiet();
  strict.scatter = ZeroScalePolicy::strict;
  const Dataset flat(DesignMatrix::Constant(6, 1, 2.0), {1, 2, 1, 2, 2, 1});
  CHECK_THROWS_AS(fit_croux_wml(flat, Link(LinkKind::logit), strict), SingularScatter);
}

TEST_CASE("Iannario weights", "[estimate]") {
  // Column with median 0 and 1.4828 * MAD = 1: the last row has norm 3.
  const double k = 1.0 / 1.4828;
  DesignMatrix x(5, 1);
  x << -2.0, -k, 0.0, k, 3.0;
  const Dataset d(x, {1, 2, 2, 3, 3});
  const Vector norms = robust_row_norms(d, ZeroScalePolicy::strict);
  CHECK_THAT(norms[4], WithinAbs(3.0, 1e-12));
  const Theta t(vec({-1.0, 1.0}), vec({0.5}));
  const Link probit(LinkKind::probit);
  const Vector w3 = iannario_weights(t, probit, d, 1.5, IannarioWeight::w3, norms);
  CHECK_THAT(w3[4], WithinAbs(0.5, 1e-12));
  CHECK(w3[2] == 1.0);

  const Vector w1 = iannario_weights(t, probit, d, 0.5, IannarioWeight::w1, norms);
  const Vector w2 = iannario_weights(t, probit, d, 0.5, IannarioWeight::w2, norms);
  for (int i = 0; i < d.n(); ++i) {
    const double e = std::abs(residual_factor(t, probit, d.row(i).dot(t.beta()), d.y()[i]));
    CHECK_THAT(w1[i], WithinAbs(std::min(1.0, 0.5 / e), 1e-12));
    CHECK_THAT(w2[i], WithinAbs(e * norms[i] > 0.5 ? 0.5 / (e * norms[i]) : 1.0, 1e-12));
    CHECK(w1[i] > 0.0);
    CHECK(w1[i] <= 1.0);
  }

  CHECK(default_iannario_weight(Link(LinkKind::logit)) == IannarioWeight::w3);
  CHECK(default_iannario_weight(probit) == IannarioWeight::w2);
  CHECK(default_iannario_c(Link(LinkKind::logit)) == 0.8);
  CHECK(default_iannario_c(probit) == 1.5);
  CHECK(iannario_weight_from_name("w2") == IannarioWeight::w2);
  CHECK_THROWS_AS(iannario_weight_from_name("w4"), std::invalid_argument);
}

TEST_CASE("Iannario with a huge constant is the MLE", "[estimate]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::logit), 150);
  const Dataset d = generate(spec, 6);
  const FitResult mle = fit_mle(d, spec.link, quiet());
  for (IannarioWeight kind : {IannarioWeight::w1, IannarioWeight::w2, IannarioWeight::w3}) {
    const FitResult r = fit_iannario(d, spec.link, 1e9, kind, quiet());
    REQUIRE(r.converged);
    CHECK(max_diff(r.theta_hat, mle.theta_hat) < 1e-7);
    CHECK(std::find(r.warnings.begin(), r.warnings.end(),
                    "all weights equal 1; the fit is the MLE") != r.warnings.end());
  }
  const FitResult robust = fit_iannario(d, spec.link, 0.8, IannarioWeight::w3, quiet());
  CHECK(robust.converged);
  CHECK(max_diff(robust.theta_hat, mle.theta_hat) > 1e-6);
}

TEST_CASE("configuration validation and dispatch", "[estimate]") {
  const Dataset d(DesignMatrix::Zero(4, 1), {1, 2, 1, 2});
  FitConfig cfg;
  cfg.estimator = Mdpde{1.5};
  CHECK_THROWS_AS(fit(d, Link(LinkKind::logit), cfg), std::invalid_argument);
  cfg.estimator = Iannario{0.0, IannarioWeight::w1};
  CHECK_THROWS_AS(fit(d, Link(LinkKind::logit), cfg), std::invalid_argument);
  cfg.estimator = Mle{};
  cfg.grad_tol = 0.0;
  CHECK_THROWS_AS(fit(d, Link(LinkKind::logit), cfg), std::invalid_argument);

  CHECK(estimator_label(Mle{}) == "MLE");
  CHECK(estimator_label(Mdpde{0.3}) == "MDPDE(0.3)");
  CHECK(estimator_label(CrouxWml{}) == "Croux");
  CHECK(estimator_label(Iannario{1.5, IannarioWeight::w2}) == "Iannario(1.5,w2)");

  FitConfig wrong;
  wrong.init = Theta(vec({-1.0, 1.0}), vec({0.0}));
  CHECK_THROWS_AS(fit_mle(d, Link(LinkKind::logit), wrong), InvalidTheta);
}

TEST_CASE("iteration cap yields a non-converged fit", "[estimate]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 150);
  const Dataset d = generate(spec, 7);
  FitConfig cfg = quiet();
  cfg.max_iter = 1;
  const FitResult r = fit_mdpde(d, spec.link, 0.5, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.grad_norm > cfg.grad_tol);
  CHECK(r.theta_hat.gamma().allFinite());
}

TEST_CASE("unobserved category is reported", "[estimate]") {
  DesignMatrix x(6, 1);
  x << -1, -0.5, 0, 0.2, 0.6, 1.1;
  const Dataset d(x, {1, 1, 2, 1, 2, 2}, 3);
  const FitResult r = fit_mle(d, Link(LinkKind::logit), quiet());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("larger tuning parameter resists a vertical outlier", "[estimate][property]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 100);
  const int kOutliers = 1;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u, 17u, 18u}) {
    const Dataset clean = generate(spec, seed);
    // Rows with the smallest linear predictors are moved to the top category.
    std::vector<int> order(clean.n());
    for (int i = 0; i < clean.n(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return clean.row(a).dot(spec.truth.beta()) < clean.row(b).dot(spec.truth.beta());
    });
    std::vector<int> y = clean.y();
    for (int r = 0; r < kOutliers; ++r) y[order[r]] = clean.categories();
    const Dataset dirty(clean.x(), y, clean.categories());
    std::vector<double> shift;
    for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
      const FitResult a = fit_mdpde(clean, spec.link, alpha, quiet());
      const FitResult b = fit_mdpde(dirty, spec.link, alpha, quiet());
      REQUIRE(a.converged);
      REQUIRE(b.converged);
      shift.push_back((a.theta_hat.packed() - b.theta_hat.packed()).norm());
    }
    CHECK(shift[1] <= shift[0]);
    CHECK(shift[2] <= shift[1]);
    // At a = 1 the efficiency loss can outweigh the remaining outlier effect,
    // so only the comparison with the MLE is asserted there.
    CHECK(shift[3] < 0.5 * shift[0]);
  }
}
