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
#include <climits>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ordpd/errors.hpp"
#include "ordpd/simulate.hpp"
#include "ordpd/tuning.hpp"
#include "test_support.hpp"

using namespace ordpd;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> coarse_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 20; ++k) g.push_back(k / 20.0);
  return g;
}

Dataset contaminated_sample(std::uint64_t seed) {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 150);
  RandomStream rng(seed, 0);
  const Dataset clean = generate(spec, rng);
  Contamination c;
  c.kind = ContaminationKind::vertical;
  c.eps = 0.1;
  return contaminate(clean, c, spec, rng);
}

}  // namespace

TEST_CASE("default grid", "[tuning]") {
  const auto g = default_alpha_grid();
  REQUIRE(g.size() == 101);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[39] == 0.39);
}

TEST_CASE("empirical MSE decomposition", "[tuning]") {
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 200);
  const Dataset d = generate(spec, 21);
  const FitResult r = fit_mdpde(d, spec.link, 0.3);
  REQUIRE(r.converged);
  const Sandwich s = sandwich(r.theta_hat, spec.link, d, 0.3);

  // Pilot at the estimate: only the variance term remains, bit for bit.
  const double variance = wj_mse(r.theta_hat, r.theta_hat, s, d.n());
  const Matrix inv = guarded_inverse(s.psi_hat);
  CHECK(variance == (inv * s.omega_hat * inv).trace() / d.n());
  CHECK_THAT(variance, WithinRel(s.cov.trace(), 1e-10));

  const Theta pilot = spec.truth;
  const double bias = (r.theta_hat.packed() - pilot.packed()).squaredNorm();
  const double total = wj_mse(r.theta_hat, pilot, s, d.n());
  CHECK_THAT(total - variance, WithinAbs(bias, 1e-14));
  // Large n leaves the bias term.
  CHECK_THAT(wj_mse(r.theta_hat, pilot, s, INT_MAX), WithinAbs(bias, 1e-8));

  const Theta wrong(testing::vec({0.0}), testing::vec({1.0}));
  CHECK_THROWS_AS(wj_mse(wrong, pilot, s, d.n()), std::invalid_argument);
}

TEST_CASE("selection matches a re-scan of its table", "[tuning][property]") {
  for (std::uint64_t seed : {31u, 32u}) {
    const Dataset d = contaminated_sample(seed);
    TuneConfig cfg;
    cfg.alpha_grid = coarse_grid();
    const TuneResult r = select_alpha(d, Link(LinkKind::probit), cfg);
    REQUIRE(r.table.size() == cfg.alpha_grid.size());
    double best = INFINITY, best_alpha = -1.0;
    for (const auto& row : r.table) {
      if (row.converged && std::isfinite(row.mse) && row.mse < best) {
        best = row.mse;
        best_alpha = row.alpha;
      }
    }
    CHECK(r.alpha_opt == best_alpha);
    CHECK(r.mse_opt == best);
    const auto& winner = *std::find_if(r.table.begin(), r.table.end(),
                                       [&](const TuneRow& row) { return row.alpha == best_alpha; });
    CHECK(winner.theta->packed() == r.theta_opt.packed());
    for (std::size_t k = 1; k < r.table.size(); ++k)
      CHECK(r.table[k - 1].alpha < r.table[k].alpha);
    // Contamination pushes the choice away from the MLE.
    CHECK(r.alpha_opt > 0.0);
  }
}

TEST_CASE("grid order does not matter", "[tuning][property]") {
  const Dataset d = contaminated_sample(33);
  TuneConfig cfg;
  cfg.alpha_grid = coarse_grid();
  const TuneResult sorted = select_alpha(d, Link(LinkKind::probit), cfg);
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 3; ++rep) {
    std::shuffle(cfg.alpha_grid.begin(), cfg.alpha_grid.end(), gen);
    const TuneResult shuffled = select_alpha(d, Link(LinkKind::probit), cfg);
    CHECK(shuffled.alpha_opt == sorted.alpha_opt);
    CHECK(shuffled.mse_opt == sorted.mse_opt);
  }
  // Duplicates collapse.
  cfg.alpha_grid = {0.5, 0.0, 0.5, 1.0, 0.0};
  CHECK(select_alpha(d, Link(LinkKind::probit), cfg).table.size() == 3);
}

TEST_CASE("warm and cold sweeps agree", "[tuning]") {
  const Dataset d = contaminated_sample(34);
  TuneConfig cfg;
  cfg.alpha_grid = coarse_grid();
  const TuneResult warm = select_alpha(d, Link(LinkKind::probit), cfg);
  cfg.warm_start = false;
  const TuneResult cold = select_alpha(d, Link(LinkKind::probit), cfg);
  CHECK(warm.alpha_opt == cold.alpha_opt);
  for (std::size_t k = 0; k < warm.table.size(); ++k) {
    REQUIRE(warm.table[k].converged);
    REQUIRE(cold.table[k].converged);
    CHECK_THAT(warm.table[k].mse, WithinRel(cold.table[k].mse, 1e-6));
  }
}

TEST_CASE("pilot handling", "[tuning]") {
  const Dataset d = contaminated_sample(35);
  TuneConfig cfg;
  cfg.alpha_grid = {0.0, 0.5, 1.0};
  const TuneResult auto_pilot = select_alpha(d, Link(LinkKind::probit), cfg);

  // A fixed pilot equal to the fitted one reproduces the table.
  cfg.pilot = auto_pilot.pilot;
  const TuneResult fixed = select_alpha(d, Link(LinkKind::probit), cfg);
  CHECK(fixed.alpha_opt == auto_pilot.alpha_opt);
  CHECK(fixed.mse_opt == auto_pilot.mse_opt);

  // Pilot at a = 0.5 and the grid point at 0.5 coincide: zero bias term there.
  const auto& mid = auto_pilot.table[1];
  REQUIRE(mid.alpha == 0.5);
  CHECK((mid.theta->packed() - auto_pilot.pilot.packed()).cwiseAbs().maxCoeff() < 1e-6);

  cfg.pilot = 0.5;
  cfg.fit.max_iter = 1;
  CHECK_THROWS_AS(select_alpha(d, Link(LinkKind::probit), cfg), NoConvergence);
}

TEST_CASE("invalid grids", "[tuning]") {
  const Dataset d = contaminated_sample(36);
  TuneConfig cfg;
  cfg.alpha_grid = {};
  CHECK_THROWS_AS(select_alpha(d, Link(LinkKind::probit), cfg), std::invalid_argument);
  cfg.alpha_grid = {0.2, 1.2};
  CHECK_THROWS_AS(select_alpha(d, Link(LinkKind::probit), cfg), std::invalid_argument);
}

TEST_CASE("tuning table CSV", "[tuning]") {
  const Dataset d = contaminated_sample(37);
  TuneConfig cfg;
  cfg.alpha_grid = {0.0, 0.25};
  const TuneResult r = select_alpha(d, Link(LinkKind::probit), cfg);
  std::ostringstream out;
  write_tune_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "alpha,mse,se,converged");
  std::getline(in, line);
  CHECK(line.rfind("0,", 0) == 0);
  CHECK(line.substr(line.size() - 4) == "true");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}
