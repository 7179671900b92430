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


#include "ordpd/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "ordpd/errors.hpp"
#include "ordpd/parallel.hpp"

namespace ordpd {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
  return grid;
}

double wj_mse(const Theta& theta_alpha, const Theta& theta_pilot, const Sandwich& s,
              int n) {
  if (theta_alpha.dim() != theta_pilot.dim() || s.psi_hat.rows() != theta_alpha.dim())
    throw std::invalid_argument("dimensions of theta, pilot and sandwich differ");
  const Vector diff = theta_alpha.packed() - theta_pilot.packed();
  const Matrix inv = guarded_inverse(s.psi_hat);
  const double variance = (inv * s.omega_hat * inv).trace() / n;
  return diff.squaredNorm() + variance;
}

namespace {

void evaluate_point(const Dataset& data, const Link& link, const Theta& pilot,
                    const FitConfig& base, const std::optional<Theta>& init,
                    TuneRow& row) {
  FitConfig cfg = base;
  cfg.estimator = Mdpde{row.alpha};
  cfg.covariance = false;
  cfg.init = init;
  try {
    const FitResult r = fit_mdpde(data, link, row.alpha, cfg);
    row.theta = r.theta_hat;
    row.converged = r.converged;
    const Sandwich s = sandwich(r.theta_hat, link, data, row.alpha);
    row.mse = wj_mse(r.theta_hat, pilot, s, data.n());
    row.se = s.total_se();
  } catch (const Error& e) {
    row.mse = std::numeric_limits<double>::quiet_NaN();
    row.se = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
  }
}

}  // namespace

TuneResult select_alpha(const Dataset& data, const Link& link, const TuneConfig& cfg) {
  if (cfg.alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
  std::vector<double> grid = cfg.alpha_grid;
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha grid must lie in [0,1]");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::optional<Theta> pilot;
  if (const auto* fixed = std::get_if<Theta>(&cfg.pilot)) {
    pilot = *fixed;
  } else {
    const double pilot_alpha = std::get<double>(cfg.pilot);
    FitConfig pc = cfg.fit;
    pc.covariance = false;
    const FitResult r = fit_mdpde(data, link, pilot_alpha, pc);
    if (!r.converged)
      throw NoConvergence(fmt::format("pilot fit at alpha={:g} did not converge ({})",
                                      pilot_alpha, r.status));
    pilot = r.theta_hat;
  }

  std::vector<TuneRow> table(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) table[k].alpha = grid[k];
  if (cfg.warm_start) {
    std::optional<Theta> previous = cfg.fit.init;
    for (auto& row : table) {
      evaluate_point(data, link, *pilot, cfg.fit, previous, row);
      if (row.converged) previous = row.theta;
    }
  } else {
    parallel_for(table.size(), cfg.threads, [&](std::size_t k) {
      evaluate_point(data, link, *pilot, cfg.fit, cfg.fit.init, table[k]);
    });
  }

  const TuneRow* best = nullptr;
  for (const auto& row : table) {
    if (!row.converged || !std::isfinite(row.mse)) continue;
    if (best == nullptr || row.mse < best->mse) best = &row;
  }
  if (best == nullptr) throw NoConvergence("no grid point produced a usable fit");
  return TuneResult{best->alpha, best->mse, *best->theta, *pilot, std::move(table)};
}

void write_tune_csv(std::ostream& out, const TuneResult& result) {
  out << "alpha,mse,se,converged\n";
  for (const auto& row : result.table)
    out << fmt::format("{:.17g},{:.17g},{:.17g},{}\n", row.alpha, row.mse, row.se,
                       row.converged ? "true" : "false");
}

}  // namespace ordpd
