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


#ifndef ORDPD_TUNING_HPP
#define ORDPD_TUNING_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ordpd/estimate.hpp"
#include "ordpd/inference.hpp"

namespace ordpd {

/// 0, 0.01, ..., 1.
std::vector<double> default_alpha_grid();

struct TuneConfig {
  std::vector<double> alpha_grid = default_alpha_grid();
  /// Either the tuning parameter of an MDPDE pilot fit or a fixed pilot.
  std::variant<double, Theta> pilot = 0.5;
  /// Ascending sweep where each fit starts at its neighbour's solution.  When
  /// false every grid point starts cold and points are fitted in parallel.
  bool warm_start = true;
  unsigned threads = 0;
  /// Iteration limits and tolerance for every fit.
  FitConfig fit;
};

/// (theta_alpha - pilot)^T (theta_alpha - pilot) + tr(Psi^{-1} Omega Psi^{-1}) / n.
double wj_mse(const Theta& theta_alpha, const Theta& theta_pilot, const Sandwich& s,
              int n);

struct TuneRow {
  double alpha = 0.0;
  double mse = 0.0;
  /// Sum of the standard errors.
  double se = 0.0;
  bool converged = false;
  std::optional<Theta> theta;
  std::string error;
};

struct TuneResult {
  double alpha_opt = 0.0;
  double mse_opt = 0.0;
  Theta theta_opt;
  Theta pilot;
  /// Sorted by alpha.
  std::vector<TuneRow> table;
};

/// Grid search for the alpha minimising wj_mse around the pilot.  Failed or
/// non-converged grid points are kept in the table and skipped by the argmin;
/// ties go to the smaller alpha.  Throws NoConvergence if the pilot fit fails
/// or no grid point is usable.
TuneResult select_alpha(const Dataset& data, const Link& link, const TuneConfig& cfg);

void write_tune_csv(std::ostream& out, const TuneResult& result);

}  // namespace ordpd

#endif  // ORDPD_TUNING_HPP
