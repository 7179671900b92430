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


#ifndef ORDPD_ROBUSTNESS_HPP
#define ORDPD_ROBUSTNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ordpd/estimate.hpp"
#include "ordpd/link.hpp"
#include "ordpd/model.hpp"

namespace ordpd {

// ---------------------------------------------------------------------------
// Influence function and gross error sensitivity

/// Influence of contaminating the i-th distribution at category t (1..m):
///   (1/n) Psi^{-1} [ p(t)^a u(t) - xi_i ],
/// with Psi and xi evaluated at the model.
Vector influence_contrib(const Theta& theta, const Link& link, const VectorRef& x,
                         int t, double alpha, const Matrix& psi_inv, int n);

enum class GesMode {
  per_observation,  // contamination of a single distribution, worst i and t
  joint_exact,      // all m^n assignments (t_1, ..., t_n)
  joint_heuristic,  // coordinate-wise direction alternation
};

GesMode ges_mode_from_name(std::string_view name);

/// Largest m^n that joint_exact will enumerate.
inline constexpr double kMaxExactAssignments = 1e6;

struct GesRequest {
  Theta theta;
  Link link;
  DesignMatrix x;
  std::vector<double> alpha_grid;
  GesMode mode = GesMode::joint_heuristic;
  std::uint64_t seed = 1;
  int random_starts = 8;
};

struct GesPoint {
  double alpha = 0.0;
  double joint = 0.0;
  /// Per-parameter GES in packed order (gamma_1.., beta_1..).  Always exact.
  Vector component;
};

std::vector<GesPoint> ges(const GesRequest& req);

/// Contributions v_i(t) for one alpha, indexed [i][t-1].
std::vector<std::vector<Vector>> influence_table(const Theta& theta, const Link& link,
                                                 const DesignMatrix& x, double alpha);

/// max over t-assignments of || sum_i v_i(t_i) ||, by enumeration.
double joint_ges_exact(const std::vector<std::vector<Vector>>& table);
/// Direction alternation from random and signed coordinate starts.
double joint_ges_heuristic(const std::vector<std::vector<Vector>>& table,
                           std::uint64_t seed, int random_starts);
/// max(sum_i max_t v_ik, -sum_i min_t v_ik) for every k.
Vector component_ges(const std::vector<std::vector<Vector>>& table);

// ---------------------------------------------------------------------------
// Generalized residuals

/// B_j(t) = A_j(t) (F(gamma_j - t) - F(gamma_{j-1} - t))^a over t_grid.
std::vector<double> dpd_generalized_residual(const Theta& theta, const Link& link,
                                             double alpha, int j,
                                             const std::vector<double>& t_grid);

// ---------------------------------------------------------------------------
// Implosion of the slope estimates

struct ImplosionScenario {
  std::string name = "implosion";
  Dataset base;
  Theta truth;
  Link link = Link(LinkKind::logit);
  /// Added points sit at s * direction with this response.
  Vector direction;
  int outlier_response = 3;
  std::vector<double> s_grid;
  int max_copies = 50;
};

/// x1, x2 ~ N(0,1), logistic errors, beta = (-1, 1.5), gamma = (-1, 1).
ImplosionScenario default_implosion_scenario(std::uint64_t seed, int n = 50);

Dataset with_copies(const Dataset& base, const VectorRef& x, int y, int copies);

struct ImplosionRow {
  std::string scenario;
  double s = 0.0;
  int outlier_count = 0;
  std::optional<double> alpha;
  std::string estimator;
  double beta_norm = 0.0;
  /// Argmax misclassification over the base-sample rows.
  double misclass_rate = 0.0;
  bool converged = false;
};

/// One added point for every s in the grid.
std::vector<ImplosionRow> implosion_scan(const ImplosionScenario& sc,
                                         const std::vector<EstimatorSpec>& estimators,
                                         unsigned threads = 0);
/// 1..max_copies copies of the point at s.
std::vector<ImplosionRow> implosion_sweep(const ImplosionScenario& sc, double s,
                                          const std::vector<EstimatorSpec>& estimators,
                                          unsigned threads = 0);

struct ImplosionMinimum {
  std::string estimator;
  std::optional<double> alpha;
  double min_beta_norm = 0.0;
  int copies = 0;
  /// copies / (n + copies)
  double proportion = 0.0;
};

/// Per estimator, the row with the smallest slope norm (first on ties).
std::vector<ImplosionMinimum> implosion_minima(const std::vector<ImplosionRow>& rows,
                                               int base_n);

void write_implosion_csv(std::ostream& out, const std::vector<ImplosionRow>& rows);

}  // namespace ordpd

#endif  // ORDPD_ROBUSTNESS_HPP
