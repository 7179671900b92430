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


#include "ordpd/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "ordpd/errors.hpp"
#include "ordpd/inference.hpp"
#include "ordpd/parallel.hpp"
#include "ordpd/rng.hpp"
#include "ordpd/table_io.hpp"

namespace ordpd {

using InfluenceTable = std::vector<std::vector<Vector>>;

Vector influence_contrib(const Theta& theta, const Link& link, const VectorRef& x,
                         int t, double alpha, const Matrix& psi_inv, int n) {
  const CutTerms terms(theta, link, x);
  const int m = terms.categories();
  if (t < 1 || t > m) throw std::out_of_range("contamination point outside 1..m");
  Vector v = Vector::Zero(theta.dim());
  for (int j = 1; j <= m; ++j)
    terms.add_prob_gradient(j, x, -power(terms.prob[j - 1], alpha), v);
  const double pt = terms.prob[t - 1];
  if (alpha < 1.0 && pt <= kUnderflowThreshold)
    throw DegenerateProbability(
        fmt::format("model probability of category {} underflows", t));
  // p^a u = p^{a-1} grad p
  terms.add_prob_gradient(t, x, power(pt, alpha - 1.0), v);
  return psi_inv * v / static_cast<double>(n);
}

GesMode ges_mode_from_name(std::string_view name) {
  if (name == "per_observation") return GesMode::per_observation;
  if (name == "joint_exact") return GesMode::joint_exact;
  if (name == "joint_heuristic") return GesMode::joint_heuristic;
  throw std::invalid_argument(fmt::format("unknown GES mode '{}'", name));
}

InfluenceTable influence_table(const Theta& theta, const Link& link,
                               const DesignMatrix& x, double alpha) {
  const int n = static_cast<int>(x.rows());
  const int m = theta.categories();
  // The responses are irrelevant to the model-based Psi.
  const Dataset design(x, std::vector<int>(n, 1), m);
  const Matrix psi_inv = guarded_inverse(psi_model_n(theta, link, design, alpha));
  InfluenceTable table(n);
  for (int i = 0; i < n; ++i) {
    table[i].reserve(m);
    for (int t = 1; t <= m; ++t)
      table[i].push_back(influence_contrib(theta, link, design.row(i), t, alpha,
                                           psi_inv, n));
  }
  return table;
}

double joint_ges_exact(const InfluenceTable& table) {
  const std::size_t n = table.size();
  if (n == 0) throw std::invalid_argument("GES needs at least one observation");
  const std::size_t m = table[0].size();
  if (n * std::log(static_cast<double>(m)) > std::log(kMaxExactAssignments) + 1e-9)
    throw ExactTooLarge(fmt::format("{}^{} assignments exceed the enumeration cap", m, n));
  const Eigen::Index q = table[0][0].size();
  // Depth-first over observations with partial sums kept per level.
  std::vector<Vector> partial(n + 1, Vector::Zero(q));
  std::vector<std::size_t> choice(n, 0);
  double best = 0.0;
  std::size_t level = 0;
  for (;;) {
    if (level == n) {
      best = std::max(best, partial[n].norm());
      do {
        if (level == 0) return best;
        --level;
      } while (++choice[level] == m);
    }
    partial[level + 1] = partial[level] + table[level][choice[level]];
    ++level;
    if (level < n) choice[level] = 0;
  }
}

namespace {

double alternate_from(const InfluenceTable& table, Vector direction) {
  const std::size_t n = table.size();
  const std::size_t m = table[0].size();
  std::vector<std::size_t> assign(n, m);
  double best = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    Vector sum = Vector::Zero(direction.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double top = direction.dot(table[i][0]);
      for (std::size_t t = 1; t < m; ++t) {
        const double v = direction.dot(table[i][t]);
        if (v > top) {
          top = v;
          arg = t;
        }
      }
      changed = changed || arg != assign[i];
      assign[i] = arg;
      sum += table[i][arg];
    }
    const double norm = sum.norm();
    best = std::max(best, norm);
    if (!changed || norm == 0.0) break;
    direction = sum / norm;
  }
  return best;
}

}  // namespace

double joint_ges_heuristic(const InfluenceTable& table, std::uint64_t seed,
                           int random_starts) {
  if (table.empty()) throw std::invalid_argument("GES needs at least one observation");
  const Eigen::Index q = table[0][0].size();
  double best = 0.0;
  for (Eigen::Index k = 0; k < q; ++k) {
    for (double sign : {1.0, -1.0}) {
      Vector u = Vector::Zero(q);
      u[k] = sign;
      best = std::max(best, alternate_from(table, std::move(u)));
    }
  }
  const Link normal(LinkKind::probit);
  for (int s = 0; s < random_starts; ++s) {
    RandomStream rng(seed, static_cast<std::uint64_t>(s));
    Vector u(q);
    for (Eigen::Index k = 0; k < q; ++k) u[k] = normal.quantile(rng.uniform());
    best = std::max(best, alternate_from(table, u / u.norm()));
  }
  return best;
}

Vector component_ges(const InfluenceTable& table) {
  if (table.empty()) throw std::invalid_argument("GES needs at least one observation");
  const Eigen::Index q = table[0][0].size();
  Vector hi = Vector::Zero(q);
  Vector lo = Vector::Zero(q);
  for (const auto& row : table) {
    Vector row_max = row[0];
    Vector row_min = row[0];
    for (std::size_t t = 1; t < row.size(); ++t) {
      row_max = row_max.cwiseMax(row[t]);
      row_min = row_min.cwiseMin(row[t]);
    }
    hi += row_max;
    lo += row_min;
  }
  return hi.cwiseMax(-lo);
}

std::vector<GesPoint> ges(const GesRequest& req) {
  if (req.x.rows() == 0) throw std::invalid_argument("GES needs at least one observation");
  std::vector<GesPoint> out;
  for (double alpha : req.alpha_grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("alpha grid must lie in [0,1]");
    const InfluenceTable table = influence_table(req.theta, req.link, req.x, alpha);
    GesPoint point;
    point.alpha = alpha;
    point.component = component_ges(table);
    switch (req.mode) {
      case GesMode::per_observation:
        for (const auto& row : table)
          for (const auto& v : row) point.joint = std::max(point.joint, v.norm());
        break;
      case GesMode::joint_exact:
        point.joint = joint_ges_exact(table);
        break;
      case GesMode::joint_heuristic:
        point.joint = joint_ges_heuristic(table, req.seed, req.random_starts);
        break;
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<double> dpd_generalized_residual(const Theta& theta, const Link& link,
                                             double alpha, int j,
                                             const std::vector<double>& t_grid) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const double a = residual_factor(theta, link, t, j);
    out.push_back(a * power(category_prob_at(theta, link, t, j), alpha));
  }
  return out;
}

ImplosionScenario default_implosion_scenario(std::uint64_t seed, int n) {
  const Theta truth((Vector(2) << -1.0, 1.0).finished(),
                    (Vector(2) << -1.0, 1.5).finished());
  const Link logistic(LinkKind::logit);
  const Link normal(LinkKind::probit);
  RandomStream rng(seed, 0);
  DesignMatrix x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal.quantile(rng.uniform());
    x(i, 1) = normal.quantile(rng.uniform());
    const double latent = x.row(i).dot(truth.beta()) + logistic.quantile(rng.uniform());
    y[i] = latent <= truth.gamma()[0] ? 1 : latent <= truth.gamma()[1] ? 2 : 3;
  }
  std::vector<double> s_grid;
  for (int k = -40; k <= 40; ++k) s_grid.push_back(0.25 * k);
  return ImplosionScenario{"implosion",
                           Dataset(std::move(x), std::move(y), 3, {"x1", "x2"}),
                           truth,
                           logistic,
                           (Vector(2) << 1.0, -1.0).finished(),
                           3,
                           std::move(s_grid),
                           50};
}

Dataset with_copies(const Dataset& base, const VectorRef& x, int y, int copies) {
  const int n = base.n();
  DesignMatrix xs(n + copies, base.p());
  xs.topRows(n) = base.x();
  std::vector<int> ys = base.y();
  for (int k = 0; k < copies; ++k) {
    xs.row(n + k) = x.transpose();
    ys.push_back(y);
  }
  return Dataset(std::move(xs), std::move(ys), base.categories(), base.column_names());
}

namespace {

std::optional<double> spec_alpha(const EstimatorSpec& spec) {
  if (std::holds_alternative<Mle>(spec)) return 0.0;
  if (const auto* m = std::get_if<Mdpde>(&spec)) return m->alpha;
  return std::nullopt;
}

struct Cell {
  std::size_t estimator;
  double s;
  int copies;
};

std::vector<ImplosionRow> run_cells(const ImplosionScenario& sc,
                                    const std::vector<EstimatorSpec>& estimators,
                                    const std::vector<Cell>& cells, unsigned threads) {
  // Every contaminated fit starts from the clean fit of the same estimator.
  std::vector<std::optional<Theta>> clean(estimators.size());
  parallel_for(estimators.size(), threads, [&](std::size_t e) {
    FitConfig cfg;
    cfg.estimator = estimators[e];
    cfg.covariance = false;
    clean[e] = fit(sc.base, sc.link, cfg).theta_hat;
  });
  std::vector<ImplosionRow> rows(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const EstimatorSpec& spec = estimators[cell.estimator];
    ImplosionRow row;
    row.scenario = sc.name;
    row.s = cell.s;
    row.outlier_count = cell.copies;
    row.alpha = spec_alpha(spec);
    row.estimator = estimator_label(spec);
    const Vector point = cell.s * sc.direction;
    const Dataset data = with_copies(sc.base, point, sc.outlier_response, cell.copies);
    FitConfig cfg;
    cfg.estimator = spec;
    cfg.covariance = false;
    cfg.init = clean[cell.estimator];
    try {
      const FitResult r = fit(data, sc.link, cfg);
      row.beta_norm = r.theta_hat.beta().norm();
      row.converged = r.converged;
      int wrong = 0;
      for (int i = 0; i < sc.base.n(); ++i)
        wrong += most_probable_category(r.theta_hat, sc.link, sc.base.row(i)) !=
                 sc.base.y()[i];
      row.misclass_rate = static_cast<double>(wrong) / sc.base.n();
    } catch (const Error&) {
      row.beta_norm = std::nan("");
      row.misclass_rate = std::nan("");
      row.converged = false;
    }
    rows[c] = std::move(row);
  });
  return rows;
}

}  // namespace

std::vector<ImplosionRow> implosion_scan(const ImplosionScenario& sc,
                                         const std::vector<EstimatorSpec>& estimators,
                                         unsigned threads) {
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < estimators.size(); ++e)
    for (double s : sc.s_grid) cells.push_back({e, s, 1});
  return run_cells(sc, estimators, cells, threads);
}

std::vector<ImplosionRow> implosion_sweep(const ImplosionScenario& sc, double s,
                                          const std::vector<EstimatorSpec>& estimators,
                                          unsigned threads) {
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < estimators.size(); ++e)
    for (int k = 1; k <= sc.max_copies; ++k) cells.push_back({e, s, k});
  return run_cells(sc, estimators, cells, threads);
}

std::vector<ImplosionMinimum> implosion_minima(const std::vector<ImplosionRow>& rows,
                                               int base_n) {
  std::vector<ImplosionMinimum> out;
  for (const auto& row : rows) {
    if (std::isnan(row.beta_norm)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const ImplosionMinimum& m) {
      return m.estimator == row.estimator;
    });
    if (it == out.end()) {
      out.push_back({row.estimator, row.alpha, row.beta_norm, row.outlier_count, 0.0});
      it = out.end() - 1;
    } else if (row.beta_norm < it->min_beta_norm) {
      it->min_beta_norm = row.beta_norm;
      it->copies = row.outlier_count;
    }
    it->proportion = static_cast<double>(it->copies) / (base_n + it->copies);
  }
  return out;
}

void write_implosion_csv(std::ostream& out, const std::vector<ImplosionRow>& rows) {
  out << "scenario,s,outlier_count,alpha,estimator,beta_norm,misclass_rate,converged\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{:.17g},{},{},{},{:.17g},{:.17g},{}\n", r.scenario, r.s,
                       r.outlier_count, r.alpha ? fmt::format("{:.17g}", *r.alpha) : "",
                       csv_field(r.estimator), r.beta_norm, r.misclass_rate,
                       r.converged ? "true" : "false");
  }
}

}  // namespace ordpd
