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


#include "ordpd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "ordpd/errors.hpp"
#include "ordpd/parallel.hpp"
#include "ordpd/table_io.hpp"

namespace ordpd {

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

[[noreturn]] void unlisted(int id, const Link& link) {
  throw std::invalid_argument(
      fmt::format("model {} is not defined for the {} link", id, link.name()));
}

double standard_normal(RandomStream& rng) {
  static const Link normal(LinkKind::probit);
  return normal.quantile(rng.uniform());
}

Matrix cholesky_factor(const Matrix& cov) {
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::logic_error("covariate covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

ModelSpec model_spec(int id, const Link& link, int n) {
  if (n < 2) throw std::invalid_argument("sample size must be at least 2");
  const LinkKind k = link.kind();
  auto make = [&](Vector gamma, Vector beta, std::string design) {
    return ModelSpec{id, link, Theta(std::move(gamma), std::move(beta)), n,
                     std::move(design)};
  };
  switch (id) {
    case 1:
      if (k != LinkKind::probit && k != LinkKind::cloglog) unlisted(id, link);
      return make(vec({-0.7, 0.0, 1.5, 2.9}), vec({2.5, 1.2, 0.5}),
                  "three exclusive 0-1 covariates; the states none/X1/X2/X3 "
                  "each with probability 1/4");
    case 2:
      if (k == LinkKind::probit)
        return make(vec({-1.7, -0.5, 0.5, 1.7}), vec({1.5}), "X ~ N(0,1)");
      if (k == LinkKind::logit || k == LinkKind::cauchit)
        return make(vec({-2.1, -0.6, 0.6, 2.1}), vec({1.5}), "X ~ N(0,1)");
      unlisted(id, link);
    case 3: {
      const char* design = "(X1, X2) normal, Var 1 and 4, Cov 1.2";
      if (k == LinkKind::probit)
        return make(vec({-2.3, 0.0, 2.3}), vec({1.5, 0.7}), design);
      if (k == LinkKind::logit)
        return make(vec({-2.6, 0.0, 2.6}), vec({1.5, 0.7}), design);
      unlisted(id, link);
    }
    case 4: {
      const char* design =
          "(X1, X2, X3) normal, Var 1, 4, 9, Cov(1,2) 1.5, Cov(1,3) 0.8, Cov(2,3) 2.5";
      if (k == LinkKind::probit)
        return make(vec({-3.8, 3.8}), vec({2.5, 1.2, 0.7}), design);
      if (k == LinkKind::logit) return make(vec({-4.0, 4.0}), vec({2.5, 1.2, 0.7}), design);
      unlisted(id, link);
    }
    case 5: {
      const char* design = "(D, X, X*D), D ~ Bernoulli(1/2), X ~ N(0,1)";
      if (k == LinkKind::probit || k == LinkKind::cloglog)
        return make(vec({-1.0, 1.0, 3.0}), vec({2.5, 1.2, 0.7}), design);
      if (k == LinkKind::logit)
        return make(vec({-1.4, 1.1, 3.4}), vec({2.5, 1.2, 0.7}), design);
      unlisted(id, link);
    }
    default:
      throw std::invalid_argument(fmt::format("unknown simulation model {}", id));
  }
}

DesignMatrix draw_covariates(const ModelSpec& spec, RandomStream& rng) {
  const int n = spec.n;
  DesignMatrix x = DesignMatrix::Zero(n, spec.truth.covariates());
  switch (spec.id) {
    case 1:
      for (int i = 0; i < n; ++i) {
        const auto state = static_cast<int>(rng.below(4));
        if (state > 0) x(i, state - 1) = 1.0;
      }
      break;
    case 2:
      for (int i = 0; i < n; ++i) x(i, 0) = standard_normal(rng);
      break;
    case 3:
    case 4: {
      Matrix cov;
      if (spec.id == 3)
        cov = (Matrix(2, 2) << 1.0, 1.2, 1.2, 4.0).finished();
      else
        cov = (Matrix(3, 3) << 1.0, 1.5, 0.8, 1.5, 4.0, 2.5, 0.8, 2.5, 9.0).finished();
      const Matrix chol = cholesky_factor(cov);
      Vector z(cov.rows());
      for (int i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = standard_normal(rng);
        x.row(i) = (chol * z).transpose();
      }
      break;
    }
    case 5:
      for (int i = 0; i < n; ++i) {
        const double d = rng.uniform() < 0.5 ? 1.0 : 0.0;
        const double v = standard_normal(rng);
        x(i, 0) = d;
        x(i, 1) = v;
        x(i, 2) = v * d;
      }
      break;
    default:
      throw std::invalid_argument(fmt::format("unknown simulation model {}", spec.id));
  }
  return x;
}

Dataset generate(const ModelSpec& spec, RandomStream& rng) {
  DesignMatrix x = draw_covariates(spec, rng);
  const Vector& gamma = spec.truth.gamma();
  const int m = spec.truth.categories();
  std::vector<int> y(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double latent =
        x.row(i).dot(spec.truth.beta()) + spec.link.quantile(rng.uniform());
    int j = 1;
    while (j < m && latent > gamma[j - 1]) ++j;
    y[i] = j;
  }
  return Dataset(std::move(x), std::move(y), m);
}

Dataset generate(const ModelSpec& spec, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  return generate(spec, rng);
}

void Contamination::validate() const {
  if (kind == ContaminationKind::vertical || kind == ContaminationKind::horizontal) {
    if (!(eps > 0.0 && eps < 0.5))
      throw std::invalid_argument("contamination proportion must lie in (0, 0.5)");
  }
  if (kind == ContaminationKind::link_misspec && !fit_link)
    throw std::invalid_argument("link misspecification needs a fitting link");
}

int contaminated_count(double eps, int n) {
  return static_cast<int>(std::ceil(eps * n - 1e-9));
}

namespace {

// Partial Fisher-Yates: `count` distinct entries of `pool`, in draw order.
std::vector<int> sample_rows(std::vector<int> pool, int count, RandomStream& rng) {
  for (int k = 0; k < count; ++k) {
    const auto r = k + static_cast<int>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[r]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

Dataset contaminate(const Dataset& data, const Contamination& c, const ModelSpec& spec,
                    RandomStream& rng, std::vector<std::string>* log) {
  c.validate();
  const int n = data.n();
  if (c.kind == ContaminationKind::none || c.kind == ContaminationKind::link_misspec)
    return data;
  const int count = contaminated_count(c.eps, n);
  if (count == 0) return data;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  DesignMatrix x = data.x();
  std::vector<int> y = data.y();
  if (c.kind == ContaminationKind::vertical) {
    std::vector<int> pool = all;
    if (!c.uniform_rows) {
      const Vector eta = x * spec.truth.beta();
      std::vector<double> sorted(eta.data(), eta.data() + n);
      std::sort(sorted.begin(), sorted.end());
      const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      std::vector<int> low;
      for (int i = 0; i < n; ++i)
        if (eta[i] < median) low.push_back(i);
      if (static_cast<int>(low.size()) >= count) {
        pool = std::move(low);
      } else if (log) {
        log->push_back(fmt::format(
            "only {} rows below the median linear predictor for {} vertical outliers; "
            "rows chosen uniformly",
            low.size(), count));
      }
    }
    for (int i : sample_rows(std::move(pool), count, rng)) y[i] = data.categories();
  } else {
    if (c.column < 0 || c.column >= data.p())
      throw std::invalid_argument("horizontal contamination column out of range");
    for (int i : sample_rows(all, count, rng)) x(i, c.column) = c.value;
  }
  return Dataset(std::move(x), std::move(y), data.categories(), data.column_names());
}

Link fitting_link(const Contamination& c, const ModelSpec& spec) {
  if (c.kind == ContaminationKind::link_misspec && c.fit_link) return *c.fit_link;
  return spec.link;
}

McReport run_study(const StudyConfig& cfg) {
  if (cfg.replications < 2) throw std::invalid_argument("need at least two replications");
  if (cfg.estimators.empty()) throw std::invalid_argument("no estimators requested");
  cfg.contamination.validate();
  const Link link = fitting_link(cfg.contamination, cfg.model);
  const std::size_t ne = cfg.estimators.size();
  const auto B = static_cast<std::size_t>(cfg.replications);

  // estimates[b][e] is empty when the fit failed.
  std::vector<std::vector<std::optional<Vector>>> estimates(
      B, std::vector<std::optional<Vector>>(ne));
  std::vector<std::vector<std::string>> logs(B);
  parallel_for(B, cfg.threads, [&](std::size_t b) {
    RandomStream rng(cfg.seed, b);
    const Dataset clean = generate(cfg.model, rng);
    const Dataset data = contaminate(clean, cfg.contamination, cfg.model, rng, &logs[b]);
    for (std::size_t e = 0; e < ne; ++e) {
      FitConfig fc = cfg.fit;
      fc.estimator = cfg.estimators[e];
      fc.covariance = false;
      try {
        const FitResult r = fit(data, link, fc);
        if (r.converged) estimates[b][e] = r.theta_hat.packed();
      } catch (const Error&) {
      }
    }
  });

  McReport report{cfg, {}, {}};
  const Theta& truth = cfg.model.truth;
  const int cuts = truth.categories() - 1;
  const int p = truth.covariates();
  for (std::size_t e = 0; e < ne; ++e) {
    EstimatorSummary s{estimator_label(cfg.estimators[e]), cfg.estimators[e],
                       Vector::Zero(cuts), Vector::Zero(p)};
    Vector sum = Vector::Zero(truth.dim());
    double se_gamma = 0.0;
    double se_beta = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto& est = estimates[b][e];
      if (!est) {
        ++s.failures;
        continue;
      }
      ++s.used;
      sum += *est;
      se_gamma += (est->head(cuts) - truth.gamma()).squaredNorm();
      se_beta += (est->tail(p) - truth.beta()).squaredNorm();
    }
    if (s.used > 0) {
      const Vector mean = sum / s.used;
      s.mean_gamma = mean.head(cuts);
      s.mean_beta = mean.tail(p);
      s.bias2_gamma = (s.mean_gamma - truth.gamma()).squaredNorm();
      s.bias2_beta = (s.mean_beta - truth.beta()).squaredNorm();
      s.mse_gamma = se_gamma / s.used;
      s.mse_beta = se_beta / s.used;
    } else {
      s.mean_gamma.setConstant(std::nan(""));
      s.mean_beta.setConstant(std::nan(""));
      s.bias2_gamma = s.bias2_beta = s.mse_gamma = s.mse_beta = std::nan("");
    }
    report.rows.push_back(std::move(s));
  }
  const auto mle = std::find_if(report.rows.begin(), report.rows.end(),
                                [](const EstimatorSummary& s) {
                                  return std::holds_alternative<Mle>(s.spec);
                                });
  if (mle != report.rows.end() && mle->used > 0) {
    const double reference = mle->mse_theta();
    for (auto& s : report.rows)
      if (s.used > 0) s.efficiency = reference / s.mse_theta();
  }
  for (std::size_t b = 0; b < B; ++b)
    for (const auto& line : logs[b])
      report.notes.push_back(fmt::format("replication {}: {}", b, line));
  return report;
}

namespace {

Contamination contamination_from_json(const nlohmann::json& j) {
  Contamination c;
  if (j.is_null()) return c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    c.kind = ContaminationKind::none;
  } else if (kind == "vertical") {
    c.kind = ContaminationKind::vertical;
    c.eps = j.at("eps").get<double>();
    c.uniform_rows = j.value("selection", std::string("low_predictor")) == "uniform";
  } else if (kind == "horizontal") {
    c.kind = ContaminationKind::horizontal;
    c.eps = j.at("eps").get<double>();
    c.value = j.value("value", 5.0);
    c.column = j.value("column", 0);
  } else if (kind == "link_misspec") {
    c.kind = ContaminationKind::link_misspec;
    c.fit_link = Link::from_name(j.at("fit_link").get<std::string>());
  } else {
    throw std::invalid_argument(fmt::format("unknown contamination kind '{}'", kind));
  }
  c.validate();
  return c;
}

nlohmann::json contamination_to_json(const Contamination& c) {
  switch (c.kind) {
    case ContaminationKind::none: return {{"kind", "none"}};
    case ContaminationKind::vertical:
      return {{"kind", "vertical"},
              {"eps", c.eps},
              {"selection", c.uniform_rows ? "uniform" : "low_predictor"}};
    case ContaminationKind::horizontal:
      return {{"kind", "horizontal"}, {"eps", c.eps}, {"value", c.value}, {"column", c.column}};
    case ContaminationKind::link_misspec:
      return {{"kind", "link_misspec"}, {"fit_link", std::string(c.fit_link->name())}};
  }
  return {};
}

nlohmann::json vector_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

EstimatorSpec estimator_from_json(const nlohmann::json& j, const Link& link) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mle") return Mle{};
  if (kind == "mdpde") {
    const double alpha = j.at("alpha").get<double>();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
    return Mdpde{alpha};
  }
  if (kind == "croux") return CrouxWml{};
  if (kind == "iannario") {
    Iannario s{default_iannario_c(link), default_iannario_weight(link)};
    if (j.contains("c")) s.c = j.at("c").get<double>();
    if (j.contains("weight"))
      s.weight = iannario_weight_from_name(j.at("weight").get<std::string>());
    if (!(s.c > 0.0)) throw std::invalid_argument("tuning constant c must be positive");
    return s;
  }
  throw std::invalid_argument(fmt::format("unknown estimator kind '{}'", kind));
}

StudyConfig study_from_json(const nlohmann::json& j) {
  const Link link = Link::from_name(j.at("link").get<std::string>());
  StudyConfig cfg{model_spec(j.at("model_id").get<int>(), link, j.at("n").get<int>()),
                  contamination_from_json(j.value("contamination", nlohmann::json())),
                  {},
                  j.at("B").get<int>(),
                  j.value("seed", std::uint64_t{1}),
                  j.value("threads", 0u),
                  {}};
  cfg.fit.max_iter = j.value("max_iter", cfg.fit.max_iter);
  cfg.fit.grad_tol = j.value("grad_tol", cfg.fit.grad_tol);
  const Link fit_link = fitting_link(cfg.contamination, cfg.model);
  for (const auto& e : j.at("estimators")) cfg.estimators.push_back(estimator_from_json(e, fit_link));
  return cfg;
}

void write_report_csv(std::ostream& out, const McReport& report) {
  out << "estimator,bias2_gamma,bias2_beta,mse_gamma,mse_beta,mse_theta,efficiency,"
         "replications,failures\n";
  for (const auto& s : report.rows) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n", csv_field(s.label),
                       s.bias2_gamma, s.bias2_beta, s.mse_gamma, s.mse_beta, s.mse_theta(),
                       s.efficiency ? fmt::format("{:.17g}", *s.efficiency) : "", s.used,
                       s.failures);
  }
}

nlohmann::json report_to_json(const McReport& report) {
  const StudyConfig& c = report.config;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : report.rows) {
    rows.push_back({{"estimator", s.label},
                    {"mean_gamma", vector_json(s.mean_gamma)},
                    {"mean_beta", vector_json(s.mean_beta)},
                    {"bias2_gamma", s.bias2_gamma},
                    {"bias2_beta", s.bias2_beta},
                    {"mse_gamma", s.mse_gamma},
                    {"mse_beta", s.mse_beta},
                    {"mse_theta", s.mse_theta()},
                    {"efficiency", s.efficiency ? nlohmann::json(*s.efficiency) : nlohmann::json()},
                    {"replications", s.used},
                    {"failures", s.failures}});
  }
  return {{"model_id", c.model.id},
          {"link", std::string(c.model.link.name())},
          {"fit_link", std::string(fitting_link(c.contamination, c.model).name())},
          {"n", c.model.n},
          {"B", c.replications},
          {"seed", c.seed},
          {"covariates", c.model.covariates},
          {"gamma", vector_json(c.model.truth.gamma())},
          {"beta", vector_json(c.model.truth.beta())},
          {"contamination", contamination_to_json(c.contamination)},
          {"failure_policy", "replications whose fit throws or does not converge are "
                             "excluded per estimator and counted"},
          {"estimators", rows},
          {"notes", report.notes}};
}

}  // namespace ordpd
