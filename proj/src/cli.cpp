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


#include "ordpd/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/version.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ordpd/errors.hpp"
#include "ordpd/estimate.hpp"
#include "ordpd/rng.hpp"
#include "ordpd/robust_scale.hpp"
#include "ordpd/robustness.hpp"
#include "ordpd/simulate.hpp"
#include "ordpd/table_io.hpp"
#include "ordpd/tuning.hpp"

namespace ordpd::cli {

using nlohmann::json;

Standardized standardize(const DesignMatrix& x, const std::vector<std::string>& names) {
  Standardized s{DesignMatrix(x.rows(), x.cols()), Vector(x.cols()), Vector(x.cols())};
  std::vector<double> column(x.rows());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) column[i] = x(i, k);
    s.median[k] = median(column);
    s.mad[k] = median_abs_deviation(column, s.median[k]);
    if (!(s.mad[k] > 0.0))
      throw ZeroMadColumn(static_cast<std::size_t>(k),
                          static_cast<std::size_t>(k) < names.size() ? names[k] : "");
  }
  s.x = apply_standardization(x, s.median, s.mad);
  return s;
}

DesignMatrix apply_standardization(const DesignMatrix& x, const Vector& median,
                                   const Vector& mad) {
  if (x.cols() != median.size() || x.cols() != mad.size())
    throw InvalidData("standardization does not match the number of covariates");
  DesignMatrix z(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    z.col(k) = (x.col(k).array() - median[k]) / (kMadConsistency * mad[k]);
  return z;
}

DesignMatrix unstandardize(const DesignMatrix& z, const Vector& median, const Vector& mad) {
  DesignMatrix x(z.rows(), z.cols());
  for (Eigen::Index k = 0; k < z.cols(); ++k)
    x.col(k) = z.col(k).array() * (kMadConsistency * mad[k]) + median[k];
  return x;
}

TrimDf trim_df_from_name(std::string_view name) {
  if (name == "n-1") return TrimDf::n_minus_1;
  if (name == "p") return TrimDf::p;
  throw std::invalid_argument(fmt::format("unknown trimming degrees of freedom '{}'", name));
}

std::vector<int> robust_trim(const DesignMatrix& x, double quantile, TrimDf df,
                             const std::vector<std::string>& names) {
  if (!(quantile > 0.0 && quantile <= 1.0))
    throw std::invalid_argument("trimming quantile must lie in (0, 1]");
  const Standardized s = standardize(x, names);
  std::vector<int> keep;
  if (quantile == 1.0) {
    keep.resize(x.rows());
    std::iota(keep.begin(), keep.end(), 0);
    return keep;
  }
  const double dof = df == TrimDf::p ? static_cast<double>(x.cols())
                                     : static_cast<double>(x.rows() - 1);
  const double cutoff =
      boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), quantile);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (s.x.row(i).squaredNorm() < cutoff) keep.push_back(static_cast<int>(i));
  }
  return keep;
}

Prediction predict(const Theta& theta, const Link& link, const DesignMatrix& x) {
  Prediction out{std::vector<int>(x.rows()), Matrix(x.rows(), theta.categories())};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector p = category_probs(theta, link, x.row(i).transpose());
    out.probs.row(i) = p.transpose();
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < p.size(); ++j)
      if (p[j] > p[best]) best = j;
    out.category[i] = static_cast<int>(best) + 1;
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw std::invalid_argument("accuracy needs equally long, non-empty vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Split train_test_split(int n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RandomStream rng(seed, 0);
  for (int k = n - 1; k > 0; --k)
    std::swap(order[k], order[static_cast<int>(rng.below(static_cast<std::uint64_t>(k) + 1))]);
  const auto n_train = static_cast<std::size_t>(std::lround(fraction * n));
  Split s{{order.begin(), order.begin() + n_train}, {order.begin() + n_train, order.end()}};
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<int> map_labels(const std::vector<double>& raw,
                            const std::map<double, int>& label_map) {
  std::vector<int> y(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (label_map.empty()) {
      if (raw[i] != std::floor(raw[i]) || raw[i] < 1.0)
        throw InvalidData(fmt::format(
            "response value {} on data row {} is not an integer >= 1 (supply a label map)",
            format_number(raw[i]), i + 1));
      y[i] = static_cast<int>(raw[i]);
    } else {
      const auto it = label_map.find(raw[i]);
      if (it == label_map.end())
        throw InvalidData(fmt::format("response value {} on data row {} is not in the label map",
                                      format_number(raw[i]), i + 1));
      y[i] = it->second;
    }
  }
  return y;
}

std::map<double, int> auto_label_map(const std::vector<double>& raw) {
  std::vector<double> values = raw;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::map<double, int> out;
  for (std::size_t k = 0; k < values.size(); ++k) out[values[k]] = static_cast<int>(k) + 1;
  return out;
}

std::map<double, int> label_map_from_json(const json& j) {
  if (!j.is_object()) throw InvalidData("label map must be a JSON object");
  std::map<double, int> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    double key = 0.0;
    const std::string& text = it.key();
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), key);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw InvalidData(fmt::format("label map key '{}' is not a number", text));
    const int category = it.value().get<int>();
    if (category < 1) throw InvalidData("label map categories must be >= 1");
    out[key] = category;
  }
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

namespace {

// Effective settings of one run.  Every field has a JSON key equal to the
// long flag name with dashes turned into underscores.
struct Options {
  std::string subcommand;
  std::string data;
  std::string response;
  std::string link = "probit";
  std::string estimator = "mdpde";
  double alpha = 0.0;
  std::optional<double> c;
  std::string weight;
  std::uint64_t seed = 1;
  std::optional<double> split;
  std::string out;
  std::string scenario;
  double pilot_alpha = 0.5;
  std::optional<double> trim_quantile;
  std::string trim_df = "n-1";
  std::string label_map;
  int categories = 0;
  bool standardize = true;
  std::string theta;
  std::optional<double> alpha_step;
  int max_iter = 500;
  double grad_tol = 1e-8;
  unsigned threads = 0;
  int model = 1;
  int n = 40;
  std::string mode;
  double s = 8.0;
  std::vector<double> alphas = {0.0, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0};
  int category = 0;
  double t_min = -10.0;
  double t_max = 10.0;
  double t_step = 0.1;
};

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json();
}

json options_to_json(const Options& o) {
  return {{"subcommand", o.subcommand},
          {"data", o.data},
          {"response", o.response},
          {"link", o.link},
          {"estimator", o.estimator},
          {"alpha", o.alpha},
          {"c", opt(o.c)},
          {"weight", o.weight},
          {"seed", o.seed},
          {"split", opt(o.split)},
          {"out", o.out},
          {"scenario", o.scenario},
          {"pilot_alpha", o.pilot_alpha},
          {"trim_quantile", opt(o.trim_quantile)},
          {"trim_df", o.trim_df},
          {"label_map", o.label_map},
          {"categories", o.categories},
          {"standardize", o.standardize},
          {"theta", o.theta},
          {"alpha_step", opt(o.alpha_step)},
          {"max_iter", o.max_iter},
          {"grad_tol", o.grad_tol},
          {"threads", o.threads},
          {"model", o.model},
          {"n", o.n},
          {"mode", o.mode},
          {"s", o.s},
          {"alphas", o.alphas},
          {"category", o.category},
          {"t_min", o.t_min},
          {"t_max", o.t_max},
          {"t_step", o.t_step}};
}

template <class T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    field.reset();
  else
    field = j.at(key).get<T>();
}

// Keys present in the config override the command-line values.  A run
// metadata record is accepted too (its "options" object is used).
void apply_config(const json& cfg, Options& o) {
  const json& j = cfg.contains("options") ? cfg.at("options") : cfg;
  if (!j.is_object()) throw InvalidData("config must be a JSON object");
  static const std::vector<std::string> known = {
      "subcommand", "data",     "response", "link",    "estimator",   "alpha",
      "c",          "weight",   "seed",     "split",   "out",         "scenario",
      "pilot_alpha", "trim_quantile", "trim_df", "label_map", "categories", "standardize",
      "theta",      "alpha_step", "max_iter", "grad_tol", "threads", "model",
      "n",          "mode",     "s",        "alphas",  "category",    "t_min",
      "t_max",      "t_step"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw InvalidData(fmt::format("unknown config key '{}'", it.key()));
  }
  take(j, "data", o.data);
  take(j, "response", o.response);
  take(j, "link", o.link);
  take(j, "estimator", o.estimator);
  take(j, "alpha", o.alpha);
  take(j, "c", o.c);
  take(j, "weight", o.weight);
  take(j, "seed", o.seed);
  take(j, "split", o.split);
  take(j, "out", o.out);
  take(j, "scenario", o.scenario);
  take(j, "pilot_alpha", o.pilot_alpha);
  take(j, "trim_quantile", o.trim_quantile);
  take(j, "trim_df", o.trim_df);
  take(j, "label_map", o.label_map);
  take(j, "categories", o.categories);
  take(j, "standardize", o.standardize);
  take(j, "theta", o.theta);
  take(j, "alpha_step", o.alpha_step);
  take(j, "max_iter", o.max_iter);
  take(j, "grad_tol", o.grad_tol);
  take(j, "threads", o.threads);
  take(j, "model", o.model);
  take(j, "n", o.n);
  take(j, "mode", o.mode);
  take(j, "s", o.s);
  take(j, "alphas", o.alphas);
  take(j, "category", o.category);
  take(j, "t_min", o.t_min);
  take(j, "t_max", o.t_max);
  take(j, "t_step", o.t_step);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData(fmt::format("cannot open '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidData(fmt::format("{}: {}", path, e.what()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidData(fmt::format("cannot write '{}'", path));
  f << text;
  if (!f) throw InvalidData(fmt::format("failed writing '{}'", path));
}

// Collects the artifacts of a run and the values echoed in the metadata.
struct RunContext {
  const Options& options;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> artifacts;
  json results = json::object();

  // Primary artifact: to --out when given, otherwise to stdout.
  void emit(const std::string& text) {
    if (options.out.empty()) {
      out << text;
    } else {
      write_text(options.out, text);
      artifacts.push_back(options.out);
    }
  }

  // Secondary artifact next to --out; skipped without --out.
  void emit_sidecar(const std::string& suffix, const std::string& text) {
    if (options.out.empty()) return;
    const std::string path = options.out + suffix;
    write_text(path, text);
    artifacts.push_back(path);
  }
};

FitConfig fit_config(const Options& o, const Link& link) {
  FitConfig cfg;
  cfg.max_iter = o.max_iter;
  cfg.grad_tol = o.grad_tol;
  if (o.estimator == "mdpde") {
    cfg.estimator = Mdpde{o.alpha};
  } else if (o.estimator == "mle") {
    cfg.estimator = Mle{};
  } else if (o.estimator == "croux") {
    cfg.estimator = CrouxWml{};
  } else if (o.estimator == "iannario") {
    cfg.estimator =
        Iannario{o.c.value_or(default_iannario_c(link)),
                 o.weight.empty() ? default_iannario_weight(link)
                                  : iannario_weight_from_name(o.weight)};
  } else {
    throw std::invalid_argument(fmt::format("unknown estimator '{}'", o.estimator));
  }
  cfg.validate();
  return cfg;
}

// Data as prepared for fitting, plus what is needed to repeat the
// preparation on new data.
struct Prepared {
  Dataset data;
  std::vector<std::string> columns;
  std::map<double, int> label_map;
  std::optional<Standardized> scaling;
  std::vector<int> kept_rows;  // after trimming, indices into the file rows
};

Prepared prepare(const Options& o) {
  if (o.data.empty()) throw std::invalid_argument("--data is required");
  if (o.response.empty()) throw std::invalid_argument("--response is required");
  const NumericTable table = read_numeric_csv_file(o.data);
  const std::size_t rc = table.column(o.response);
  std::vector<std::string> columns;
  for (std::size_t k = 0; k < table.header.size(); ++k)
    if (k != rc) columns.push_back(table.header[k]);
  if (columns.empty()) throw InvalidData("no covariate columns besides the response");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  DesignMatrix x(n, static_cast<Eigen::Index>(columns.size()));
  std::vector<double> raw(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
      if (k == rc)
        raw[i] = table.rows[i][k];
      else
        x(i, c++) = table.rows[i][k];
    }
  }
  std::map<double, int> labels;
  if (o.label_map == "auto")
    labels = auto_label_map(raw);
  else if (!o.label_map.empty())
    labels = label_map_from_json(read_json_file(o.label_map));
  std::vector<int> y = map_labels(raw, labels);

  std::optional<Standardized> scaling;
  if (o.standardize) {
    scaling = standardize(x, columns);
    x = scaling->x;
  }
  std::vector<int> kept(n);
  std::iota(kept.begin(), kept.end(), 0);
  Dataset data(std::move(x), std::move(y), o.categories, columns);
  if (o.trim_quantile) {
    kept = robust_trim(data.x(), *o.trim_quantile, trim_df_from_name(o.trim_df), columns);
    data = data.subset(kept);
  }
  return Prepared{std::move(data), std::move(columns), std::move(labels), std::move(scaling),
                  std::move(kept)};
}

json label_map_json(const std::map<double, int>& m) {
  json j = json::object();
  for (const auto& [raw, cat] : m) j[format_number(raw)] = cat;
  return j;
}

json preparation_json(const Prepared& p) {
  json j = {{"columns", p.columns},
            {"categories", p.data.categories()},
            {"label_map", p.label_map.empty() ? json() : label_map_json(p.label_map)},
            {"rows_used", p.data.n()}};
  if (p.scaling)
    j["standardization"] = {{"median", vector_to_json(p.scaling->median)},
                            {"mad", vector_to_json(p.scaling->mad)}};
  return j;
}

int cmd_fit(RunContext& ctx) {
  const Options& o = ctx.options;
  const Link link = Link::from_name(o.link);
  const FitConfig cfg = fit_config(o, link);
  const Prepared prep = prepare(o);
  Dataset train = prep.data;
  std::optional<Split> split;
  if (o.split) {
    split = train_test_split(prep.data.n(), *o.split, o.seed);
    train = prep.data.subset(split->train);
  }
  const FitResult r = fit(train, link, cfg);
  json j = fit_result_to_json(r);
  j["link"] = link.name();
  j["estimator"] = estimator_label(cfg.estimator);
  j["n"] = train.n();
  j["data"] = preparation_json(prep);
  if (split) {
    const Dataset test = prep.data.subset(split->test);
    const Prediction pred = predict(r.theta_hat, link, test.x());
    const double acc = accuracy(pred.category, test.y());
    j["split"] = {{"fraction", *o.split}, {"train", train.n()}, {"test", test.n()},
                  {"accuracy", acc}};
    ctx.results["accuracy"] = acc;
  }
  for (const auto& w : r.warnings) ctx.err << "warning: " << w << '\n';
  ctx.emit(dump_json(j) + "\n");
  ctx.results["converged"] = r.converged;
  if (!r.converged) {
    ctx.err << "error: optimisation did not converge (" << r.status << ", gradient norm "
            << format_number(r.grad_norm) << ")\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_tune(RunContext& ctx) {
  const Options& o = ctx.options;
  const Link link = Link::from_name(o.link);
  const Prepared prep = prepare(o);
  TuneConfig cfg;
  const double step = o.alpha_step.value_or(0.01);
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("alpha step must lie in (0, 1]");
  cfg.alpha_grid.clear();
  const auto steps = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 0; k <= steps; ++k) cfg.alpha_grid.push_back(std::min(1.0, k * step));
  cfg.pilot = o.pilot_alpha;
  cfg.threads = o.threads;
  cfg.fit.max_iter = o.max_iter;
  cfg.fit.grad_tol = o.grad_tol;
  Dataset train = prep.data;
  if (o.split) train = prep.data.subset(train_test_split(prep.data.n(), *o.split, o.seed).train);
  const TuneResult r = select_alpha(train, link, cfg);
  json table = json::array();
  for (const auto& row : r.table) {
    json e = {{"alpha", row.alpha}, {"mse", row.mse}, {"se", row.se},
              {"converged", row.converged}};
    if (!row.error.empty()) e["error"] = row.error;
    table.push_back(std::move(e));
  }
  json j = {{"alpha_opt", r.alpha_opt},
            {"mse_opt", r.mse_opt},
            {"theta", theta_to_json(r.theta_opt)},
            {"pilot", theta_to_json(r.pilot)},
            {"pilot_alpha", o.pilot_alpha},
            {"link", link.name()},
            {"n", train.n()},
            {"data", preparation_json(prep)},
            {"table", table}};
  ctx.emit(dump_json(j) + "\n");
  std::ostringstream csv;
  write_tune_csv(csv, r);
  ctx.emit_sidecar(".table.csv", csv.str());
  ctx.results["alpha_opt"] = r.alpha_opt;
  return kExitOk;
}

int cmd_predict(RunContext& ctx) {
  const Options& o = ctx.options;
  if (o.theta.empty()) throw std::invalid_argument("--theta (a fit result JSON) is required");
  if (o.data.empty()) throw std::invalid_argument("--data is required");
  const json fitted = read_json_file(o.theta);
  const Theta theta = theta_from_json(fitted);
  const Link link = Link::from_name(fitted.contains("link") ? fitted.at("link").get<std::string>()
                                                            : o.link);
  const NumericTable table = read_numeric_csv_file(o.data);
  std::vector<std::string> columns;
  const json prep = fitted.value("data", json::object());
  if (prep.contains("columns")) {
    columns = prep.at("columns").get<std::vector<std::string>>();
  } else {
    for (const auto& name : table.header)
      if (name != o.response) columns.push_back(name);
  }
  if (static_cast<int>(columns.size()) != theta.covariates())
    throw InvalidData("number of covariate columns does not match the parameter");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  DesignMatrix x(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const std::size_t c = table.column(columns[k]);
    for (Eigen::Index i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(k)) = table.rows[i][c];
  }
  if (prep.contains("standardization")) {
    const json& s = prep.at("standardization");
    x = apply_standardization(x, vector_from_json(s.at("median")), vector_from_json(s.at("mad")));
  }
  const Prediction pred = predict(theta, link, x);
  std::string csv = "row,predicted";
  for (int j = 1; j <= theta.categories(); ++j) csv += fmt::format(",p{}", j);
  csv += '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    csv += fmt::format("{},{}", i + 1, pred.category[i]);
    for (int j = 0; j < theta.categories(); ++j) csv += "," + format_number(pred.probs(i, j));
    csv += '\n';
  }
  ctx.emit(csv);
  if (!o.response.empty()) {
    std::vector<double> raw(table.rows.size());
    const std::size_t rc = table.column(o.response);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = table.rows[i][rc];
    std::map<double, int> labels;
    if (prep.contains("label_map") && !prep.at("label_map").is_null())
      labels = label_map_from_json(prep.at("label_map"));
    const double acc = accuracy(pred.category, map_labels(raw, labels));
    ctx.results["accuracy"] = acc;
    ctx.err << "accuracy: " << format_number(acc) << '\n';
  }
  return kExitOk;
}

int cmd_simulate(RunContext& ctx) {
  const Options& o = ctx.options;
  if (o.scenario.empty()) throw std::invalid_argument("--scenario is required");
  json scenario = read_json_file(o.scenario);
  StudyConfig cfg = [&] {
    try {
      return study_from_json(scenario);
    } catch (const json::exception& e) {
      throw InvalidData(fmt::format("{}: {}", o.scenario, e.what()));
    }
  }();
  if (o.threads) cfg.threads = o.threads;
  const McReport report = run_study(cfg);
  std::ostringstream csv;
  write_report_csv(csv, report);
  ctx.emit(csv.str());
  ctx.emit_sidecar(".json", dump_json(report_to_json(report)) + "\n");
  for (const auto& note : report.notes) ctx.err << "note: " << note << '\n';
  ctx.results["scenario"] = scenario;
  return kExitOk;
}

int cmd_ges(RunContext& ctx) {
  const Options& o = ctx.options;
  const Link link = Link::from_name(o.link);
  const ModelSpec spec = model_spec(o.model, link, o.n);
  RandomStream rng(o.seed, 0);
  GesRequest req{spec.truth, link, draw_covariates(spec, rng), {},
                 o.mode.empty() ? GesMode::joint_heuristic : ges_mode_from_name(o.mode),
                 o.seed, 8};
  const double step = o.alpha_step.value_or(0.1);
  const auto steps = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 0; k <= steps; ++k) req.alpha_grid.push_back(std::min(1.0, k * step));
  const auto points = ges(req);
  std::string csv = "alpha,joint";
  for (int k = 1; k < spec.truth.categories(); ++k) csv += fmt::format(",gamma{}", k);
  for (int k = 1; k <= spec.truth.covariates(); ++k) csv += fmt::format(",beta{}", k);
  csv += '\n';
  for (const auto& pt : points) {
    csv += format_number(pt.alpha) + "," + format_number(pt.joint);
    for (Eigen::Index k = 0; k < pt.component.size(); ++k) csv += "," + format_number(pt.component[k]);
    csv += '\n';
  }
  ctx.emit(csv);
  return kExitOk;
}

int cmd_implode(RunContext& ctx) {
  const Options& o = ctx.options;
  ImplosionScenario sc = default_implosion_scenario(o.seed, o.n);
  std::vector<EstimatorSpec> estimators;
  for (double a : o.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alphas must lie in [0,1]");
    estimators.push_back(Mdpde{a});
  }
  const bool scan = o.mode == "scan";
  if (!scan && !o.mode.empty() && o.mode != "sweep")
    throw std::invalid_argument("implode mode must be 'sweep' or 'scan'");
  const auto rows = scan ? implosion_scan(sc, estimators, o.threads)
                         : implosion_sweep(sc, o.s, estimators, o.threads);
  std::ostringstream csv;
  write_implosion_csv(csv, rows);
  ctx.emit(csv.str());
  if (!scan) {
    json minima = json::array();
    for (const auto& m : implosion_minima(rows, sc.base.n()))
      minima.push_back({{"estimator", m.estimator},
                        {"alpha", m.alpha ? json(*m.alpha) : json()},
                        {"min_beta_norm", m.min_beta_norm},
                        {"copies", m.copies},
                        {"proportion", m.proportion}});
    ctx.emit_sidecar(".minima.json", dump_json(minima) + "\n");
    ctx.results["minima"] = minima;
  }
  return kExitOk;
}

int cmd_residuals(RunContext& ctx) {
  const Options& o = ctx.options;
  Link link = Link::from_name(o.link);
  Theta theta((Vector(5) << -2.5, -1.0, 0.0, 1.0, 2.5).finished(), Vector::Ones(1));
  if (!o.theta.empty()) {
    const json fitted = read_json_file(o.theta);
    theta = theta_from_json(fitted);
    if (fitted.contains("link")) link = Link::from_name(fitted.at("link").get<std::string>());
  }
  if (!(o.t_step > 0.0) || !(o.t_max >= o.t_min))
    throw std::invalid_argument("residual grid needs t_min <= t_max and t_step > 0");
  std::vector<double> grid;
  const auto steps = static_cast<int>(std::floor((o.t_max - o.t_min) / o.t_step + 1e-9));
  for (int k = 0; k <= steps; ++k) grid.push_back(o.t_min + k * o.t_step);
  std::vector<int> cats;
  if (o.category > 0)
    cats.push_back(o.category);
  else
    for (int j = 1; j <= theta.categories(); ++j) cats.push_back(j);
  std::string csv = "category,t,residual\n";
  for (int j : cats) {
    const auto curve = dpd_generalized_residual(theta, link, o.alpha, j, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      csv += fmt::format("{},{},{}\n", j, format_number(grid[k]), format_number(curve[k]));
  }
  ctx.emit(csv);
  return kExitOk;
}

json metadata(const RunContext& ctx, int status) {
  const json options = options_to_json(ctx.options);
  return {{"tool", "ordpd"},
          {"version", kVersion},
          {"subcommand", ctx.options.subcommand},
          {"seed", ctx.options.seed},
          {"config_hash", fnv1a_hex(dump_json(options, -1))},
          {"options", options},
          {"exit_status", status},
          {"artifacts", ctx.artifacts},
          {"results", ctx.results},
          {"libraries",
           {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                                  EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"fmt", FMT_VERSION}}}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  std::string config;
  CLI::App app{"Robust ordinal regression by minimum density power divergence", "ordpd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON file whose keys override the flags");
    sub->add_option("--out", o.out, "Output path (stdout when omitted)");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--max-iter", o.max_iter, "Optimiser iteration limit");
    sub->add_option("--grad-tol", o.grad_tol, "Gradient tolerance (infinity norm)");
  };
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "CSV file with a header row");
    sub->add_option("--response", o.response, "Name of the ordinal response column");
    sub->add_option("--label-map", o.label_map,
                    "JSON object mapping raw responses to 1..m, or 'auto'");
    sub->add_option("--categories", o.categories, "Number of categories (default: max label)");
    sub->add_flag("--standardize,!--no-standardize", o.standardize,
                  "Median/MAD standardization of the covariates (default on)");
    sub->add_option("--trim-quantile", o.trim_quantile, "Chi-square quantile for robust trimming");
    sub->add_option("--trim-df", o.trim_df, "Trimming degrees of freedom: n-1 or p");
    sub->add_option("--split", o.split, "Training fraction of a seeded train/test split");
    sub->add_option("--link", o.link, "logit, probit, cauchit or cloglog");
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit an ordinal regression model");
  common(fit_cmd);
  data_flags(fit_cmd);
  fit_cmd->add_option("--estimator", o.estimator, "mdpde, mle, croux or iannario");
  fit_cmd->add_option("--alpha", o.alpha, "DPD tuning parameter in [0,1]");
  fit_cmd->add_option("--c", o.c, "Tuning constant of the Iannario weights");
  fit_cmd->add_option("--weight", o.weight, "Iannario weight function: w1, w2 or w3");

  auto* tune_cmd = app.add_subcommand("tune", "Select alpha by the Warwick-Jones criterion");
  common(tune_cmd);
  data_flags(tune_cmd);
  tune_cmd->add_option("--pilot-alpha", o.pilot_alpha, "Alpha of the pilot fit");
  tune_cmd->add_option("--alpha-step", o.alpha_step, "Grid step on [0,1] (default 0.01)");

  auto* predict_cmd = app.add_subcommand("predict", "Predict categories from a fit result");
  common(predict_cmd);
  predict_cmd->add_option("--theta", o.theta, "Fit result JSON");
  predict_cmd->add_option("--data", o.data, "CSV file with the covariate columns");
  predict_cmd->add_option("--response", o.response, "Response column for accuracy");
  predict_cmd->add_option("--link", o.link, "Link when the fit result does not name one");

  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo comparison study");
  common(sim_cmd);
  sim_cmd->add_option("--scenario", o.scenario, "Scenario JSON");

  auto* ges_cmd = app.add_subcommand("ges", "Gross error sensitivity over alpha");
  common(ges_cmd);
  ges_cmd->add_option("--link", o.link, "Link function");
  ges_cmd->add_option("--model", o.model, "Simulation design (1-5) for the covariates");
  ges_cmd->add_option("--n", o.n, "Number of covariate rows");
  ges_cmd->add_option("--mode", o.mode, "per_observation, joint_exact or joint_heuristic");
  ges_cmd->add_option("--alpha-step", o.alpha_step, "Grid step on [0,1] (default 0.1)");

  auto* implode_cmd = app.add_subcommand("implode", "Implosion experiment for the slopes");
  common(implode_cmd);
  implode_cmd->add_option("--s", o.s, "Outlier position (s, -s)");
  implode_cmd->add_option("--n", o.n, "Base sample size");
  implode_cmd->add_option("--mode", o.mode, "sweep (copies 1..50 at s) or scan (grid of s)");
  implode_cmd->add_option("--alphas", o.alphas, "Tuning parameters")->delimiter(',');

  auto* res_cmd = app.add_subcommand("residuals", "DPD generalized residual curves");
  common(res_cmd);
  res_cmd->add_option("--link", o.link, "Link function");
  res_cmd->add_option("--alpha", o.alpha, "DPD tuning parameter");
  res_cmd->add_option("--theta", o.theta, "Fit result JSON (default cut-offs -2.5,-1,0,1,2.5)");
  res_cmd->add_option("--category", o.category, "Category j (0 = all)");
  res_cmd->add_option("--t-min", o.t_min, "Grid start");
  res_cmd->add_option("--t-max", o.t_max, "Grid end");
  res_cmd->add_option("--t-step", o.t_step, "Grid step");

  // implode has its own base-sample default.
  if (argc > 1 && std::string_view(argv[1]) == "implode") o.n = 50;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  o.subcommand = app.get_subcommands().front()->get_name();

  RunContext ctx{o, out, err, {}, json::object()};
  int status = kExitOk;
  try {
    if (!config.empty()) apply_config(read_json_file(config), o);
    if (o.subcommand == "fit") status = cmd_fit(ctx);
    else if (o.subcommand == "tune") status = cmd_tune(ctx);
    else if (o.subcommand == "predict") status = cmd_predict(ctx);
    else if (o.subcommand == "simulate") status = cmd_simulate(ctx);
    else if (o.subcommand == "ges") status = cmd_ges(ctx);
    else if (o.subcommand == "implode") status = cmd_implode(ctx);
    else if (o.subcommand == "residuals") status = cmd_residuals(ctx);
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << '\n';
    status = kExitNoConvergence;
  } catch (const DegenerateProbability& e) {
    err << "error: " << e.what() << '\n';
    status = kExitNoConvergence;
  } catch (const InvalidData& e) {
    err << "error: " << e.what() << '\n';
    status = kExitDataError;
  } catch (const ZeroMadColumn& e) {
    err << "error: " << e.what() << '\n';
    status = kExitDataError;
  } catch (const InvalidTheta& e) {
    err << "error: " << e.what() << '\n';
    status = kExitDataError;
  } catch (const SingularScatter& e) {
    err << "error: " << e.what() << '\n';
    status = kExitDataError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    status = kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const json meta = metadata(ctx, status);
  if (o.out.empty()) {
    err << "run metadata: " << dump_json(meta, -1) << '\n';
  } else {
    try {
      write_text(o.out + ".meta.json", dump_json(meta) + "\n");
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitDataError;
    }
  }
  return status;
}

}  // namespace ordpd::cli
