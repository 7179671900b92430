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
#include <sstream>
#include <vector>

#include "ordpd/errors.hpp"
#include "ordpd/rng.hpp"
#include "ordpd/simulate.hpp"
#include "test_support.hpp"

using namespace ordpd;
using Catch::Approx;
using Catch::Matchers::WithinAbs;

namespace {

using Words = std::array<std::uint32_t, 4>;

int count_value(const std::vector<int>& y, int v) {
  return static_cast<int>(std::count(y.begin(), y.end(), v));
}

StudyConfig small_study(int id, std::vector<EstimatorSpec> estimators, int B) {
  return StudyConfig{model_spec(id, Link(LinkKind::probit), 100), {}, std::move(estimators), B,
                     17, 1, {}};
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers", "[simulate][rng]") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        Words{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff}) ==
        Words{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        Words{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random stream draws", "[simulate][rng]") {
  RandomStream a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto va = a(), vb = b(), vc = c();
    CHECK(va == vb);
    differs = differs || va != vc;
  }
  CHECK(differs);

  RandomStream u(1, 0);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double v = u.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));

  std::vector<int> hits(7, 0);
  for (int k = 0; k < 70000; ++k) {
    const auto v = u.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(std::abs(h - 10000) < 4 * std::sqrt(10000.0 * 6 / 7));
}

TEST_CASE("model table", "[simulate]") {
  const ModelSpec m1 = model_spec(1, Link(LinkKind::probit), 150);
  CHECK(m1.truth.gamma() == testing::vec({-0.7, 0.0, 1.5, 2.9}));
  CHECK(m1.truth.beta() == testing::vec({2.5, 1.2, 0.5}));
  CHECK(model_spec(2, Link(LinkKind::logit), 10).truth.gamma()[0] == -2.1);
  CHECK(model_spec(3, Link(LinkKind::probit), 10).truth.beta() == testing::vec({1.5, 0.7}));
  CHECK(model_spec(4, Link(LinkKind::logit), 10).truth.gamma() == testing::vec({-4.0, 4.0}));
  CHECK(model_spec(5, Link(LinkKind::cloglog), 10).truth.covariates() == 3);
  CHECK_THROWS_AS(model_spec(1, Link(LinkKind::logit), 150), std::invalid_argument);
  CHECK_THROWS_AS(model_spec(6, Link(LinkKind::probit), 150), std::invalid_argument);
  CHECK_THROWS_AS(model_spec(2, Link(LinkKind::probit), 1), std::invalid_argument);
}

TEST_CASE("model 2 category frequencies", "[simulate]") {
  // 1.5 X + e with X, e standard normal is N(0, 3.25), so P(Y <= j) is
  // Phi(gamma_j / sqrt(3.25)); a Simpson integral over X cross-checks it.
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 100000);
  const Dataset d = generate(spec, 5);
  const auto counts = d.category_counts();
  double prev = 0.0;
  for (int j = 1; j <= 5; ++j) {
    const double cum = j < 5 ? testing::oracle_cdf(LinkKind::probit,
                                                   spec.truth.gamma()[j - 1] / std::sqrt(3.25))
                             : 1.0;
    const double p = cum - prev;
    prev = cum;
    double integral = 0.0;
    const int steps = 2000;
    const double lo = -10.0, h = 20.0 / steps;
    for (int s = 0; s <= steps; ++s) {
      const double x = lo + s * h;
      const double w = (s == 0 || s == steps) ? 1 : (s % 2 ? 4 : 2);
      const auto probs = testing::oracle_probs(spec.truth.gamma(), spec.truth.beta(),
                                               LinkKind::probit, testing::vec({x}));
      integral += w * probs[j - 1] * testing::oracle_pdf(LinkKind::probit, x);
    }
    integral *= h / 3;
    CHECK_THAT(integral, WithinAbs(p, 1e-10));
    const double se = std::sqrt(p * (1 - p) / d.n());
    CHECK(std::abs(counts[j - 1] / static_cast<double>(d.n()) - p) < 3 * se);
  }
}

TEST_CASE("covariate designs", "[simulate]") {
  RandomStream rng(3, 0);
  const DesignMatrix x1 = draw_covariates(model_spec(1, Link(LinkKind::probit), 40000), rng);
  std::vector<int> states(4, 0);
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    int ones = 0, where = 0;
    for (Eigen::Index k = 0; k < 3; ++k) {
      REQUIRE((x1(i, k) == 0.0 || x1(i, k) == 1.0));
      if (x1(i, k) == 1.0) {
        ++ones;
        where = static_cast<int>(k) + 1;
      }
    }
    REQUIRE(ones <= 1);
    ++states[where];
  }
  for (int s : states) CHECK(std::abs(s - 10000) < 4 * std::sqrt(40000 * 0.25 * 0.75));

  const int n = 100000;
  const DesignMatrix x4 = draw_covariates(model_spec(4, Link(LinkKind::probit), n), rng);
  const Vector mean = x4.colwise().mean();
  const Matrix centred = x4.rowwise() - mean.transpose();
  const Matrix cov = centred.transpose() * centred / (n - 1);
  const Matrix target = (Matrix(3, 3) << 1.0, 1.5, 0.8, 1.5, 4.0, 2.5, 0.8, 2.5, 9.0).finished();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double se = std::sqrt((target(a, a) * target(b, b) + target(a, b) * target(a, b)) / n);
      CHECK(std::abs(cov(a, b) - target(a, b)) < 4 * se);
    }

  const DesignMatrix x5 = draw_covariates(model_spec(5, Link(LinkKind::probit), 1000), rng);
  for (Eigen::Index i = 0; i < x5.rows(); ++i) {
    REQUIRE((x5(i, 0) == 0.0 || x5(i, 0) == 1.0));
    REQUIRE(x5(i, 2) == x5(i, 0) * x5(i, 1));
  }
}

TEST_CASE("contamination counts", "[simulate]") {
  CHECK(contaminated_count(0.05, 200) == 10);
  CHECK(contaminated_count(0.1, 150) == 15);
  CHECK(contaminated_count(0.15, 20) == 3);
  CHECK(contaminated_count(0.07, 100) == 7);
  CHECK(contaminated_count(0.051, 100) == 6);

  const ModelSpec m1 = model_spec(1, Link(LinkKind::probit), 200);
  RandomStream rng(8, 0);
  const Dataset clean = generate(m1, rng);
  Contamination v{ContaminationKind::vertical, 0.05};
  const Dataset dirty = contaminate(clean, v, m1, rng);
  const Vector eta = clean.x() * m1.truth.beta();
  std::vector<double> sorted(eta.data(), eta.data() + eta.size());
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[99] + sorted[100]);
  int changed = 0;
  for (int i = 0; i < clean.n(); ++i) {
    if (dirty.y()[i] != clean.y()[i]) {
      ++changed;
      CHECK(dirty.y()[i] == 5);
      CHECK(eta[i] < median);
    }
  }
  CHECK(changed <= 10);
  CHECK(count_value(dirty.y(), 5) - count_value(clean.y(), 5) == changed);
  CHECK(dirty.x() == clean.x());

  const ModelSpec m2 = model_spec(2, Link(LinkKind::probit), 150);
  const Dataset c2 = generate(m2, 9);
  Contamination h{ContaminationKind::horizontal, 0.05};
  const Dataset d2 = contaminate(c2, h, m2, rng);
  CHECK((d2.x().col(0).array() == 5.0).count() == 8);
  CHECK(d2.y() == c2.y());

  Contamination tiny{ContaminationKind::vertical, 1e-13};
  CHECK(contaminate(c2, tiny, m2, rng).y() == c2.y());
  Contamination misspec{ContaminationKind::link_misspec};
  misspec.fit_link = Link(LinkKind::logit);
  CHECK(contaminate(c2, misspec, m2, rng).y() == c2.y());
  CHECK(fitting_link(misspec, m2).kind() == LinkKind::logit);
  CHECK(fitting_link(v, m2).kind() == LinkKind::probit);

  CHECK_THROWS_AS(contaminate(c2, Contamination{ContaminationKind::vertical, 0.6}, m2, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(contaminate(c2, Contamination{ContaminationKind::link_misspec}, m2, rng),
                  std::invalid_argument);
  Contamination bad_col{ContaminationKind::horizontal, 0.05};
  bad_col.column = 3;
  CHECK_THROWS_AS(contaminate(c2, bad_col, m2, rng), std::invalid_argument);
}

TEST_CASE("vertical contamination falls back to uniform rows", "[simulate]") {
  // Identical covariates: no linear predictor lies below the median.
  const ModelSpec spec = model_spec(2, Link(LinkKind::probit), 20);
  const Dataset flat(DesignMatrix::Constant(20, 1, 0.3), std::vector<int>(20, 2), 5);
  RandomStream rng(1, 0);
  std::vector<std::string> log;
  const Dataset dirty = contaminate(flat, Contamination{ContaminationKind::vertical, 0.1},
                                    spec, rng, &log);
  CHECK(count_value(dirty.y(), 5) == 2);
  REQUIRE(log.size() == 1);
  CHECK(log[0].find("uniformly") != std::string::npos);
}

TEST_CASE("study report invariants", "[simulate]") {
  StudyConfig cfg = small_study(2, {Mle{}, Mdpde{0.5}, Mle{}, Mdpde{0.5}, CrouxWml{}}, 40);
  cfg.contamination = {ContaminationKind::vertical, 0.1};
  const McReport r = run_study(cfg);
  REQUIRE(r.rows.size() == 5);
  for (const auto& s : r.rows) {
    CHECK(s.used + s.failures == 40);
    CHECK(s.mse_gamma >= s.bias2_gamma - 1e-12);
    CHECK(s.mse_beta >= s.bias2_beta - 1e-12);
    REQUIRE(s.efficiency.has_value());
  }
  CHECK(*r.rows[0].efficiency == 1.0);
  CHECK(r.rows[0].label == "MLE");
  // The same estimator twice gives identical rows.
  CHECK(report_to_json(r)["estimators"][0] == report_to_json(r)["estimators"][2]);
  CHECK(report_to_json(r)["estimators"][1] == report_to_json(r)["estimators"][3]);

  StudyConfig no_mle = small_study(2, {Mdpde{0.5}}, 5);
  CHECK_FALSE(run_study(no_mle).rows[0].efficiency.has_value());
  CHECK_THROWS_AS(run_study(small_study(2, {Mle{}}, 1)), std::invalid_argument);
  CHECK_THROWS_AS(run_study(small_study(2, {}, 5)), std::invalid_argument);
}

TEST_CASE("study results do not depend on the thread count", "[simulate]") {
  StudyConfig cfg = small_study(3, {Mle{}, Mdpde{0.3}, Iannario{1.5, IannarioWeight::w2}}, 24);
  cfg.contamination = {ContaminationKind::horizontal, 0.1};
  cfg.threads = 1;
  const std::string one = report_to_json(run_study(cfg)).dump();
  cfg.threads = 4;
  const std::string four = report_to_json(run_study(cfg)).dump();
  cfg.threads = 0;
  const std::string any = report_to_json(run_study(cfg)).dump();
  CHECK(one == four);
  CHECK(one == any);
}

TEST_CASE("scenario files", "[simulate]") {
  const auto j = nlohmann::json::parse(R"({
    "model_id": 1, "link": "probit", "n": 150, "B": 200, "seed": 9,
    "contamination": {"kind": "vertical", "eps": 0.1},
    "estimators": [{"kind": "mle"}, {"kind": "mdpde", "alpha": 1.0}, {"kind": "croux"},
                   {"kind": "iannario"}, {"kind": "iannario", "c": 1.2, "weight": "w1"}]
  })");
  const StudyConfig cfg = study_from_json(j);
  CHECK(cfg.model.id == 1);
  CHECK(cfg.replications == 200);
  CHECK(cfg.seed == 9);
  CHECK(cfg.contamination.kind == ContaminationKind::vertical);
  REQUIRE(cfg.estimators.size() == 5);
  CHECK(estimator_label(cfg.estimators[1]) == "MDPDE(1)");
  CHECK(estimator_label(cfg.estimators[3]) == "Iannario(1.5,w2)");
  CHECK(estimator_label(cfg.estimators[4]) == "Iannario(1.2,w1)");

  auto bad = j;
  bad["estimators"] = nlohmann::json::array({{{"kind", "bayes"}}});
  CHECK_THROWS_AS(study_from_json(bad), std::invalid_argument);
  bad = j;
  bad["contamination"] = {{"kind", "vertical"}, {"eps", 0.7}};
  CHECK_THROWS_AS(study_from_json(bad), std::invalid_argument);
  bad = j;
  bad["contamination"] = {{"kind", "diagonal"}};
  CHECK_THROWS_AS(study_from_json(bad), std::invalid_argument);
  bad = j;
  bad.erase("B");
  CHECK_THROWS(study_from_json(bad));
}

TEST_CASE("report CSV", "[simulate]") {
  const McReport r = run_study(small_study(2, {Mle{}, Mdpde{0.2}}, 4));
  std::ostringstream out;
  write_report_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "estimator,bias2_gamma,bias2_beta,mse_gamma,mse_beta,mse_theta,efficiency,"
        "replications,failures");
  std::getline(in, line);
  CHECK(line.rfind("MLE,", 0) == 0);
  CHECK(line.find(",1,4,0") != std::string::npos);
}

TEST_CASE("clean-data efficiency drops with a", "[simulate][property]") {
  for (int id : {1, 2, 3}) {
    StudyConfig cfg{model_spec(id, Link(LinkKind::probit), 150), {},
                    {Mle{}, Mdpde{0.1}, Mdpde{0.3}, Mdpde{0.6}, Mdpde{1.0}}, 500, 99, 0, {}};
    const McReport r = run_study(cfg);
    for (std::size_t k = 2; k < r.rows.size(); ++k) {
      INFO("model " << id << " " << r.rows[k].label);
      CHECK(*r.rows[k].efficiency <= *r.rows[k - 1].efficiency);
    }
  }
}
