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

#include "ordpd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ordpd/errors.hpp"

namespace ordpd {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
// Largest infinity-norm step in unconstrained coordinates; log-gaps move by
// at most a factor e^10 per iteration.
constexpr double kMaxStep = 10.0;

struct Point {
  Vector a;
  Theta theta;
  double value;
  Vector grad_theta;
  Vector grad;  // unconstrained
};

std::optional<Point> evaluate(const ObjectiveFn& f, const Vector& a, int m) {
  try {
    Theta theta = from_unconstrained(a, m);
    Vector g_theta;
    const double v = f(theta, g_theta);
    if (!std::isfinite(v) || !g_theta.allFinite()) return std::nullopt;
    Vector g = unconstrained_gradient(a, g_theta, m);
    return Point{a, std::move(theta), v, std::move(g_theta), std::move(g)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Backtracking from a unit step.  When no step satisfies Armijo (typical once
// decreases drop below rounding), the longest trial whose objective stays
// within rounding of the current value and whose gradient shrinks is taken.
std::optional<Point> line_search(const ObjectiveFn& f, const Point& x,
                                 const Vector& direction, int m, bool* sufficient = nullptr) {
  const double slope = x.grad.dot(direction);
  const double g0 = inf_norm(x.grad_theta);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(x.value));
  std::optional<Point> fallback;
  if (sufficient) *sufficient = false;
  double t = 1.0;
  for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
    auto trial = evaluate(f, x.a + t * direction, m);
    if (!trial) continue;
    // A decrease within rounding is not evidence of progress.
    if (trial->value <= x.value + kArmijo * t * slope && x.value - trial->value > noise) {
      if (sufficient) *sufficient = true;
      return trial;
    }
    if (!fallback && trial->value <= x.value + noise && inf_norm(trial->grad_theta) < g0)
      fallback = std::move(trial);
  }
  return fallback;
}

// Newton step with a central-difference Jacobian of the analytic gradient.
// Used once the quasi-Newton iteration stalls in rounding noise near the
// minimum; accepted only if it shrinks the gradient without raising the
// objective beyond rounding.  On success `hessian` holds the estimate.
std::optional<Point> newton_polish(const ObjectiveFn& f, const Point& x, int m,
                                   Matrix& hessian) {
  const Eigen::Index q = x.a.size();
  hessian.resize(q, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(x.a[k]));
    Vector up = x.a, down = x.a;
    up[k] += h;
    down[k] -= h;
    auto pu = evaluate(f, up, m);
    auto pd = evaluate(f, down, m);
    if (!pu || !pd) return std::nullopt;
    hessian.col(k) = (pu->grad - pd->grad) / (2.0 * h);
  }
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  Eigen::LDLT<Matrix> ldlt(hessian);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Vector step = -ldlt.solve(x.grad);
  if (!step.allFinite()) return std::nullopt;
  auto trial = evaluate(f, x.a + step, m);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(x.value));
  if (!trial || trial->value > x.value + noise ||
      !(inf_norm(trial->grad_theta) < inf_norm(x.grad_theta)))
    return std::nullopt;
  return trial;
}

Vector clipped(Vector d) {
  const double n = inf_norm(d);
  if (n > kMaxStep) d *= kMaxStep / n;
  return d;
}

}  // namespace

Vector to_unconstrained(const Theta& theta) {
  const Vector& g = theta.gamma();
  const int cuts = static_cast<int>(g.size());
  Vector a(theta.dim());
  a[0] = g[0];
  for (int j = 1; j < cuts; ++j) a[j] = std::log(g[j] - g[j - 1]);
  a.tail(theta.covariates()) = theta.beta();
  return a;
}

Theta from_unconstrained(const VectorRef& a, int categories) {
  const int cuts = categories - 1;
  Vector g(cuts);
  g[0] = a[0];
  for (int j = 1; j < cuts; ++j) g[j] = g[j - 1] + std::exp(a[j]);
  return Theta(std::move(g), a.tail(a.size() - cuts));
}

Vector unconstrained_gradient(const VectorRef& a, const VectorRef& grad_theta,
                              int categories) {
  const int cuts = categories - 1;
  Vector out = grad_theta;
  // d gamma_k / d a_j = 1 (j = 1) or exp(a_j) (j >= 2), for every k >= j.
  double tail_sum = 0.0;
  for (int j = cuts - 1; j >= 0; --j) {
    tail_sum += grad_theta[j];
    out[j] = j == 0 ? tail_sum : tail_sum * std::exp(a[j]);
  }
  return out;
}

OptimizerResult minimize_ordered(const ObjectiveFn& f, const Theta& start,
                                 const OptimizerOptions& options) {
  const int m = start.categories();
  const Eigen::Index q = start.dim();

  auto first = evaluate(f, to_unconstrained(start), m);
  if (!first) {
    // Re-run unguarded so the caller sees the underlying error.
    Vector g;
    const double v = f(start, g);
    if (!std::isfinite(v) || !g.allFinite())
      throw DegenerateProbability("objective is not finite at the starting value");
    throw DegenerateProbability("objective cannot be evaluated at the starting value");
  }
  Point x = std::move(*first);

  OptimizerResult result{x.theta};
  result.trace.push_back(x.value);
  Matrix inv_hessian = Matrix::Identity(q, q);
  bool scaled = false;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (inf_norm(x.grad_theta) <= options.grad_tol) break;

    Vector d = -inv_hessian * x.grad;
    if (!(x.grad.dot(d) < 0.0)) {
      inv_hessian.setIdentity();
      scaled = false;
      d = -x.grad;
    }
    bool sufficient = false;
    auto next = line_search(f, x, clipped(d), m, &sufficient);
    if (!sufficient) {
      Matrix hessian;
      if (auto polished = newton_polish(f, x, m, hessian)) {
        inv_hessian = hessian.inverse();
        inv_hessian = 0.5 * (inv_hessian + inv_hessian.transpose()).eval();
        scaled = true;
        x = std::move(*polished);
        result.trace.push_back(x.value);
        continue;
      }
    }
    if (!next) {
      // Steepest descent with step halving.
      inv_hessian.setIdentity();
      scaled = false;
      next = line_search(f, x, clipped(-x.grad), m);
      if (!next) {
        result.status = "line search failed";
        break;
      }
    }

    const Vector s = next->a - x.a;
    const Vector y = next->grad - x.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hessian = Matrix::Identity(q, q) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = inv_hessian * y;
      inv_hessian += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
                     rho * (hy * s.transpose() + s * hy.transpose());
    }
    x = std::move(*next);
    result.trace.push_back(x.value);
  }

  result.theta = x.theta;
  result.value = x.value;
  result.grad_norm = inf_norm(x.grad_theta);
  result.iterations = iter;
  result.converged = result.grad_norm <= options.grad_tol;
  if (result.converged)
    result.status = "converged";
  else if (result.status.empty())
    result.status = "iteration limit reached";
  return result;
}

}  // namespace ordpd
