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

#include "ordpd/robust_scale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ordpd/errors.hpp"

namespace ordpd {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_abs_deviation(std::span<const double> values, double center) {
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [center](double v) { return std::abs(v - center); });
  return median(std::move(dev));
}

RobustStandardizer RobustStandardizer::fit(const DesignMatrix& x,
                                           ZeroScalePolicy policy) {
  const Eigen::Index p = x.cols();
  RobustStandardizer out{Vector(p), Vector(p)};
  std::vector<double> column(x.rows());
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) column[i] = x(i, k);
    const double med = median(column);
    const double mad = median_abs_deviation(column, med);
    out.center[k] = med;
    if (mad > 0.0) {
      out.scale[k] = kMadConsistency * mad;
      continue;
    }
    if (policy == ZeroScalePolicy::strict)
      throw SingularScatter("covariate " + std::to_string(k) +
                            " has zero median absolute deviation");
    double mean_dev = 0.0;
    for (double v : column) mean_dev += std::abs(v - med);
    mean_dev /= static_cast<double>(column.size());
    // sqrt(pi/2) makes the mean absolute deviation consistent at the normal.
    out.scale[k] = std::sqrt(std::numbers::pi / 2.0) * mean_dev;
  }
  return out;
}

Vector RobustStandardizer::squared_distances(const DesignMatrix& x) const {
  Vector d = Vector::Zero(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (scale[k] == 0.0) continue;
      const double z = (x(i, k) - center[k]) / scale[k];
      d[i] += z * z;
    }
  }
  return d;
}

}  // namespace ordpd
