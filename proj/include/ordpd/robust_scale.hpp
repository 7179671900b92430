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

#ifndef ORDPD_ROBUST_SCALE_HPP
#define ORDPD_ROBUST_SCALE_HPP

#include <span>
#include <vector>

#include "ordpd/model.hpp"

namespace ordpd {

/// 1.4828 * MAD is a consistent estimate of the normal standard deviation.
inline constexpr double kMadConsistency = 1.4828;

double median(std::vector<double> values);
/// Median of |v - center| (not rescaled).
double median_abs_deviation(std::span<const double> values, double center);

enum class ZeroScalePolicy {
  strict,    // zero MAD throws
  fallback,  // MAD -> 1.2533 * mean absolute deviation -> coordinate ignored
};

/// Component-wise median location and diagonal scale 1.4828 * MAD.
/// A zero entry in `scale` marks a coordinate that carries no spread and is
/// left out of robust distances.
struct RobustStandardizer {
  Vector center;
  Vector scale;

  static RobustStandardizer fit(const DesignMatrix& x, ZeroScalePolicy policy);

  /// Squared standardized Euclidean norm of each row.
  Vector squared_distances(const DesignMatrix& x) const;
};

}  // namespace ordpd

#endif  // ORDPD_ROBUST_SCALE_HPP
