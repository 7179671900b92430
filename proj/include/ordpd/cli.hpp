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


#ifndef ORDPD_CLI_HPP
#define ORDPD_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordpd/link.hpp"
#include "ordpd/model.hpp"

namespace ordpd::cli {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitNoConvergence = 3;

struct Standardized {
  DesignMatrix x;
  Vector median;
  /// Median absolute deviation (not rescaled); the divisor is 1.4828 * mad.
  Vector mad;
};

/// x* = (x - med) / (1.4828 MAD) column by column.  Throws ZeroMadColumn.
Standardized standardize(const DesignMatrix& x, const std::vector<std::string>& names = {});
/// Applies a previously estimated centring and scaling.
DesignMatrix apply_standardization(const DesignMatrix& x, const Vector& median,
                                   const Vector& mad);
DesignMatrix unstandardize(const DesignMatrix& z, const Vector& median, const Vector& mad);

enum class TrimDf { n_minus_1, p };
TrimDf trim_df_from_name(std::string_view name);

/// Rows kept by robust trimming: rows whose squared robust distance from the
/// component-wise medians (diagonal scale 1.4828 MAD) reaches the chi-square
/// quantile are dropped.  quantile = 1 keeps every row.
std::vector<int> robust_trim(const DesignMatrix& x, double quantile = 0.95,
                             TrimDf df = TrimDf::n_minus_1,
                             const std::vector<std::string>& names = {});

struct Prediction {
  std::vector<int> category;
  /// n x m category probabilities.
  Matrix probs;
};

/// Row-wise argmax of the category probabilities, ties to the smaller category.
Prediction predict(const Theta& theta, const Link& link, const DesignMatrix& x);
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

/// Seeded random partition; round(fraction * n) rows go to train, both parts
/// sorted by row index.
Split train_test_split(int n, double fraction, std::uint64_t seed);

/// Maps raw response values to categories 1..m.  An empty map requires the
/// raw values to be integers >= 1 already.
std::vector<int> map_labels(const std::vector<double>& raw,
                            const std::map<double, int>& label_map);
/// Distinct observed values, ascending, numbered 1..K.
std::map<double, int> auto_label_map(const std::vector<double>& raw);
/// {"3": 1, "4": 2, ...}
std::map<double, int> label_map_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// Parses and executes one command line.  Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordpd::cli

#endif  // ORDPD_CLI_HPP
