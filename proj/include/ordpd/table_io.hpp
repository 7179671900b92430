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


#ifndef ORDPD_TABLE_IO_HPP
#define ORDPD_TABLE_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordpd/estimate.hpp"
#include "ordpd/model.hpp"

namespace ordpd {

/// Numeric table with a header row.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws InvalidData if absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a delimited table.  The delimiter is ';' when the header has ';' and
/// no ',', otherwise ','.  Fields may be double-quoted.  Every body cell must
/// parse completely as a finite number; anything else throws InvalidData
/// naming the line and column.
NumericTable read_numeric_csv(std::istream& in, const std::string& source = "input");
NumericTable read_numeric_csv_file(const std::string& path);

/// Quotes a CSV field when it holds a comma, quote or line break.
std::string csv_field(const std::string& text);

/// 17 significant digits, shortest of %g forms; nan/inf spelled out.
std::string format_number(double v);

/// JSON text with every floating-point number written with 17 significant
/// digits (non-finite numbers become null).
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json vector_to_json(const Vector& v);
nlohmann::json matrix_to_json(const Matrix& m);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json theta_to_json(const Theta& theta);
/// Accepts {"gamma": [...], "beta": [...]}, also nested under "theta".
Theta theta_from_json(const nlohmann::json& j);

/// {"gamma","beta","alpha","converged","grad_norm","covariance", ...}
nlohmann::json fit_result_to_json(const FitResult& r);

}  // namespace ordpd

#endif  // ORDPD_TABLE_IO_HPP
