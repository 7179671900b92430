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


#include "ordpd/table_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "ordpd/errors.hpp"

namespace ordpd {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

void dump(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const nlohmann::json& e) {
        return e.is_structured();
      });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump(e, out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt::format("{:.17g}", v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::size_t NumericTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw InvalidData(fmt::format("column '{}' not found", name));
}

NumericTable read_numeric_csv(std::istream& in, const std::string& source) {
  NumericTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InvalidData(fmt::format("{}: no header row", source));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const char delim =
      line.find(';') != std::string::npos && line.find(',') == std::string::npos ? ';' : ',';
  table.header = split_fields(line, delim);
  for (const auto& name : table.header) {
    if (name.empty()) throw InvalidData(fmt::format("{}: empty column name in header", source));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, delim);
    if (fields.size() != table.header.size())
      throw InvalidData(fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                    table.header.size(), fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string& f = fields[k];
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      if (!f.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, row[k]);
      if (f.empty() || ec != std::errc() || ptr != end || !std::isfinite(row[k]))
        throw InvalidData(fmt::format("{}:{}: column '{}' has non-numeric value '{}'", source,
                                      line_no, table.header[k], f));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw InvalidData(fmt::format("{}: no data rows", source));
  return table;
}

NumericTable read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData(fmt::format("cannot open '{}'", path));
  return read_numeric_csv(in, path);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump(j, out, indent, 0);
  return out;
}

nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json theta_to_json(const Theta& theta) {
  return {{"gamma", vector_to_json(theta.gamma())}, {"beta", vector_to_json(theta.beta())}};
}

Theta theta_from_json(const nlohmann::json& j) {
  if (j.contains("theta")) return theta_from_json(j.at("theta"));
  try {
    return Theta(vector_from_json(j.at("gamma")), vector_from_json(j.at("beta")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidTheta(fmt::format("malformed parameter JSON: {}", e.what()));
  }
}

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j = theta_to_json(r.theta_hat);
  j["alpha"] = r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json();
  j["converged"] = r.converged;
  j["grad_norm"] = r.grad_norm;
  j["objective_value"] = r.objective_value;
  j["iterations"] = r.iterations;
  j["status"] = r.status;
  j["covariance"] = r.covariance ? matrix_to_json(*r.covariance) : nlohmann::json();
  if (r.covariance) {
    j["se"] = vector_to_json(r.covariance->diagonal().cwiseMax(0.0).cwiseSqrt());
  }
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace ordpd
