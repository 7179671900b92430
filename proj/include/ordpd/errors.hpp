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

#ifndef ORDPD_ERRORS_HPP
#define ORDPD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ordpd {

// Root of every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cut-offs not strictly increasing, wrong dimensions, or m < 2.
class InvalidTheta : public Error {
 public:
  using Error::Error;
};

// Malformed dataset: responses outside 1..m, non-finite covariates, ...
class InvalidData : public Error {
 public:
  using Error::Error;
};

// A probability that must be divided by (or logged) fell below the
// underflow threshold.
class DegenerateProbability : public Error {
 public:
  using Error::Error;
};

// An optimisation that must succeed (e.g. a tuning pilot) did not converge.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Psi matrix is not safely invertible (condition number above the guard).
class SingularPsi : public Error {
 public:
  using Error::Error;
};

// Robust scatter has a zero scale and the strict policy was requested.
class SingularScatter : public Error {
 public:
  using Error::Error;
};

// A column of the design has zero median absolute deviation.
class ZeroMadColumn : public Error {
 public:
  ZeroMadColumn(std::size_t column, const std::string& name)
      : Error("column " + (name.empty() ? std::to_string(column) : name) +
              " has zero median absolute deviation"),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// Exhaustive GES enumeration requested beyond the m^n cap.
class ExactTooLarge : public Error {
 public:
  using Error::Error;
};

// Fewer low-predictor rows than requested vertical outliers.
class InsufficientLowPredictor : public Error {
 public:
  using Error::Error;
};

}  // namespace ordpd

#endif  // ORDPD_ERRORS_HPP
