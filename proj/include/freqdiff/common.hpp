// Copyright 2026 The freqdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace freqdiff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line and column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A computation produced NaN or infinity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

/// Master seed for a stochastic operation.
///
/// Sub-streams are derived with `stream(index)`: the master seed and the
/// index are mixed through splitmix64, so stream `i` is the same whether it
/// is consumed serially or on a worker thread.
struct RngSeed {
  std::uint64_t value = 0;

  constexpr RngSeed() = default;
  constexpr explicit RngSeed(std::uint64_t v) : value(v) {}

  static constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  /// Seed of sub-stream `index`. Distinct indices give unrelated streams.
  constexpr RngSeed stream(std::uint64_t index) const {
    return RngSeed(splitmix64(splitmix64(value) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
  }

  std::mt19937_64 engine() const { return std::mt19937_64(splitmix64(value)); }

  friend constexpr bool operator==(RngSeed, RngSeed) = default;
};

/// Fills a matrix with i.i.d. standard normal draws, column-major order.
inline Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(gen);
  return out;
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace freqdiff
