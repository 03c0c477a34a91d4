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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "freqdiff/common.hpp"
#include "freqdiff/motion.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff {

/// A named column of a plot-ready output table.
struct Column {
  std::string name;
  std::vector<double> values;
};

using Table = std::vector<Column>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline bool parse_real(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

/// Reads all lines, dropping trailing blank lines at the end of the file.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Loads a frames x dims motion from CSV, one row per frame.
///
/// Errors name the 1-based physical line and column of the offending cell.
inline MotionSequence load_motion_csv(const std::filesystem::path& path, bool has_header) {
  const auto lines = detail::read_lines(path);
  const std::size_t first = has_header ? 1 : 0;
  if (lines.size() <= first) throw ParseError("no rows in '" + path.string() + "'", 0, 0);

  const std::size_t n_rows = lines.size() - first;
  std::size_t n_cols = 0;
  std::vector<double> values;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t line_no = first + r + 1;
    const auto cells = detail::split_commas(lines[first + r]);
    if (r == 0) {
      n_cols = cells.size();
      values.reserve(n_rows * n_cols);
    } else if (cells.size() != n_cols) {
      throw ParseError("ragged row at line " + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                           " columns, found " + std::to_string(cells.size()),
                       line_no, 0);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_real(cells[c], v)) {
        throw ParseError("non-numeric cell '" + std::string(cells[c]) + "' at line " + std::to_string(line_no) +
                             ", column " + std::to_string(c + 1),
                         line_no, c + 1);
      }
      values.push_back(v);
    }
  }

  Matrix data(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < n_cols; ++c)
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * n_cols + c];
  return MotionSequence(std::move(data));
}

/// Writes a motion as headerless CSV, one row per frame.
inline void save_motion_csv(const std::filesystem::path& path, const MotionSequence& motion) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (Eigen::Index i = 0; i < motion.frames(); ++i) {
    for (Eigen::Index d = 0; d < motion.dims(); ++d) {
      if (d) out << ',';
      out << detail::format_real(motion(i, d));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Synthetic low-pass motion: every dimension has DCT coefficients
/// +-(k+1)^(-alpha/2) with signs drawn from `seed.stream(d)`.
inline MotionSequence gen_powerlaw_motion(Eigen::Index n_frames, Eigen::Index n_dims, double alpha, RngSeed seed) {
  require(n_frames >= 2, "gen_powerlaw_motion: n_frames must be >= 2");
  require(n_dims >= 1, "gen_powerlaw_motion: n_dims must be >= 1");
  require(alpha > 0.0 && std::isfinite(alpha), "gen_powerlaw_motion: alpha must be > 0");

  Matrix data(n_frames, n_dims);
  for (Eigen::Index d = 0; d < n_dims; ++d) {
    auto gen = seed.stream(static_cast<std::uint64_t>(d)).engine();
    std::bernoulli_distribution coin(0.5);
    Spectrum coeffs(n_frames);
    for (Eigen::Index k = 0; k < n_frames; ++k) {
      const double magnitude = std::pow(static_cast<double>(k + 1), -alpha / 2.0);
      coeffs[k] = coin(gen) ? magnitude : -magnitude;
    }
    data.col(d) = idct(coeffs);
  }
  return MotionSequence(std::move(data));
}

/// Writes a CSV table with a header row. Values use the shortest decimal form
/// that round-trips exactly (at least as precise as 17 significant digits).
inline void save_table(const std::filesystem::path& path, std::span<const Column> columns) {
  if (columns.empty()) throw InvalidArgument("save_table: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& col : columns) {
    require(!col.name.empty(), "save_table: empty column name");
    require(col.name.find_first_of(",\n\r") == std::string::npos,
            "save_table: column name '" + col.name + "' contains a separator");
    require(col.values.size() == rows, "save_table: column '" + col.name + "' has " +
                                           std::to_string(col.values.size()) + " values, expected " +
                                           std::to_string(rows));
  }

  std::ostringstream buf;
  for (std::size_t c = 0; c < columns.size(); ++c) buf << (c ? "," : "") << columns[c].name;
  buf << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) buf << (c ? "," : "") << detail::format_real(columns[c].values[r]);
    buf << '\n';
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << buf.str();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void save_table(const std::filesystem::path& path, const Table& columns) {
  save_table(path, std::span<const Column>(columns));
}

/// Reads a table written by save_table.
inline Table load_table(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError("no header in '" + path.string() + "'", 0, 0);
  Table table;
  for (auto name : detail::split_commas(lines.front())) table.push_back(Column{std::string(name), {}});
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split_commas(lines[r]);
    if (cells.size() != table.size())
      throw ParseError("ragged row at line " + std::to_string(r + 1), r + 1, 0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc() || ptr != cells[c].data() + cells[c].size())
        throw ParseError("non-numeric cell at line " + std::to_string(r + 1) + ", column " + std::to_string(c + 1),
                         r + 1, c + 1);
      table[c].values.push_back(v);
    }
  }
  return table;
}

}  // namespace freqdiff
