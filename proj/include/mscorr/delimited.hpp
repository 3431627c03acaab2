#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mscorr/error.hpp"
#include "mscorr/matrix.hpp"

namespace mscorr::text {

inline constexpr char kDelimiter = ',';

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim = kDelimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    fields.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// 17 significant digits: round-trips every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Three-decimal display form used next to full-precision values in reports.
inline std::string format_fixed3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Blank lines and lines starting with '#' are skipped by all readers.
inline bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

inline std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A table with a header row, a first column of row labels and numeric cells.
struct WideTable {
  std::string corner;  // header of the label column
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  ColumnMatrix<double> values;
};

inline WideTable read_wide_table(std::istream& in) {
  WideTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto fields = split(line);
    if (!have_header) {
      if (fields.size() < 2) throw ParseError(line_no, "header needs a label column and at least one value column");
      table.corner = std::string(fields[0]);
      for (std::size_t i = 1; i < fields.size(); ++i) table.columns.emplace_back(fields[i]);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size() + 1)
      throw ParseError(line_no, "expected " + std::to_string(table.columns.size() + 1) +
                                    " fields, found " + std::to_string(fields.size()));
    table.row_labels.emplace_back(fields[0]);
    std::vector<double> row;
    row.reserve(table.columns.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = parse_double(fields[i]);
      if (!v) throw ParseError(line_no, "not a number: '" + std::string(fields[i]) + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError("table is empty");
  table.values = ColumnMatrix<double>(rows.size(), table.columns.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < table.columns.size(); ++c) table.values(r, c) = rows[r][c];
  return table;
}

inline WideTable read_wide_table(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_wide_table(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

template <typename T, typename Format>
void write_wide_table(std::ostream& out, std::string_view corner,
                      const std::vector<std::string>& columns,
                      const std::vector<std::string>& row_labels, const ColumnMatrix<T>& values,
                      Format&& format) {
  out << corner;
  for (const auto& c : columns) out << kDelimiter << c;
  out << '\n';
  for (std::size_t r = 0; r < values.rows(); ++r) {
    out << row_labels[r];
    for (std::size_t c = 0; c < values.cols(); ++c) out << kDelimiter << format(values(r, c));
    out << '\n';
  }
}

}  // namespace mscorr::text
