#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "inkrementa/data/dataset.hpp"

namespace inkrementa {

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
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace detail

/// Reads "label,f1,...,fD" rows. Blank lines are ignored; errors cite 1-based line numbers.
inline LabeledDataset load_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");
  LabeledDataset data;
  std::vector<double> row;
  std::size_t dim = 0;
  bool have_dim = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && has_header) continue;
    const auto content = detail::trim(line);
    if (content.empty()) continue;
    const auto cells = detail::split_commas(content);
    auto fail = [&](const std::string& why) {
      return ParseError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (cells.size() < 2) throw fail("expected a label and at least one feature");
    if (!have_dim) {
      dim = cells.size() - 1;
      have_dim = true;
    } else if (cells.size() - 1 != dim) {
      throw fail("row has " + std::to_string(cells.size() - 1) + " features, expected " +
                 std::to_string(dim));
    }
    unsigned long long label = 0;
    const auto lc = cells[0];
    auto [lp, lec] = std::from_chars(lc.data(), lc.data() + lc.size(), label);
    if (lec != std::errc() || lp != lc.data() + lc.size()) {
      throw fail("label '" + std::string(lc) + "' is not a nonnegative integer");
    }
    row.assign(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
      const auto cell = cells[d + 1];
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[d]);
      if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(row[d])) {
        throw fail("non-numeric cell '" + std::string(cell) + "' in column " +
                   std::to_string(d + 2));
      }
    }
    data.add(row, static_cast<ClassId>(label));
  }
  return data;
}

/// Writes "label,f1,...,fD" with a header row; values use round-trip precision.
inline void write_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "label";
  for (std::size_t d = 0; d < data.dim(); ++d) out << ",f" << (d + 1);
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels()[i];
    for (double v : data.sample(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace inkrementa
