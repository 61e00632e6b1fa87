#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "cfx/errors.hpp"
#include "cfx/linalg.hpp"

namespace cfx {

// Numeric CSV: one header row, comma separator, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vec> rows;

  std::size_t n_cols() const { return header.size(); }
  std::size_t n_rows() const { return rows.size(); }

  Vec column(std::size_t j) const {
    Vec c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r[j]);
    return c;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline double parse_cell(const std::string& cell, std::size_t line_no) {
  std::size_t b = cell.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    throw ParseError("csv: empty cell on line " + std::to_string(line_no));
  std::size_t e = cell.find_last_not_of(" \t\r");
  std::string t = cell.substr(b, e - b + 1);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError("csv: cell '" + t + "' on line " + std::to_string(line_no) +
                     " is not numeric");
  }
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (table.header.empty()) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError("csv: line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(table.header.size()));
    Vec row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      row[j] = detail::parse_cell(cells[j], line_no);
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError("csv: missing header row");
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace cfx
