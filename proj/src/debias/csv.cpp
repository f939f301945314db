#include "debias/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace debias {

Index CsvTable::column_index(const std::string& name) const {
  for (Index j = 0; j < static_cast<Index>(columns.size()); ++j) {
    if (columns[static_cast<std::size_t>(j)] == name) return j;
  }
  return -1;
}

namespace {

void split_line(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file, expected a header row");

  CsvTable table;
  std::vector<std::string> cells;
  split_line(line, cells);
  for (const auto& c : cells) table.columns.push_back(trim(c));
  const std::size_t ncol = table.columns.size();

  std::vector<double> data;
  Index nrow = 0;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    split_line(line, cells);
    if (cells.size() != ncol) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(ncol) + " cells, got " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < ncol; ++j) {
      std::string cell = trim(cells[j]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ValidationError(path + ":" + std::to_string(lineno) + ": column '" + table.columns[j] +
                              "': not a finite number: '" + cell + "'");
      }
      data.push_back(v);
    }
    ++nrow;
  }

  table.values.resize(nrow, static_cast<Index>(ncol));
  for (Index i = 0; i < nrow; ++i)
    for (Index j = 0; j < static_cast<Index>(ncol); ++j)
      table.values(i, j) = data[static_cast<std::size_t>(i) * ncol + static_cast<std::size_t>(j)];
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values) {
  if (values.cols() != static_cast<Index>(columns.size()))
    throw ValidationError("write_csv: header/value column mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ',';
    out << columns[j];
  }
  out << '\n';
  char buf[32];
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace debias
