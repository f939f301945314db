#pragma once

#include <string>
#include <vector>

#include "debias/common.hpp"

namespace debias {

// A parsed all-numeric CSV: header names plus a dense value matrix.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;  // rows x columns.size()

  Index column_index(const std::string& name) const;  // -1 if absent
};

// Reads a CSV file with a header row. Every data cell must be a finite
// decimal number; empty or non-numeric cells raise ValidationError naming
// the offending row and column. Line endings \n and \r\n are accepted.
CsvTable read_csv(const std::string& path);

// Writes header + rows with full double precision.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values);

}  // namespace debias
