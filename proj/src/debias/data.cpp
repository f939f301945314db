#include "debias/data.hpp"

#include <cmath>

#include "debias/csv.hpp"

namespace debias {

ObservationalDataset make_dataset(Matrix X, IntVector R, Vector Y,
                                  std::vector<std::string> feature_names) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (n < 2) throw ValidationError("dataset: need n >= 2 rows, got " + std::to_string(n));
  if (d < 1) throw ValidationError("dataset: need d >= 1 feature columns");
  if (R.size() != n || Y.size() != n)
    throw ValidationError("dataset: X, R, Y row counts disagree");
  if (!X.allFinite()) throw ValidationError("dataset: non-finite feature value");
  if (!Y.allFinite()) throw ValidationError("dataset: non-finite outcome value");

  int treated = 0, control = 0;
  for (Index i = 0; i < n; ++i) {
    if (R[i] == 1)
      ++treated;
    else if (R[i] == 0)
      ++control;
    else
      throw ValidationError("dataset: treatment value " + std::to_string(R[i]) + " at row " +
                            std::to_string(i + 1) + " is not 0/1");
  }
  if (treated == 0) throw ValidationError("dataset: no treated units (all R_i = 0)");
  if (control == 0) throw ValidationError("dataset: no control units (all R_i = 1)");

  if (feature_names.empty()) {
    feature_names.reserve(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) feature_names.push_back("x" + std::to_string(j + 1));
  } else if (static_cast<Index>(feature_names.size()) != d) {
    throw ValidationError("dataset: feature name count does not match d");
  }
  return ObservationalDataset{std::move(X), std::move(R), std::move(Y), std::move(feature_names)};
}

ObservationalDataset load_dataset(const std::string& path, const DatasetSchema& schema) {
  CsvTable table = read_csv(path);

  const Index rcol = table.column_index(schema.treatment);
  if (rcol < 0) throw ValidationError(path + ": no treatment column '" + schema.treatment + "'");
  const Index ycol = table.column_index(schema.outcome);
  if (ycol < 0) throw ValidationError(path + ": no outcome column '" + schema.outcome + "'");

  std::vector<Index> fcols;
  std::vector<std::string> fnames;
  if (schema.features.empty()) {
    for (Index j = 0; j < static_cast<Index>(table.columns.size()); ++j) {
      if (j == rcol || j == ycol) continue;
      fcols.push_back(j);
      fnames.push_back(table.columns[static_cast<std::size_t>(j)]);
    }
  } else {
    for (const auto& name : schema.features) {
      Index j = table.column_index(name);
      if (j < 0) throw ValidationError(path + ": no feature column '" + name + "'");
      fcols.push_back(j);
      fnames.push_back(name);
    }
  }
  if (fcols.empty()) throw ValidationError(path + ": no feature columns");

  const Index n = table.values.rows();
  Matrix X(n, static_cast<Index>(fcols.size()));
  for (std::size_t k = 0; k < fcols.size(); ++k) X.col(static_cast<Index>(k)) = table.values.col(fcols[k]);

  IntVector R(n);
  for (Index i = 0; i < n; ++i) {
    double v = table.values(i, rcol);
    if (v != 0.0 && v != 1.0)
      throw ValidationError(path + ": row " + std::to_string(i + 2) + ", column '" + schema.treatment +
                            "': treatment must be 0 or 1, got " + std::to_string(v));
    R[i] = static_cast<int>(v);
  }
  Vector Y = table.values.col(ycol);

  return make_dataset(std::move(X), std::move(R), std::move(Y), std::move(fnames));
}

void write_dataset_csv(const ObservationalDataset& data, const std::string& path,
                       const std::string& treatment, const std::string& outcome) {
  std::vector<std::string> cols = data.feature_names;
  cols.push_back(treatment);
  cols.push_back(outcome);
  Matrix values(data.n(), data.d() + 2);
  values.leftCols(data.d()) = data.X;
  values.col(data.d()) = data.R.cast<double>();
  values.col(data.d() + 1) = data.Y;
  write_csv(path, cols, values);
}

StackedDesign stack_design(const Matrix& X, const IntVector& R) {
  const Index n = X.rows();
  const Index d = X.cols();
  StackedDesign out;
  out.Z.resize(n, d + 1);
  out.Z.leftCols(d) = X;
  out.Z.col(d) = R.cast<double>();
  out.Z_star.resize(2 * n, d + 1);
  out.Z_star.topRows(n) = out.Z;
  out.Z_star.bottomRows(n).leftCols(d) = X;
  out.Z_star.bottomRows(n).col(d) = (1 - R.array()).cast<double>();
  return out;
}

StackedDesign stack_design(const ObservationalDataset& data) { return stack_design(data.X, data.R); }

}  // namespace debias
