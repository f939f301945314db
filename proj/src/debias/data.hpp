#pragma once

#include <string>
#include <vector>

#include "debias/common.hpp"

namespace debias {

// An observational study: features X (n x d), binary treatment R, outcome Y.
// Instances are validated on construction and immutable by convention;
// they can be shared freely across worker threads.
struct ObservationalDataset {
  Matrix X;
  IntVector R;
  Vector Y;
  std::vector<std::string> feature_names;  // size d

  Index n() const { return X.rows(); }
  Index d() const { return X.cols(); }
};

// Validates and assembles a dataset. Requires n >= 2, d >= 1, R in {0,1}
// with both labels present, and finite X and Y.
ObservationalDataset make_dataset(Matrix X, IntVector R, Vector Y,
                                  std::vector<std::string> feature_names = {});

// Column mapping for CSV ingestion. If `features` is empty, every column
// not named as treatment or outcome is a feature, in file order.
struct DatasetSchema {
  std::string treatment = "r";
  std::string outcome = "y";
  std::vector<std::string> features;
};

ObservationalDataset load_dataset(const std::string& path, const DatasetSchema& schema = {});

// Writes features (named columns), then the treatment and outcome columns.
void write_dataset_csv(const ObservationalDataset& data, const std::string& path,
                       const std::string& treatment = "r", const std::string& outcome = "y");

// Factual design Z = [X | R] and the stacked factual/counterfactual design
// Z_star = [X | R ; X | 1-R] used for joint posterior evaluation.
struct StackedDesign {
  Matrix Z;       // n x (d+1)
  Matrix Z_star;  // 2n x (d+1)
};

StackedDesign stack_design(const Matrix& X, const IntVector& R);
StackedDesign stack_design(const ObservationalDataset& data);

}  // namespace debias
