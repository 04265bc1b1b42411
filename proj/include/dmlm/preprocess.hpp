#pragma once

#include "dmlm/types.hpp"

namespace dmlm {

/// Training-set centering of Y and standardization of X, reusable on test data.
struct Standardizer {
  double y_mean = 0.0;
  Vector x_mean;
  Vector x_sd;

  static Standardizer fit(const Dataset& train);

  Dataset apply(const Dataset& data) const;
  TestSet apply(const TestSet& test) const;
};

}  // namespace dmlm
