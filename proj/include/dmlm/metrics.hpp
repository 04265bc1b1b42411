#pragma once

#include "dmlm/types.hpp"

#include <vector>

namespace dmlm {

struct ConfusionSummary {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;

  long selected() const { return tp + fp; }
};

/// Selection accuracy of binary decisions against binary truth (any shape,
/// compared entrywise). MCC is 0 when any factor of its denominator is 0.
ConfusionSummary confusion(const IntMatrix& selected, const IntMatrix& truth);
ConfusionSummary confusion(const IntVector& selected, const IntVector& truth);

/// Sum of squared errors (the reported MSE / PMSE) and its per-subject mean.
struct SquaredError {
  double sum = 0.0;
  double mean = 0.0;
};
SquaredError squared_error(const Vector& y, const Vector& yhat);

/// Indicator of mppi >= threshold.
IntMatrix median_model(const Matrix& mppi, double threshold = 0.5);
IntVector median_model(const Vector& mppi, double threshold = 0.5);

/// Mean and sample standard deviation (0 for fewer than two values).
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};
MeanSd mean_sd(const std::vector<double>& values);

}  // namespace dmlm
