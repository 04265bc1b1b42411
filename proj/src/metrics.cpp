#include "dmlm/metrics.hpp"

#include <cmath>

namespace dmlm {

namespace {

ConfusionSummary tally(const int* sel, const int* truth, Eigen::Index n) {
  ConfusionSummary c;
  for (Eigen::Index k = 0; k < n; ++k) {
    const bool s = sel[k] != 0;
    const bool t = truth[k] != 0;
    if (s && t) ++c.tp;
    else if (s) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  const double tp = c.tp, tn = c.tn, fp = c.fp, fn = c.fn;
  c.sensitivity = c.tp + c.fn ? tp / (tp + fn) : 0.0;
  c.specificity = c.tn + c.fp ? tn / (tn + fp) : 0.0;
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  c.mcc = denom > 0.0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
  return c;
}

}  // namespace

ConfusionSummary confusion(const IntMatrix& selected, const IntMatrix& truth) {
  if (selected.rows() != truth.rows() || selected.cols() != truth.cols()) {
    throw DimensionError("confusion: selection and truth shapes differ");
  }
  return tally(selected.data(), truth.data(), selected.size());
}

ConfusionSummary confusion(const IntVector& selected, const IntVector& truth) {
  if (selected.size() != truth.size()) throw DimensionError("confusion: selection and truth lengths differ");
  return tally(selected.data(), truth.data(), selected.size());
}

SquaredError squared_error(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw DimensionError("squared_error: lengths differ");
  SquaredError e;
  e.sum = (y - yhat).squaredNorm();
  e.mean = y.size() ? e.sum / static_cast<double>(y.size()) : 0.0;
  return e;
}

IntMatrix median_model(const Matrix& mppi, double threshold) {
  return (mppi.array() >= threshold).cast<int>().matrix();
}

IntVector median_model(const Vector& mppi, double threshold) {
  return (mppi.array() >= threshold).cast<int>().matrix();
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

}  // namespace dmlm
