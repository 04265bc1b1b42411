#include "dmlm/preprocess.hpp"

#include <cmath>

namespace dmlm {

Standardizer Standardizer::fit(const Dataset& train) {
  Standardizer s;
  const auto n = static_cast<double>(train.n());
  s.y_mean = train.Y.mean();
  s.x_mean = train.X.colwise().mean().transpose();
  s.x_sd.resize(train.p());
  for (Eigen::Index p = 0; p < train.p(); ++p) {
    const double ss = (train.X.col(p).array() - s.x_mean(p)).square().sum();
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    // Constant covariates are centred only.
    s.x_sd(p) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
  if (data.p() != x_mean.size()) throw DimensionError("standardizer fitted on a different number of covariates");
  Dataset out = data;
  out.Y.array() -= y_mean;
  out.X = (data.X.rowwise() - x_mean.transpose()).array().rowwise() / x_sd.transpose().array();
  return out;
}

TestSet Standardizer::apply(const TestSet& test) const {
  if (test.X.cols() != x_mean.size()) throw DimensionError("standardizer fitted on a different number of covariates");
  TestSet out = test;
  out.X = (test.X.rowwise() - x_mean.transpose()).array().rowwise() / x_sd.transpose().array();
  if (out.Y) out.Y->array() -= y_mean;
  return out;
}

}  // namespace dmlm
