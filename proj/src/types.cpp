#include "dmlm/types.hpp"

#include <cmath>

namespace dmlm {

Dataset Dataset::make(Vector y, IntMatrix z, Matrix x) {
  Dataset d;
  d.Y = std::move(y);
  d.Z = std::move(z);
  d.X = std::move(x);
  d.row_totals = d.Z.rowwise().sum();
  d.validate();
  return d;
}

void Dataset::validate() const {
  const auto N = Z.rows();
  if (N < 1 || Z.cols() < 1 || X.cols() < 1) throw DimensionError("dataset needs N, J, P >= 1");
  if (Y.size() != N) {
    throw DimensionError("Y has " + std::to_string(Y.size()) + " rows, Z has " + std::to_string(N));
  }
  if (X.rows() != N) {
    throw DimensionError("X has " + std::to_string(X.rows()) + " rows, Z has " + std::to_string(N));
  }
  if (row_totals.size() != N) throw DimensionError("row_totals length does not match Z");
  for (Eigen::Index i = 0; i < N; ++i) {
    long total = 0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      if (Z(i, j) < 0) throw DomainError("negative count at row " + std::to_string(i + 1));
      total += Z(i, j);
    }
    if (total < 1) throw DomainError("subject " + std::to_string(i + 1) + " has no counts");
    if (total != row_totals(i)) throw DomainError("row_totals inconsistent with Z");
  }
  if (!Y.allFinite() || !X.allFinite()) throw DomainError("Y and X must be finite");
}

void TestSet::validate(Eigen::Index J, Eigen::Index P) const {
  if (Z.cols() != J || X.cols() != P) {
    throw DimensionError("test set has J=" + std::to_string(Z.cols()) + ", P=" + std::to_string(X.cols()) +
                         "; expected J=" + std::to_string(J) + ", P=" + std::to_string(P));
  }
  if (X.rows() != Z.rows()) throw DimensionError("test X and Z row counts differ");
  if (Y && Y->size() != Z.rows()) throw DimensionError("test Y and Z row counts differ");
  if ((Z.array() < 0).any()) throw DomainError("negative count in test set");
}

void Hyperparams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"h_alpha0", h_alpha0}, {"h_beta", h_beta}, {"a0", a0},       {"b0", b0},
      {"r2", r2},             {"sigma_alpha2", sigma_alpha2},       {"a", a},
      {"b", b},               {"a_m", a_m},     {"b_m", b_m},       {"proposal_sd", proposal_sd},
      {"delta", delta}};
  for (const auto& [name, v] : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("hyperparameter ") + name + " must be positive and finite");
    }
  }
}

}  // namespace dmlm
