#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dmlm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;
using IntMatrix = Eigen::MatrixXi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared at matrix entry (row, col); zero-based.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index row, Eigen::Index col)
      : Error(what + " at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  Eigen::Index row() const { return row_; }
  Eigen::Index col() const { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

/// Observed data for one fit: response Y (N), taxa counts Z (N x J), covariates X (N x P).
struct Dataset {
  Vector Y;
  IntMatrix Z;
  Matrix X;
  IntVector row_totals;

  Eigen::Index n() const { return Z.rows(); }
  Eigen::Index j() const { return Z.cols(); }
  Eigen::Index p() const { return X.cols(); }

  /// Builds a dataset and fills row_totals; throws if any invariant fails.
  static Dataset make(Vector y, IntMatrix z, Matrix x);

  void validate() const;
};

/// Held-out subjects for prediction; Y is absent when only predictions are wanted.
struct TestSet {
  IntMatrix Z;
  Matrix X;
  std::optional<Vector> Y;

  Eigen::Index n() const { return Z.rows(); }
  void validate(Eigen::Index J, Eigen::Index P) const;
};

/// Fixed prior and proposal constants.
struct Hyperparams {
  double h_alpha0 = 1.0;
  double h_beta = 1.0;
  double a0 = 2.0;
  double b0 = 2.0;
  double r2 = 10.0;            // slab variance of phi, shared across taxa
  double sigma_alpha2 = 10.0;  // prior variance of the taxon intercepts
  double a = 1.0;
  double b = 9.0;
  double a_m = 1.0;
  double b_m = 9.0;
  double proposal_sd = 0.5;
  double delta = 6.67e-5;

  void validate() const;
};

}  // namespace dmlm
