#pragma once

#include "dmlm/core_model.hpp"
#include "dmlm/mcmc.hpp"
#include "dmlm/partition.hpp"
#include "dmlm/types.hpp"

namespace dmlm {

/// exp of the posterior-mean linear predictor, alpha_j + sum_p phi_jp x_ip,
/// averaged over the retained samples of a count-model chain.
Matrix estimate_lambda_test(const ChainOutput& chain, const Matrix& X_test);

/// Row-normalized (z + lambda_hat) for held-out subjects.
Matrix estimate_psi_test(const Matrix& lambda_hat, const IntMatrix& Z_test);

/// Posterior-mean intercept (n + 1 / h_alpha0)^-1 1'Y.
double intercept_estimate(const Vector& Y, double h_alpha0);

/// Ridge-form coefficients (B'B + I / h_beta)^-1 B'Y; empty when B has no columns.
Vector ridge_coefficients(const Matrix& B_sel, const Vector& Y, double h_beta);

/// Columns of B flagged in xi, in index order.
Matrix select_columns(const Matrix& B, const IntVector& xi);

/// Balances of a composition after zero replacement, optionally standardized.
/// Column statistics are returned so held-out balances can reuse them.
struct SampleBalances {
  Matrix B;
  ColumnStats stats;
};
SampleBalances sample_balances(Matrix psi, const PartitionSpec& spec, double delta, bool standardize);

/// Everything prediction needs from a response chain, per retained sample:
/// the training balance statistics, the ridge coefficients (zero where the
/// balance is excluded) and the posterior mean of sigma^2.
struct BalancePredictor {
  double alpha0 = 0.0;
  bool standardize = true;
  Matrix mean;    // S x M
  Matrix sd;      // S x M
  Matrix beta;    // S x M
  Vector sigma2;  // S

  int num_samples() const { return static_cast<int>(beta.rows()); }
  int num_balances() const { return static_cast<int>(beta.cols()); }
};

BalancePredictor build_predictor(const ChainOutput& response_chain, const Dataset& train, const PartitionSpec& spec,
                                 const Hyperparams& hyper);

/// Per-sample linear predictors (rows: subjects, columns: samples) for new compositions.
Matrix predictor_means(const BalancePredictor& pred, const Matrix& psi_new, const PartitionSpec& spec, double delta);

/// Sample average of predictor_means.
Vector apply_predictor(const BalancePredictor& pred, const Matrix& psi_new, const PartitionSpec& spec, double delta);

/// log N(y_i; mean_is, sigma2_s) for new subjects with observed responses.
Matrix predictor_loglik(const BalancePredictor& pred, const Matrix& psi_new, const Vector& y_new,
                        const PartitionSpec& spec, double delta);

/// Averages alpha0_hat + B(psi_new)_xi beta_hat_xi over the retained samples.
/// psi_new holds the compositions of the subjects being predicted; beta_hat
/// comes from each sample's training balances, whose statistics are reused
/// to standardize B(psi_new).
Vector predict_from_psi(const ChainOutput& response_chain, const Dataset& train, const Matrix& psi_new,
                        const PartitionSpec& spec, const Hyperparams& hyper);

/// Predicted responses for held-out subjects from a joint-model chain.
Vector predict_y(const ChainOutput& chain, const Dataset& train, const TestSet& test, const PartitionSpec& spec,
                 const Hyperparams& hyper);

/// In-sample fit: each sample's own training balances replace B(psi_new).
Vector fitted_y(const ChainOutput& response_chain, const Dataset& train, const PartitionSpec& spec,
                const Hyperparams& hyper);

/// N x S matrix of log N(y_i; mean_is, sigma2_s) with the coefficients and
/// sigma^2 set to their conditional posterior means given xi^s and psi^s.
Matrix pointwise_loglik(const ChainOutput& response_chain, const Dataset& data, const PartitionSpec& spec,
                        const Hyperparams& hyper);

}  // namespace dmlm
