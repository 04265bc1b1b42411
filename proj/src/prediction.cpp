#include "dmlm/prediction.hpp"

#include <cmath>
#include <optional>

namespace dmlm {

namespace {

void require_response_chain(const ChainOutput& chain) {
  if (chain.xi.empty()) throw DomainError("chain has no balance-selection samples");
  if (chain.psi.empty()) throw DomainError("chain has no composition samples");
  if (chain.psi.size() != 1 && chain.psi.size() != chain.xi.size()) {
    throw DomainError("chain composition and selection sample counts differ");
  }
}

}  // namespace

Matrix estimate_lambda_test(const ChainOutput& chain, const Matrix& X_test) {
  if (chain.alpha.empty()) throw DomainError("estimate_lambda_test needs a chain with count-model samples");
  const auto J = chain.alpha.front().size();
  if (X_test.cols() != chain.phi.front().cols()) {
    throw DimensionError("test covariates have " + std::to_string(X_test.cols()) + " columns, chain expects " +
                         std::to_string(chain.phi.front().cols()));
  }
  Vector alpha_bar = Vector::Zero(J);
  Matrix phi_bar = Matrix::Zero(J, chain.phi.front().cols());
  for (std::size_t s = 0; s < chain.alpha.size(); ++s) {
    alpha_bar += chain.alpha[s];
    phi_bar += chain.phi[s];
  }
  const double S = static_cast<double>(chain.alpha.size());
  alpha_bar /= S;
  phi_bar /= S;
  // The linear predictor is linear in (alpha, phi), so its sample mean is the
  // predictor at the mean coefficients.
  Matrix lambda = (X_test * phi_bar.transpose()).rowwise() + alpha_bar.transpose();
  for (Eigen::Index j = 0; j < lambda.cols(); ++j) {
    for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
      const double v = std::exp(lambda(i, j));
      if (!std::isfinite(v) || !(v > 0.0)) throw NonFiniteError("estimate_lambda_test: exp overflow", i, j);
      lambda(i, j) = v;
    }
  }
  return lambda;
}

Matrix estimate_psi_test(const Matrix& lambda_hat, const IntMatrix& Z_test) {
  if (lambda_hat.rows() != Z_test.rows() || lambda_hat.cols() != Z_test.cols()) {
    throw DimensionError("lambda_hat and Z_test shapes differ");
  }
  Matrix psi = Z_test.cast<double>() + lambda_hat;
  psi.array().colwise() /= psi.rowwise().sum().array();
  return psi;
}

double intercept_estimate(const Vector& Y, double h_alpha0) {
  return Y.sum() / (static_cast<double>(Y.size()) + 1.0 / h_alpha0);
}

Vector ridge_coefficients(const Matrix& B_sel, const Vector& Y, double h_beta) {
  if (B_sel.cols() == 0) return Vector();
  Matrix A = B_sel.transpose() * B_sel;
  A.diagonal().array() += 1.0 / h_beta;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw Error("ridge system is not positive definite");
  return llt.solve(B_sel.transpose() * Y);
}

Matrix select_columns(const Matrix& B, const IntVector& xi) {
  if (B.cols() != xi.size()) throw DimensionError("selection length does not match balance columns");
  Matrix out(B.rows(), xi.count());
  Eigen::Index col = 0;
  for (Eigen::Index m = 0; m < xi.size(); ++m) {
    if (xi(m)) out.col(col++) = B.col(m);
  }
  return out;
}

SampleBalances sample_balances(Matrix psi, const PartitionSpec& spec, double delta, bool standardize) {
  zero_replace_rows(psi, delta);
  SampleBalances out;
  out.B = balances_from_log(psi.array().log().matrix(), spec);
  if (standardize) {
    out.stats = standardize_columns(out.B);
  } else {
    out.stats.mean = Vector::Zero(out.B.cols());
    out.stats.sd = Vector::Ones(out.B.cols());
  }
  return out;
}

namespace {

// Conditional posterior of (intercept, beta) and sigma^2 given the selected
// balances. The intercept decouples from beta when B_sel has centred columns.
struct Conditional {
  Vector coef;  // intercept first
  double sigma2;
};

Conditional conditional_posterior(const Matrix& B_sel, const Vector& Y, const Hyperparams& hyper) {
  const auto n = Y.size();
  const auto k = B_sel.cols();
  Matrix W(n, k + 1);
  W.col(0).setOnes();
  W.rightCols(k) = B_sel;
  Matrix A = W.transpose() * W;
  A(0, 0) += 1.0 / hyper.h_alpha0;
  for (Eigen::Index m = 1; m <= k; ++m) A(m, m) += 1.0 / hyper.h_beta;
  const Vector rhs = W.transpose() * Y;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw Error("posterior precision is not positive definite");
  Conditional out;
  out.coef = llt.solve(rhs);
  const double quad = Y.squaredNorm() - rhs.dot(out.coef);
  out.sigma2 = (hyper.b0 + 0.5 * quad) / (hyper.a0 + 0.5 * static_cast<double>(n) - 1.0);
  if (!(out.sigma2 > 0.0) || !std::isfinite(out.sigma2)) throw Error("posterior mean of sigma^2 is not positive");
  return out;
}

}  // namespace

BalancePredictor build_predictor(const ChainOutput& chain, const Dataset& train, const PartitionSpec& spec,
                                 const Hyperparams& hyper) {
  require_response_chain(chain);
  const int S = static_cast<int>(chain.xi.size());
  const int M = spec.num_balances();
  BalancePredictor pred;
  pred.alpha0 = intercept_estimate(train.Y, hyper.h_alpha0);
  pred.standardize = chain.config.standardize_balances;
  pred.mean.resize(S, M);
  pred.sd.resize(S, M);
  pred.beta = Matrix::Zero(S, M);
  pred.sigma2.resize(S);
  std::optional<SampleBalances> fixed;
  for (int s = 0; s < S; ++s) {
    if (chain.psi.size() != 1 || !fixed) {
      fixed = sample_balances(chain.psi_sample(s), spec, hyper.delta, pred.standardize);
    }
    pred.mean.row(s) = fixed->stats.mean.transpose();
    pred.sd.row(s) = fixed->stats.sd.transpose();
    const IntVector& xi = chain.xi[s];
    const Matrix B_sel = select_columns(fixed->B, xi);
    const Vector beta = ridge_coefficients(B_sel, train.Y, hyper.h_beta);
    Eigen::Index col = 0;
    for (int m = 0; m < M; ++m) {
      if (xi(m)) pred.beta(s, m) = beta(col++);
    }
    pred.sigma2(s) = conditional_posterior(B_sel, train.Y, hyper).sigma2;
  }
  return pred;
}

Matrix predictor_means(const BalancePredictor& pred, const Matrix& psi_new, const PartitionSpec& spec, double delta) {
  if (psi_new.cols() != spec.num_taxa()) throw DimensionError("composition columns do not match the partition");
  Matrix psi = psi_new;
  zero_replace_rows(psi, delta);
  const Matrix B_raw = balances_from_log(psi.array().log().matrix(), spec);
  Matrix out(psi_new.rows(), pred.num_samples());
  for (int s = 0; s < pred.num_samples(); ++s) {
    // Coefficients absorb the column scaling: (B - mean) / sd * beta.
    const Vector w = pred.beta.row(s).transpose().cwiseQuotient(pred.sd.row(s).transpose());
    out.col(s) = (B_raw * w).array() - pred.mean.row(s).dot(w) + pred.alpha0;
  }
  return out;
}

Vector apply_predictor(const BalancePredictor& pred, const Matrix& psi_new, const PartitionSpec& spec, double delta) {
  return predictor_means(pred, psi_new, spec, delta).rowwise().mean();
}

Matrix predictor_loglik(const BalancePredictor& pred, const Matrix& psi_new, const Vector& y_new,
                        const PartitionSpec& spec, double delta) {
  if (y_new.size() != psi_new.rows()) throw DimensionError("responses and compositions have different rows");
  Matrix means = predictor_means(pred, psi_new, spec, delta);
  for (int s = 0; s < pred.num_samples(); ++s) {
    for (Eigen::Index i = 0; i < means.rows(); ++i) means(i, s) = normal_logpdf(y_new(i), means(i, s), pred.sigma2(s));
  }
  return means;
}

Vector predict_from_psi(const ChainOutput& chain, const Dataset& train, const Matrix& psi_new,
                        const PartitionSpec& spec, const Hyperparams& hyper) {
  if (psi_new.cols() != train.j()) throw DimensionError("composition columns do not match training J");
  return apply_predictor(build_predictor(chain, train, spec, hyper), psi_new, spec, hyper.delta);
}

Vector predict_y(const ChainOutput& chain, const Dataset& train, const TestSet& test, const PartitionSpec& spec,
                 const Hyperparams& hyper) {
  test.validate(train.j(), train.p());
  const Matrix psi_test = estimate_psi_test(estimate_lambda_test(chain, test.X), test.Z);
  return predict_from_psi(chain, train, psi_test, spec, hyper);
}

Vector fitted_y(const ChainOutput& chain, const Dataset& train, const PartitionSpec& spec, const Hyperparams& hyper) {
  require_response_chain(chain);
  const double alpha0 = intercept_estimate(train.Y, hyper.h_alpha0);
  Vector acc = Vector::Zero(train.n());
  std::optional<SampleBalances> fixed;
  const int S = static_cast<int>(chain.xi.size());
  for (int s = 0; s < S; ++s) {
    const IntVector& xi = chain.xi[s];
    if (xi.count() == 0) continue;
    if (chain.psi.size() != 1 || !fixed) {
      fixed = sample_balances(chain.psi_sample(s), spec, hyper.delta, chain.config.standardize_balances);
    }
    const Matrix B_sel = select_columns(fixed->B, xi);
    acc += B_sel * ridge_coefficients(B_sel, train.Y, hyper.h_beta);
  }
  return (acc / static_cast<double>(S)).array() + alpha0;
}

Matrix pointwise_loglik(const ChainOutput& chain, const Dataset& data, const PartitionSpec& spec,
                        const Hyperparams& hyper) {
  require_response_chain(chain);
  const int S = static_cast<int>(chain.xi.size());
  Matrix out(data.n(), S);
  std::optional<SampleBalances> fixed;
  for (int s = 0; s < S; ++s) {
    if (chain.psi.size() != 1 || !fixed) {
      fixed = sample_balances(chain.psi_sample(s), spec, hyper.delta, chain.config.standardize_balances);
    }
    const Matrix B_sel = select_columns(fixed->B, chain.xi[s]);
    const Conditional post = conditional_posterior(B_sel, data.Y, hyper);
    const Vector mean = (B_sel * post.coef.tail(B_sel.cols())).array() + post.coef(0);
    for (Eigen::Index i = 0; i < data.n(); ++i) out(i, s) = normal_logpdf(data.Y(i), mean(i), post.sigma2);
  }
  return out;
}

}  // namespace dmlm
