#include "dmlm/core_model.hpp"

#include <math.h>

namespace dmlm {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

GammaField build_gamma(const Vector& alpha, const Matrix& phi, const IntMatrix& zeta, const Matrix& X) {
  const auto J = alpha.size();
  if (phi.rows() != J || zeta.rows() != J || phi.cols() != X.cols() || zeta.cols() != X.cols()) {
    throw DimensionError("build_gamma: alpha, phi, zeta and X dimensions disagree");
  }
  const Matrix masked = phi.cwiseProduct(zeta.cast<double>());
  GammaField out;
  out.lambda = (X * masked.transpose()).rowwise() + alpha.transpose();
  out.gamma = out.lambda.array().exp();
  for (Eigen::Index i = 0; i < out.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const double g = out.gamma(i, j);
      if (!std::isfinite(g) || !(g > 0.0)) throw NonFiniteError("build_gamma: gamma not finite/positive", i, j);
    }
  }
  return out;
}

double log_augmented_dm(const Eigen::Ref<const IntVector>& z_row, const Eigen::Ref<const Vector>& c_row,
                        const Eigen::Ref<const Vector>& gamma_row, double u) {
  const auto J = z_row.size();
  if (c_row.size() != J || gamma_row.size() != J) throw DimensionError("log_augmented_dm: length mismatch");
  if (!(u > 0.0)) throw DomainError("log_augmented_dm: u must be positive");
  const long zdot = z_row.sum();
  if (zdot < 1) throw DomainError("log_augmented_dm: subject has no counts");
  double total_c = 0.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < J; ++j) {
    const double c = c_row(j);
    const double g = gamma_row(j);
    if (!(c > 0.0)) throw DomainError("log_augmented_dm: c must be positive");
    if (!(g > 0.0)) throw DomainError("log_augmented_dm: gamma must be positive");
    total_c += c;
    acc += (z_row(j) + g - 1.0) * std::log(c) - c - log_gamma(g);
  }
  return acc + (static_cast<double>(zdot) - 1.0) * std::log(u) - total_c * u;
}

ColumnStats standardize_columns(Matrix& B) {
  const auto n = B.rows();
  ColumnStats stats;
  stats.mean = B.colwise().mean().transpose();
  B.rowwise() -= stats.mean.transpose();
  stats.sd.resize(B.cols());
  for (Eigen::Index m = 0; m < B.cols(); ++m) {
    const double ss = n > 1 ? B.col(m).squaredNorm() / static_cast<double>(n - 1) : 0.0;
    // Relative to the column scale so rounding noise on a constant column is caught.
    const double scale = std::max(1.0, stats.mean.cwiseAbs()(m));
    if (!(ss > 1e-24 * scale * scale)) {
      throw DomainError("balance column " + std::to_string(m + 1) + " has zero variance");
    }
    stats.sd(m) = std::sqrt(ss);
    B.col(m) /= stats.sd(m);
  }
  return stats;
}

Matrix balances_from_log(const Eigen::Ref<const Matrix>& log_psi, const PartitionSpec& spec) {
  if (log_psi.cols() != spec.num_taxa()) {
    throw DimensionError("composition has " + std::to_string(log_psi.cols()) + " taxa, partition spec " +
                         std::to_string(spec.num_taxa()));
  }
  if (!spec.contiguous()) return log_psi * spec.contrast();
  // Every side is an index range: balances are differences of range means of
  // log psi, read off column prefix sums in O(N (J + M)).
  const auto N = log_psi.rows();
  Matrix prefix(N, log_psi.cols() + 1);
  prefix.col(0).setZero();
  for (Eigen::Index j = 0; j < log_psi.cols(); ++j) prefix.col(j + 1) = prefix.col(j) + log_psi.col(j);
  Matrix B(N, spec.num_balances());
  for (int m = 0; m < spec.num_balances(); ++m) {
    const auto& r = spec.ranges()[m];
    const double np = r.plus_end - r.plus_begin;
    const double nm = r.minus_end - r.minus_begin;
    const double scale = std::sqrt(np * nm / (np + nm));
    B.col(m) = scale * ((prefix.col(r.plus_end) - prefix.col(r.plus_begin)) / np -
                        (prefix.col(r.minus_end) - prefix.col(r.minus_begin)) / nm);
  }
  return B;
}

Matrix balance_matrix(const Eigen::Ref<const Matrix>& psi, const PartitionSpec& spec, bool standardize) {
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      if (!(psi(i, j) > 0.0)) {
        throw DomainError("balance_matrix: non-positive component at (" + std::to_string(i + 1) + ", " +
                          std::to_string(j + 1) + ")");
      }
    }
  }
  const Matrix log_psi = psi.array().log();
  Matrix B = balances_from_log(log_psi, spec);
  if (standardize) standardize_columns(B);
  return B;
}

Vector zero_replace(const Eigen::Ref<const Vector>& psi, double delta) {
  if (!(delta > 0.0)) throw DomainError("zero_replace: delta must be positive");
  if ((psi.array() < 0.0).any()) throw DomainError("zero_replace: negative component");
  if (std::abs(psi.sum() - 1.0) > 1e-10) throw DomainError("zero_replace: input does not sum to one");
  Vector out = psi;
  int replaced = 0;
  double kept = 0.0;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (out(j) < delta) {
      ++replaced;
    } else {
      kept += out(j);
    }
  }
  if (replaced == 0) return out;
  if (delta * replaced >= 1.0) throw DomainError("zero_replace: pseudovalue too large for the number of zeros");
  const double scale = (1.0 - replaced * delta) / kept;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out(j) = out(j) < delta ? delta : out(j) * scale;
  }
  return out;
}

void zero_replace_rows(Matrix& psi, double delta) {
  Vector row(psi.cols());
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    row = psi.row(i).transpose();
    if ((row.array() >= delta).all()) continue;
    psi.row(i) = zero_replace(row, delta).transpose();
  }
}

double log_marginal_y(const Eigen::Ref<const Vector>& Y, const Eigen::Ref<const Matrix>& B_sel,
                      const Hyperparams& hyper) {
  const auto n = Y.size();
  const auto k = B_sel.cols();
  if (B_sel.rows() != n && k > 0) throw DimensionError("log_marginal_y: B has wrong row count");

  // Sigma = I + W W' with W = [sqrt(h_alpha0) 1, sqrt(h_beta) B].
  Matrix W(n, k + 1);
  W.col(0).setConstant(std::sqrt(hyper.h_alpha0));
  if (k > 0) W.rightCols(k) = std::sqrt(hyper.h_beta) * B_sel;

  Matrix G = Matrix::Identity(k + 1, k + 1);
  G.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
  Eigen::LLT<Matrix> llt(G.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw DomainError("log_marginal_y: covariance not positive definite");

  const Vector v = W.transpose() * Y;
  const double quad = Y.squaredNorm() - v.dot(llt.solve(v));
  const double log_det_sigma = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  if (!(quad >= 0.0) || !std::isfinite(log_det_sigma)) {
    throw DomainError("log_marginal_y: covariance not positive definite");
  }

  const double nu = 2.0 * hyper.a0;
  const double dn = static_cast<double>(n);
  // Scale matrix S = (b0 / a0) Sigma, so y' S^{-1} y / nu = quad / (2 b0).
  return log_gamma(0.5 * (nu + dn)) - log_gamma(0.5 * nu) - 0.5 * dn * std::log(nu * M_PI) -
         0.5 * (dn * std::log(hyper.b0 / hyper.a0) + log_det_sigma) -
         0.5 * (nu + dn) * std::log1p(quad / (2.0 * hyper.b0));
}

}  // namespace dmlm
