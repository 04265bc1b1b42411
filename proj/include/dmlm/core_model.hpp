#pragma once

#include "dmlm/partition.hpp"
#include "dmlm/types.hpp"

#include <cmath>
#include <limits>

namespace dmlm {

/// Thread-safe log Gamma function.
double log_gamma(double x);

/// Dirichlet concentration field: lambda = alpha_j + sum_p zeta_jp phi_jp x_ip, gamma = exp(lambda).
struct GammaField {
  Matrix gamma;
  Matrix lambda;
};

GammaField build_gamma(const Vector& alpha, const Matrix& phi, const IntMatrix& zeta,
                       const Matrix& X);

/// Log of the augmented Dirichlet-multinomial integrand for one subject,
///
///   (zdot - 1) log u - T u + sum_j [(z_j + gamma_j - 1) log c_j - c_j - lgamma(gamma_j)],
///
/// with T = sum_j c_j. log Gamma(zdot) and the multinomial coefficient are
/// dropped; they do not depend on (c, gamma, u) so every MH ratio is exact.
double log_augmented_dm(const Eigen::Ref<const IntVector>& z_row, const Eigen::Ref<const Vector>& c_row,
                        const Eigen::Ref<const Vector>& gamma_row, double u);

/// Isometric log-ratio coordinate of a composition for one partition.
/// Invariant to rescaling psi by any positive constant.
template <typename Derived>
typename Derived::Scalar balance_value(const Eigen::MatrixBase<Derived>& psi, const Partition& part) {
  using Scalar = typename Derived::Scalar;
  auto mean_log = [&psi](const std::vector<int>& idx) {
    Scalar acc(0);
    for (int k : idx) {
      const Scalar v = psi(k);
      if (!(v > Scalar(0))) {
        throw DomainError("balance_value: component " + std::to_string(k + 1) + " is not positive");
      }
      acc += std::log(v);
    }
    return acc / static_cast<Scalar>(idx.size());
  };
  const Scalar r = static_cast<Scalar>(part.plus.size());
  const Scalar s = static_cast<Scalar>(part.minus.size());
  return std::sqrt(r * s / (r + s)) * (mean_log(part.plus) - mean_log(part.minus));
}

/// Column means and sample standard deviations used to standardize balances.
struct ColumnStats {
  Vector mean;
  Vector sd;
};

/// Centers each column to mean 0 and scales to sample variance 1, in place.
/// Throws naming the first column with zero variance.
ColumnStats standardize_columns(Matrix& B);

/// Applies previously computed column statistics.
template <typename Derived>
void apply_column_stats(Eigen::MatrixBase<Derived>& B, const ColumnStats& stats) {
  B.rowwise() -= stats.mean.transpose();
  B.array().rowwise() /= stats.sd.transpose().array();
}

/// Balances (N x M) from log compositions (N x J): log_psi * V.
Matrix balances_from_log(const Eigen::Ref<const Matrix>& log_psi, const PartitionSpec& spec);

/// Balance matrix of a row-simplex matrix; optionally standardized column-wise.
Matrix balance_matrix(const Eigen::Ref<const Matrix>& psi, const PartitionSpec& spec, bool standardize);

/// Multiplicative replacement: components below delta become delta, the rest
/// are rescaled so the row still sums to one.
Vector zero_replace(const Eigen::Ref<const Vector>& psi, double delta);

/// Row-wise zero_replace on an N x J composition matrix, in place.
void zero_replace_rows(Matrix& psi, double delta);

/// Log density of Y under the collapsed multivariate t:
///   t_{2 a0}(0, (b0 / a0) (I + h_alpha0 1 1' + h_beta B B')).
/// Uses the determinant lemma and Woodbury identity on the (k+1)-column factor,
/// so the cost is O(n k^2 + k^3).
double log_marginal_y(const Eigen::Ref<const Vector>& Y, const Eigen::Ref<const Matrix>& B_sel,
                      const Hyperparams& hyper);

/// Log spike-and-slab prior; a zero at the spike contributes 0.
inline double spike_slab_logprior(double value, int included, double slab_var) {
  if (included) {
    return -0.5 * std::log(2.0 * M_PI * slab_var) - 0.5 * value * value / slab_var;
  }
  return value == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

/// Beta-binomial marginal prior of a single inclusion indicator.
inline double beta_binomial_logprior(int included, double a, double b) {
  return included ? std::log(a) - std::log(a + b) : std::log(b) - std::log(a + b);
}

inline double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

}  // namespace dmlm
