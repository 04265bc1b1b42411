#pragma once

#include "dmlm/random.hpp"
#include "dmlm/types.hpp"

#include <cstdint>
#include <utility>

namespace dmlm {

/// Synthetic-data protocol. Defaults give the 50 x 50 x 150 benchmark.
struct SimConfig {
  int N = 50;
  int P = 50;
  int J = 150;
  double omega = 0.4;  // AR(1) correlation between adjacent covariates
  int n_true_cov = 10;
  double phi_lo = 0.75, phi_hi = 1.25;
  double alpha_lo = -2.3, alpha_hi = 2.3;
  double d = 0.01;  // overdispersion
  long zdot_lo = 2500, zdot_hi = 7500;
  int n_true_bal = 5;
  double beta_lo = 1.25, beta_hi = 1.75;
  double sigma_eps = 1.0;
  double delta = 6.67e-5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  IntMatrix zeta;   // J x P
  Matrix phi;       // J x P
  Vector alpha;     // J
  IntVector xi;     // M
  Vector beta;      // M
  Matrix psi_star;  // N x J, training subjects
};

struct Replicate {
  Dataset train;
  TestSet test;
  GroundTruth truth;
  Matrix psi_star_test;
};

/// Draws the sparse regression truth: n_true_cov (j, p) pairs and n_true_bal balances.
GroundTruth gen_truth(const SimConfig& cfg, Rng& rng);

/// N x P covariates with AR(1) correlation omega^|p - q|, via the AR recursion.
Matrix gen_covariates(const SimConfig& cfg, Rng& rng);

/// Overdispersed counts: gamma* = gamma / sum(gamma) * (1 - d) / d, psi* ~ Dirichlet(gamma*),
/// z ~ Multinomial(zdot, psi*) with zdot uniform on [zdot_lo, zdot_hi]. Returns (Z, psi*).
std::pair<IntMatrix, Matrix> gen_dm_counts(const Matrix& X, const GroundTruth& truth, const SimConfig& cfg, Rng& rng);

/// y = B*(psi*)' beta + eps with pivot balances of the zero-replaced psi*.
Vector gen_response(const Matrix& psi_star, const GroundTruth& truth, const SimConfig& cfg, Rng& rng);

/// One truth, then independent train and test sets of N subjects each.
Replicate gen_replicate(const SimConfig& cfg, Rng& rng);
Replicate gen_replicate(const SimConfig& cfg);

}  // namespace dmlm
