#include "dmlm/simulation.hpp"

#include "dmlm/core_model.hpp"
#include "dmlm/partition.hpp"

#include <cmath>
#include <numeric>

namespace dmlm {

namespace {

double signed_uniform(double lo, double hi, Rng& rng) {
  const double magnitude = rng.uniform(lo, hi);
  return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

std::vector<long> choose(long population, long count, Rng& rng) {
  std::vector<long> idx(population);
  std::iota(idx.begin(), idx.end(), 0L);
  for (long k = 0; k < count; ++k) std::swap(idx[k], idx[rng.uniform_int(k, population - 1)]);
  idx.resize(count);
  return idx;
}

}  // namespace

void SimConfig::validate() const {
  if (N < 2 || P < 1 || J < 2) throw ConfigError("simulation needs N >= 2, P >= 1, J >= 2");
  if (!(omega > -1.0 && omega < 1.0)) throw ConfigError("omega must lie in (-1, 1)");
  if (!(d > 0.0 && d < 1.0)) throw ConfigError("overdispersion d must lie in (0, 1)");
  if (phi_lo > phi_hi || alpha_lo > alpha_hi || beta_lo > beta_hi || zdot_lo > zdot_hi) {
    throw ConfigError("simulation ranges must be ordered");
  }
  if (zdot_lo < 1) throw ConfigError("zdot_lo must be >= 1");
  if (n_true_cov < 0 || n_true_cov > J * P) throw ConfigError("n_true_cov must lie in [0, J*P]");
  if (n_true_bal < 0 || n_true_bal > J - 1) throw ConfigError("n_true_bal must lie in [0, J-1]");
  if (!(sigma_eps >= 0.0)) throw ConfigError("sigma_eps must be >= 0");
  if (!(delta > 0.0) || delta * J >= 1.0) throw ConfigError("delta must be positive and below 1/J");
}

GroundTruth gen_truth(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  GroundTruth t;
  t.zeta = IntMatrix::Zero(cfg.J, cfg.P);
  t.phi = Matrix::Zero(cfg.J, cfg.P);
  for (long k : choose(static_cast<long>(cfg.J) * cfg.P, cfg.n_true_cov, rng)) {
    t.zeta(k) = 1;
    t.phi(k) = signed_uniform(cfg.phi_lo, cfg.phi_hi, rng);
  }
  t.alpha.resize(cfg.J);
  for (int j = 0; j < cfg.J; ++j) t.alpha(j) = rng.uniform(cfg.alpha_lo, cfg.alpha_hi);
  t.xi = IntVector::Zero(cfg.J - 1);
  t.beta = Vector::Zero(cfg.J - 1);
  for (long m : choose(cfg.J - 1, cfg.n_true_bal, rng)) {
    t.xi(m) = 1;
    t.beta(m) = signed_uniform(cfg.beta_lo, cfg.beta_hi, rng);
  }
  return t;
}

Matrix gen_covariates(const SimConfig& cfg, Rng& rng) {
  Matrix X(cfg.N, cfg.P);
  const double innovation_sd = std::sqrt(1.0 - cfg.omega * cfg.omega);
  for (int i = 0; i < cfg.N; ++i) {
    X(i, 0) = rng.standard_normal();
    for (int p = 1; p < cfg.P; ++p) X(i, p) = cfg.omega * X(i, p - 1) + innovation_sd * rng.standard_normal();
  }
  return X;
}

std::pair<IntMatrix, Matrix> gen_dm_counts(const Matrix& X, const GroundTruth& truth, const SimConfig& cfg, Rng& rng) {
  const auto N = X.rows();
  const auto J = truth.alpha.size();
  const Matrix lambda = (X * truth.phi.transpose()).rowwise() + truth.alpha.transpose();
  IntMatrix Z(N, J);
  Matrix psi(N, J);
  const double total_concentration = (1.0 - cfg.d) / cfg.d;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vector gamma = lambda.row(i).transpose().array().exp();
    const Vector gamma_star = gamma / gamma.sum() * total_concentration;
    const Vector draw = rng.dirichlet(gamma_star);
    psi.row(i) = draw.transpose();
    const long zdot = rng.uniform_int(cfg.zdot_lo, cfg.zdot_hi);
    Z.row(i) = rng.multinomial(zdot, draw).transpose();
  }
  return {std::move(Z), std::move(psi)};
}

Vector gen_response(const Matrix& psi_star, const GroundTruth& truth, const SimConfig& cfg, Rng& rng) {
  Matrix replaced = psi_star;
  zero_replace_rows(replaced, cfg.delta);
  const Matrix B = balance_matrix(replaced, PartitionSpec::pivot(static_cast<int>(psi_star.cols())), false);
  Vector y = B * truth.beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += cfg.sigma_eps * rng.standard_normal();
  return y;
}

Replicate gen_replicate(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  Replicate rep;
  rep.truth = gen_truth(cfg, rng);

  Matrix X = gen_covariates(cfg, rng);
  auto [Z, psi] = gen_dm_counts(X, rep.truth, cfg, rng);
  Vector Y = gen_response(psi, rep.truth, cfg, rng);
  rep.train = Dataset::make(std::move(Y), std::move(Z), std::move(X));
  rep.truth.psi_star = std::move(psi);

  Matrix X_test = gen_covariates(cfg, rng);
  auto [Z_test, psi_test] = gen_dm_counts(X_test, rep.truth, cfg, rng);
  Vector Y_test = gen_response(psi_test, rep.truth, cfg, rng);
  rep.test.Z = std::move(Z_test);
  rep.test.X = std::move(X_test);
  rep.test.Y = std::move(Y_test);
  rep.psi_star_test = std::move(psi_test);
  return rep;
}

Replicate gen_replicate(const SimConfig& cfg) {
  Rng rng(cfg.seed);
  return gen_replicate(cfg, rng);
}

}  // namespace dmlm
