#include "dmlm/baselines.hpp"

#include "dmlm/core_model.hpp"
#include "dmlm/prediction.hpp"
#include "dmlm/random.hpp"

#include <cmath>
#include <numeric>

namespace dmlm {

ChainOutput run_dm_only(const Dataset& data, const Hyperparams& hyper, const SamplerConfig& config) {
  if (config.mode != SamplerMode::dm_only) throw ConfigError("run_dm_only needs mode dm_only");
  // The partition is only consulted for balances, which dm_only never builds.
  const PartitionSpec spec = PartitionSpec::pivot(static_cast<int>(data.j()));
  return run_chain(data, hyper, spec, config);
}

ChainOutput run_lm_balance_selection(const Matrix& B_fixed, const Vector& Y, const Hyperparams& hyper,
                                     const SamplerConfig& config) {
  config.validate();
  hyper.validate();
  if (B_fixed.rows() != Y.size()) throw DimensionError("fixed balances and Y have different row counts");
  if (!B_fixed.allFinite() || !Y.allFinite()) throw DomainError("fixed balances and Y must be finite");

  Rng rng(config.seed);
  const auto M = B_fixed.cols();
  IntVector xi = IntVector::Zero(M);
  const long n_xi = std::lround(config.init_xi_frac * static_cast<double>(M));
  std::vector<long> idx(M);
  std::iota(idx.begin(), idx.end(), 0L);
  for (long k = 0; k < n_xi; ++k) std::swap(idx[k], idx[rng.uniform_int(k, M - 1)]);
  for (long k = 0; k < n_xi; ++k) xi(idx[k]) = 1;

  BalanceSelector selector(Y, hyper);
  selector.set_balances(B_fixed, xi);

  ChainOutput out;
  out.config = config;
  out.config.mode = SamplerMode::lm_only;
  out.hyper = hyper;
  out.log_posterior.reserve(config.iterations);
  out.xi.reserve(config.retained());
  for (int t = 1; t <= config.iterations; ++t) {
    for (int move = 0; move < config.between_moves_per_iter; ++move) selector.step(xi, rng, out.counters);
    double lp = selector.current_log_marginal();
    for (Eigen::Index m = 0; m < M; ++m) lp += beta_binomial_logprior(xi(m), hyper.a_m, hyper.b_m);
    if (!std::isfinite(lp)) throw Error("non-finite log posterior at iteration " + std::to_string(t));
    out.log_posterior.push_back(lp);
    if (config.keeps(t)) out.xi.push_back(xi);
  }
  out.mppi_xi = mppi(out.xi);
  return out;
}

Matrix posterior_mean_psi(const ChainOutput& chain) {
  if (chain.psi.empty()) throw DomainError("chain has no composition samples");
  Matrix acc = Matrix::Zero(chain.psi.front().rows(), chain.psi.front().cols());
  for (const auto& p : chain.psi) acc += p;
  acc /= static_cast<double>(chain.psi.size());
  // Renormalize away accumulated rounding.
  acc.array().colwise() /= acc.rowwise().sum().array();
  return acc;
}

TwoStepOutput run_two_step(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                           const SamplerConfig& config) {
  TwoStepOutput out;
  SamplerConfig c1 = config;
  c1.mode = SamplerMode::dm_only;
  out.stage1 = run_chain(data, hyper, spec, c1);
  out.psi_bar = posterior_mean_psi(out.stage1);

  Matrix psi = out.psi_bar;
  zero_replace_rows(psi, hyper.delta);
  Matrix B = balances_from_log(psi.array().log().matrix(), spec);
  if (config.standardize_balances) standardize_columns(B);

  SamplerConfig c2 = config;
  c2.mode = SamplerMode::lm_only;
  c2.seed = derive_seed(config.seed, 1);
  out.stage2 = run_lm_balance_selection(B, data.Y, hyper, c2);
  out.stage2.config.standardize_balances = config.standardize_balances;
  out.stage2.psi = {out.psi_bar};
  return out;
}

Vector predict_two_step(const TwoStepOutput& fit, const Dataset& train, const TestSet& test,
                        const PartitionSpec& spec, const Hyperparams& hyper) {
  test.validate(train.j(), train.p());
  const Matrix psi_test = estimate_psi_test(estimate_lambda_test(fit.stage1, test.X), test.Z);
  return predict_from_psi(fit.stage2, train, psi_test, spec, hyper);
}

}  // namespace dmlm
