#pragma once

#include "dmlm/core_model.hpp"
#include "dmlm/partition.hpp"
#include "dmlm/random.hpp"
#include "dmlm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dmlm {

enum class SamplerMode { joint, dm_only, lm_only };

std::string to_string(SamplerMode mode);
SamplerMode parse_mode(const std::string& text);

struct SamplerConfig {
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  std::uint64_t seed = 1;
  double init_zeta_frac = 0.01;
  double init_xi_frac = 0.05;
  int between_moves_per_iter = 1;
  SamplerMode mode = SamplerMode::joint;
  bool standardize_balances = true;
  // Holds alpha, phi and zeta at their initial values (diagnostic runs only).
  bool fix_regression = false;

  void validate() const;
  int retained() const { return (iterations - burn_in) / thin; }
  /// Whether 1-based iteration t is kept.
  bool keeps(int t) const { return t > burn_in && (t - burn_in) % thin == 0; }
};

/// Current values of every sampled block. c and log_c are both kept:
/// log_c is exact, c is floored at the smallest normal double.
struct ChainState {
  Vector alpha;
  Matrix phi;
  IntMatrix zeta;
  Matrix c;
  Matrix log_c;
  Vector u;
  IntVector xi;
  Vector T;

  /// Sets c from log c and recomputes T.
  void set_log_c(Matrix log_values);
  /// Throws on any violated invariant.
  void check_invariants() const;
};

struct MoveCounter {
  long attempts = 0;
  long accepts = 0;
  double rate() const { return attempts ? static_cast<double>(accepts) / attempts : 0.0; }
};

struct MoveCounters {
  MoveCounter alpha;
  MoveCounter zeta_add;
  MoveCounter zeta_delete;
  MoveCounter phi_within;
  MoveCounter xi_add;
  MoveCounter xi_delete;
};

struct ChainOutput {
  SamplerConfig config;
  Hyperparams hyper;

  std::vector<Vector> alpha;
  std::vector<Matrix> phi;
  std::vector<IntMatrix> zeta;
  std::vector<IntVector> xi;
  std::vector<Vector> u;
  // One composition per retained sample, or a single entry when the
  // composition was held fixed (lm_only mode, two-step stage 2).
  std::vector<Matrix> psi;
  std::vector<double> log_posterior;  // every iteration, before thinning
  MoveCounters counters;

  Matrix mppi_zeta;
  Vector mppi_xi;

  int num_samples() const;
  const Matrix& psi_sample(int s) const { return psi.size() == 1 ? psi.front() : psi.at(s); }
};

/// Y-side state: standardized balances and the add/delete sampler over xi.
class BalanceSelector {
 public:
  BalanceSelector(const Vector& Y, const Hyperparams& hyper);

  /// Replaces the balance matrix and refreshes the cached log marginal of the current xi.
  void set_balances(Matrix B, const IntVector& xi);
  const Matrix& balances() const { return B_; }

  double log_marginal(const IntVector& xi) const;
  double current_log_marginal() const { return current_; }
  /// log of the flip acceptance ratio for index m under xi.
  double log_ratio_flip(const IntVector& xi, int m) const;
  /// One add/delete move; mutates xi on acceptance.
  bool step(IntVector& xi, Rng& rng, MoveCounters& counters);

 private:
  const Vector& Y_;
  Hyperparams hyper_;
  Matrix B_;
  double current_ = 0.0;
};

/// Metropolis-Hastings within Gibbs sampler for the joint model.
///
/// Per iteration: alpha; zeta/phi between-model then within-model; c; u; xi.
/// The Y-blocks are skipped in dm_only mode and the count blocks in lm_only.
/// The dataset is held by reference and must outlive the sampler.
class Sampler {
 public:
  Sampler(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec, const SamplerConfig& config,
          Rng& rng);
  Sampler(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec, const SamplerConfig& config,
          ChainState initial);

  const ChainState& state() const { return state_; }
  const Matrix& lambda() const { return lambda_; }
  const Matrix& gamma() const { return gamma_; }
  const MoveCounters& counters() const { return counters_; }
  const BalanceSelector& selector() const { return selector_; }

  long update_alpha(Rng& rng);
  void update_zeta_phi(Rng& rng);
  void update_c(Rng& rng);
  void update_u(Rng& rng);
  void update_xi(Rng& rng);
  /// Rebuilds the balance matrix from the current c.
  void refresh_balances();
  void sweep(Rng& rng);

  double log_posterior() const;
  /// Current composition c / T (no zero replacement).
  Matrix psi() const;

  // Log acceptance ratios for each move type, exposed for verification.
  double log_ratio_alpha(int j, double proposed) const;
  double log_ratio_add(int j, int p, double proposed_phi) const;
  double log_ratio_delete(int j, int p) const;
  double log_ratio_within(int j, int p, double proposed_phi) const;
  double log_ratio_xi(int m) const { return selector_.log_ratio_flip(state_.xi, m); }

 private:
  void init_caches();
  /// Change in the gamma-dependent part of column j's augmented likelihood
  /// when lambda(:, j) moves to new_lambda; new gamma and lgamma are written out.
  double column_delta(int j, const Vector& new_lambda, Vector& new_gamma, Vector& new_lgamma) const;
  void accept_column(int j, Vector& new_lambda, Vector& new_gamma, Vector& new_lgamma);
  void add_step(int j, int p, Rng& rng);
  void delete_step(int j, int p, Rng& rng);

  const Dataset& data_;
  Hyperparams hyper_;
  PartitionSpec spec_;
  SamplerConfig config_;
  ChainState state_;

  Matrix lambda_;
  Matrix gamma_;
  Matrix lgamma_;  // log Gamma(gamma) cache
  BalanceSelector selector_;
  MoveCounters counters_;

  // Scratch buffers for column proposals.
  Vector prop_lambda_, prop_gamma_, prop_lgamma_;
};

/// Initial state: alpha = 0, a random init_zeta_frac of zeta active with
/// phi ~ N(0, 0.25), c = z + 0.5, u = zdot / T, a random init_xi_frac of xi active.
ChainState initial_state(const Dataset& data, const SamplerConfig& config, Rng& rng);

/// Runs a full chain and returns thinned post-burn-in samples with MPPIs.
ChainOutput run_chain(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                      const SamplerConfig& config);
ChainOutput run_chain(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                      const SamplerConfig& config, ChainState initial);

/// Entrywise mean of binary samples.
Matrix mppi(const std::vector<IntMatrix>& samples);
Vector mppi(const std::vector<IntVector>& samples);

}  // namespace dmlm
