#include "dmlm/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dmlm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

std::vector<long> random_subset(long population, long count, Rng& rng) {
  std::vector<long> idx(population);
  std::iota(idx.begin(), idx.end(), 0L);
  for (long k = 0; k < count; ++k) {
    const long pick = rng.uniform_int(k, population - 1);
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

std::string to_string(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::joint:
      return "joint";
    case SamplerMode::dm_only:
      return "dm_only";
    case SamplerMode::lm_only:
      return "lm_only";
  }
  return "joint";
}

SamplerMode parse_mode(const std::string& text) {
  if (text == "joint") return SamplerMode::joint;
  if (text == "dm_only" || text == "dm-only") return SamplerMode::dm_only;
  if (text == "lm_only" || text == "lm-only") return SamplerMode::lm_only;
  throw ConfigError("unknown sampler mode '" + text + "' (expected joint, dm_only or lm_only)");
}

void SamplerConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw ConfigError("burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (retained() < 1) throw ConfigError("configuration retains no samples");
  if (!(init_zeta_frac >= 0.0 && init_zeta_frac < 1.0)) throw ConfigError("init_zeta_frac must lie in [0, 1)");
  if (!(init_xi_frac >= 0.0 && init_xi_frac < 1.0)) throw ConfigError("init_xi_frac must lie in [0, 1)");
  if (between_moves_per_iter < 1) throw ConfigError("between_moves_per_iter must be >= 1");
}

void ChainState::set_log_c(Matrix log_values) {
  log_c = std::move(log_values);
  c = log_c.array().exp().max(std::numeric_limits<double>::min());
  T = c.rowwise().sum();
}

void ChainState::check_invariants() const {
  for (Eigen::Index k = 0; k < zeta.size(); ++k) {
    if ((zeta(k) == 0) != (phi(k) == 0.0)) throw Error("state invariant violated: phi = 0 <=> zeta = 0");
  }
  if (!(c.array() > 0.0).all()) throw Error("state invariant violated: c must be positive");
  if (!(u.array() > 0.0).all()) throw Error("state invariant violated: u must be positive");
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double row = c.row(i).sum();
    if (!(T(i) > 0.0) || std::abs(T(i) - row) > 1e-10 * row) {
      throw Error("state invariant violated: T is not the row sum of c");
    }
  }
}

int ChainOutput::num_samples() const {
  if (!xi.empty()) return static_cast<int>(xi.size());
  return static_cast<int>(zeta.size());
}

// ---------------------------------------------------------------------------

BalanceSelector::BalanceSelector(const Vector& Y, const Hyperparams& hyper) : Y_(Y), hyper_(hyper) {}

void BalanceSelector::set_balances(Matrix B, const IntVector& xi) {
  if (B.rows() != Y_.size()) throw DimensionError("balance matrix rows do not match Y");
  if (B.cols() != xi.size()) throw DimensionError("balance matrix columns do not match xi");
  B_ = std::move(B);
  current_ = log_marginal(xi);
}

double BalanceSelector::log_marginal(const IntVector& xi) const {
  const auto k = xi.count();
  Matrix B_sel(B_.rows(), k);
  Eigen::Index col = 0;
  for (Eigen::Index m = 0; m < xi.size(); ++m) {
    if (xi(m)) B_sel.col(col++) = B_.col(m);
  }
  return log_marginal_y(Y_, B_sel, hyper_);
}

double BalanceSelector::log_ratio_flip(const IntVector& xi, int m) const {
  IntVector flipped = xi;
  flipped(m) = 1 - flipped(m);
  return log_marginal(flipped) - log_marginal(xi) + beta_binomial_logprior(flipped(m), hyper_.a_m, hyper_.b_m) -
         beta_binomial_logprior(xi(m), hyper_.a_m, hyper_.b_m);
}

bool BalanceSelector::step(IntVector& xi, Rng& rng, MoveCounters& counters) {
  const int m = static_cast<int>(rng.uniform_int(0, xi.size() - 1));
  const bool adding = xi(m) == 0;
  auto& counter = adding ? counters.xi_add : counters.xi_delete;
  ++counter.attempts;
  xi(m) = 1 - xi(m);
  const double proposed = log_marginal(xi);
  const double ratio = proposed - current_ + beta_binomial_logprior(xi(m), hyper_.a_m, hyper_.b_m) -
                       beta_binomial_logprior(1 - xi(m), hyper_.a_m, hyper_.b_m);
  if (accept(ratio, rng)) {
    current_ = proposed;
    ++counter.accepts;
    return true;
  }
  xi(m) = 1 - xi(m);
  return false;
}

// ---------------------------------------------------------------------------

ChainState initial_state(const Dataset& data, const SamplerConfig& config, Rng& rng) {
  const auto J = data.j();
  const auto P = data.p();
  ChainState s;
  s.alpha = Vector::Zero(J);
  s.phi = Matrix::Zero(J, P);
  s.zeta = IntMatrix::Zero(J, P);
  const long n_zeta = std::lround(config.init_zeta_frac * static_cast<double>(J * P));
  for (long k : random_subset(J * P, n_zeta, rng)) {
    s.zeta(k) = 1;
    s.phi(k) = rng.normal(0.0, 0.5);
  }
  s.set_log_c((data.Z.cast<double>().array() + 0.5).log().matrix());
  s.u = data.row_totals.cast<double>().cwiseQuotient(s.T);
  const long M = J - 1;
  s.xi = IntVector::Zero(M);
  const long n_xi = std::lround(config.init_xi_frac * static_cast<double>(M));
  for (long k : random_subset(M, n_xi, rng)) s.xi(k) = 1;
  return s;
}

Sampler::Sampler(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                 const SamplerConfig& config, Rng& rng)
    : Sampler(data, hyper, spec, config, initial_state(data, config, rng)) {}

Sampler::Sampler(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                 const SamplerConfig& config, ChainState initial)
    : data_(data),
      hyper_(hyper),
      spec_(spec),
      config_(config),
      state_(std::move(initial)),
      selector_(data.Y, hyper) {
  data_.validate();
  hyper_.validate();
  config_.validate();
  if (spec_.num_taxa() != data_.j()) throw DimensionError("partition spec taxa do not match Z columns");
  if (state_.alpha.size() != data_.j() || state_.phi.rows() != data_.j() || state_.phi.cols() != data_.p() ||
      state_.zeta.rows() != data_.j() || state_.zeta.cols() != data_.p() || state_.c.rows() != data_.n() ||
      state_.c.cols() != data_.j() || state_.u.size() != data_.n() || state_.xi.size() != data_.j() - 1) {
    throw DimensionError("initial chain state does not match the dataset");
  }
  if (state_.log_c.size() != state_.c.size()) state_.set_log_c(state_.c.array().log().matrix());
  state_.check_invariants();
  if (config_.mode != SamplerMode::dm_only && config_.standardize_balances && data_.n() < 2) {
    throw ConfigError("standardized balances need at least 2 subjects");
  }
  init_caches();
  if (config_.mode != SamplerMode::dm_only) refresh_balances();
}

void Sampler::init_caches() {
  const GammaField field = build_gamma(state_.alpha, state_.phi, state_.zeta, data_.X);
  lambda_ = field.lambda;
  gamma_ = field.gamma;
  lgamma_ = gamma_.unaryExpr([](double g) { return log_gamma(g); });
  prop_lambda_.resize(data_.n());
  prop_gamma_.resize(data_.n());
  prop_lgamma_.resize(data_.n());
}

double Sampler::column_delta(int j, const Vector& new_lambda, Vector& new_gamma, Vector& new_lgamma) const {
  double delta = 0.0;
  for (Eigen::Index i = 0; i < new_lambda.size(); ++i) {
    const double g = std::exp(new_lambda(i));
    if (!std::isfinite(g) || !(g > 0.0)) return kNegInf;
    new_gamma(i) = g;
    new_lgamma(i) = log_gamma(g);
    delta += (g - gamma_(i, j)) * state_.log_c(i, j) - new_lgamma(i) + lgamma_(i, j);
  }
  return delta;
}

void Sampler::accept_column(int j, Vector& new_lambda, Vector& new_gamma, Vector& new_lgamma) {
  lambda_.col(j) = new_lambda;
  gamma_.col(j) = new_gamma;
  lgamma_.col(j) = new_lgamma;
}

double Sampler::log_ratio_alpha(int j, double proposed) const {
  Vector lam = lambda_.col(j).array() + (proposed - state_.alpha(j));
  Vector g(lam.size()), lg(lam.size());
  return column_delta(j, lam, g, lg) + normal_logpdf(proposed, 0.0, hyper_.sigma_alpha2) -
         normal_logpdf(state_.alpha(j), 0.0, hyper_.sigma_alpha2);
}

double Sampler::log_ratio_add(int j, int p, double proposed_phi) const {
  Vector lam = lambda_.col(j) + (proposed_phi - state_.phi(j, p)) * data_.X.col(p);
  Vector g(lam.size()), lg(lam.size());
  return column_delta(j, lam, g, lg) + spike_slab_logprior(proposed_phi, 1, hyper_.r2) +
         beta_binomial_logprior(1, hyper_.a, hyper_.b) - beta_binomial_logprior(0, hyper_.a, hyper_.b);
}

double Sampler::log_ratio_delete(int j, int p) const {
  Vector lam = lambda_.col(j) - state_.phi(j, p) * data_.X.col(p);
  Vector g(lam.size()), lg(lam.size());
  return column_delta(j, lam, g, lg) + beta_binomial_logprior(0, hyper_.a, hyper_.b) -
         spike_slab_logprior(state_.phi(j, p), 1, hyper_.r2) - beta_binomial_logprior(1, hyper_.a, hyper_.b);
}

double Sampler::log_ratio_within(int j, int p, double proposed_phi) const {
  Vector lam = lambda_.col(j) + (proposed_phi - state_.phi(j, p)) * data_.X.col(p);
  Vector g(lam.size()), lg(lam.size());
  return column_delta(j, lam, g, lg) + spike_slab_logprior(proposed_phi, 1, hyper_.r2) -
         spike_slab_logprior(state_.phi(j, p), 1, hyper_.r2);
}

long Sampler::update_alpha(Rng& rng) {
  long accepted = 0;
  for (int j = 0; j < data_.j(); ++j) {
    const double current = state_.alpha(j);
    const double proposed = rng.normal(current, hyper_.proposal_sd);
    prop_lambda_ = lambda_.col(j).array() + (proposed - current);
    const double ratio = column_delta(j, prop_lambda_, prop_gamma_, prop_lgamma_) +
                         normal_logpdf(proposed, 0.0, hyper_.sigma_alpha2) -
                         normal_logpdf(current, 0.0, hyper_.sigma_alpha2);
    ++counters_.alpha.attempts;
    if (accept(ratio, rng)) {
      state_.alpha(j) = proposed;
      accept_column(j, prop_lambda_, prop_gamma_, prop_lgamma_);
      ++counters_.alpha.accepts;
      ++accepted;
    }
  }
  return accepted;
}

void Sampler::add_step(int j, int p, Rng& rng) {
  // phi is zero at the spike, so the proposal is centred at 0.
  const double proposed = rng.normal(state_.phi(j, p), hyper_.proposal_sd);
  prop_lambda_ = lambda_.col(j) + (proposed - state_.phi(j, p)) * data_.X.col(p);
  const double ratio = column_delta(j, prop_lambda_, prop_gamma_, prop_lgamma_) +
                       spike_slab_logprior(proposed, 1, hyper_.r2) + beta_binomial_logprior(1, hyper_.a, hyper_.b) -
                       beta_binomial_logprior(0, hyper_.a, hyper_.b);
  ++counters_.zeta_add.attempts;
  if (accept(ratio, rng)) {
    state_.zeta(j, p) = 1;
    state_.phi(j, p) = proposed;
    accept_column(j, prop_lambda_, prop_gamma_, prop_lgamma_);
    ++counters_.zeta_add.accepts;
  }
}

void Sampler::delete_step(int j, int p, Rng& rng) {
  const double current = state_.phi(j, p);
  prop_lambda_ = lambda_.col(j) - current * data_.X.col(p);
  const double ratio = column_delta(j, prop_lambda_, prop_gamma_, prop_lgamma_) +
                       beta_binomial_logprior(0, hyper_.a, hyper_.b) - spike_slab_logprior(current, 1, hyper_.r2) -
                       beta_binomial_logprior(1, hyper_.a, hyper_.b);
  ++counters_.zeta_delete.attempts;
  if (accept(ratio, rng)) {
    state_.zeta(j, p) = 0;
    state_.phi(j, p) = 0.0;
    accept_column(j, prop_lambda_, prop_gamma_, prop_lgamma_);
    ++counters_.zeta_delete.accepts;
  }
}

void Sampler::update_zeta_phi(Rng& rng) {
  const auto J = data_.j();
  const auto P = data_.p();
  for (int move = 0; move < config_.between_moves_per_iter; ++move) {
    const long k = rng.uniform_int(0, J * P - 1);
    const int j = static_cast<int>(k % J);
    const int p = static_cast<int>(k / J);
    if (state_.zeta(j, p)) {
      delete_step(j, p, rng);
    } else {
      add_step(j, p, rng);
    }
  }
  for (int p = 0; p < P; ++p) {
    for (int j = 0; j < J; ++j) {
      if (!state_.zeta(j, p)) continue;
      const double current = state_.phi(j, p);
      const double proposed = rng.normal(current, hyper_.proposal_sd);
      prop_lambda_ = lambda_.col(j) + (proposed - current) * data_.X.col(p);
      const double ratio = column_delta(j, prop_lambda_, prop_gamma_, prop_lgamma_) +
                           spike_slab_logprior(proposed, 1, hyper_.r2) - spike_slab_logprior(current, 1, hyper_.r2);
      ++counters_.phi_within.attempts;
      // A proposal of exactly zero would break phi = 0 <=> zeta = 0.
      if (proposed != 0.0 && accept(ratio, rng)) {
        state_.phi(j, p) = proposed;
        accept_column(j, prop_lambda_, prop_gamma_, prop_lgamma_);
        ++counters_.phi_within.accepts;
      }
    }
  }
}

void Sampler::update_c(Rng& rng) {
  Matrix log_c(data_.n(), data_.j());
  for (Eigen::Index j = 0; j < data_.j(); ++j) {
    for (Eigen::Index i = 0; i < data_.n(); ++i) {
      const double shape = data_.Z(i, j) + gamma_(i, j);
      if (!(shape > 0.0)) throw NonFiniteError("update_c: non-positive gamma shape", i, j);
      log_c(i, j) = rng.log_gamma_draw(shape, state_.u(i) + 1.0);
    }
  }
  state_.set_log_c(std::move(log_c));
}

void Sampler::update_u(Rng& rng) {
  for (Eigen::Index i = 0; i < data_.n(); ++i) {
    state_.u(i) = rng.gamma(static_cast<double>(data_.row_totals(i)), state_.T(i));
  }
  // Guard against an underflowed draw; u must stay strictly positive.
  state_.u = state_.u.cwiseMax(std::numeric_limits<double>::min());
}

Matrix Sampler::psi() const { return state_.c.array().colwise() / state_.T.array(); }

void Sampler::refresh_balances() {
  Matrix composition = psi();
  zero_replace_rows(composition, hyper_.delta);
  const Matrix log_psi = composition.array().log();
  Matrix B = balances_from_log(log_psi, spec_);
  if (config_.standardize_balances) standardize_columns(B);
  selector_.set_balances(std::move(B), state_.xi);
}

void Sampler::update_xi(Rng& rng) {
  for (int move = 0; move < config_.between_moves_per_iter; ++move) {
    selector_.step(state_.xi, rng, counters_);
  }
}

void Sampler::sweep(Rng& rng) {
  const bool counts = config_.mode != SamplerMode::lm_only;
  if (counts && !config_.fix_regression) {
    update_alpha(rng);
    update_zeta_phi(rng);
  }
  if (counts) {
    update_c(rng);
    update_u(rng);
  }
  if (config_.mode != SamplerMode::dm_only) {
    if (config_.mode == SamplerMode::joint) refresh_balances();
    update_xi(rng);
  }
#ifndef NDEBUG
  state_.check_invariants();
#endif
}

double Sampler::log_posterior() const {
  double lp = 0.0;
  if (config_.mode != SamplerMode::lm_only) {
    for (Eigen::Index i = 0; i < data_.n(); ++i) {
      lp += (static_cast<double>(data_.row_totals(i)) - 1.0) * std::log(state_.u(i)) - state_.T(i) * state_.u(i);
    }
    lp += ((data_.Z.cast<double>() + gamma_).array() - 1.0).cwiseProduct(state_.log_c.array()).sum() -
          state_.c.sum() - lgamma_.sum();
    for (Eigen::Index j = 0; j < data_.j(); ++j) lp += normal_logpdf(state_.alpha(j), 0.0, hyper_.sigma_alpha2);
    for (Eigen::Index k = 0; k < state_.zeta.size(); ++k) {
      lp += spike_slab_logprior(state_.phi(k), state_.zeta(k), hyper_.r2) +
            beta_binomial_logprior(state_.zeta(k), hyper_.a, hyper_.b);
    }
  }
  if (config_.mode != SamplerMode::dm_only) {
    lp += selector_.current_log_marginal();
    for (Eigen::Index m = 0; m < state_.xi.size(); ++m) {
      lp += beta_binomial_logprior(state_.xi(m), hyper_.a_m, hyper_.b_m);
    }
  }
  return lp;
}

// ---------------------------------------------------------------------------

namespace {

ChainOutput record_chain(Sampler& sampler, Rng& rng, const Hyperparams& hyper, const SamplerConfig& config) {
  ChainOutput out;
  out.config = config;
  out.hyper = hyper;
  const int S = config.retained();
  const bool counts = config.mode != SamplerMode::lm_only;
  const bool response = config.mode != SamplerMode::dm_only;
  out.log_posterior.reserve(config.iterations);
  if (counts) {
    out.alpha.reserve(S);
    out.phi.reserve(S);
    out.zeta.reserve(S);
    out.u.reserve(S);
    out.psi.reserve(S);
  } else {
    out.psi.push_back(sampler.psi());
  }
  if (response) out.xi.reserve(S);

  for (int t = 1; t <= config.iterations; ++t) {
    sampler.sweep(rng);
    const double lp = sampler.log_posterior();
    if (!std::isfinite(lp)) throw Error("non-finite log posterior at iteration " + std::to_string(t));
    out.log_posterior.push_back(lp);
    if (!config.keeps(t)) continue;
    const auto& st = sampler.state();
    if (counts) {
      out.alpha.push_back(st.alpha);
      out.phi.push_back(st.phi);
      out.zeta.push_back(st.zeta);
      out.u.push_back(st.u);
      out.psi.push_back(sampler.psi());
    }
    if (response) out.xi.push_back(st.xi);
  }
  out.counters = sampler.counters();
  if (counts) out.mppi_zeta = mppi(out.zeta);
  if (response) out.mppi_xi = mppi(out.xi);
  return out;
}

}  // namespace

ChainOutput run_chain(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                      const SamplerConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Sampler sampler(data, hyper, spec, config, rng);
  return record_chain(sampler, rng, hyper, config);
}

ChainOutput run_chain(const Dataset& data, const Hyperparams& hyper, const PartitionSpec& spec,
                      const SamplerConfig& config, ChainState initial) {
  config.validate();
  Rng rng(config.seed);
  Sampler sampler(data, hyper, spec, config, std::move(initial));
  return record_chain(sampler, rng, hyper, config);
}

Matrix mppi(const std::vector<IntMatrix>& samples) {
  if (samples.empty()) throw DomainError("mppi needs at least one sample");
  Matrix acc = Matrix::Zero(samples.front().rows(), samples.front().cols());
  for (const auto& s : samples) acc += s.cast<double>();
  return acc / static_cast<double>(samples.size());
}

Vector mppi(const std::vector<IntVector>& samples) {
  if (samples.empty()) throw DomainError("mppi needs at least one sample");
  Vector acc = Vector::Zero(samples.front().size());
  for (const auto& s : samples) acc += s.cast<double>();
  return acc / static_cast<double>(samples.size());
}

}  // namespace dmlm
