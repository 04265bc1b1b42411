// Acceptance harness: one PASS/FAIL line per criterion.
//
//   acceptance properties            fast deterministic checks (A1-A6)
//   acceptance simulation [opts]     seeded simulation study (B7-B13)
//   acceptance all [opts]

#include "dmlm/baselines.hpp"
#include "dmlm/core_model.hpp"
#include "dmlm/mcmc.hpp"
#include "dmlm/metrics.hpp"
#include "dmlm/prediction.hpp"
#include "dmlm/preprocess.hpp"
#include "dmlm/simulation.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>
#include <boost/math/distributions/beta.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace dmlm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  std::string id;
  std::string description;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

void record(const std::string& id, const std::string& description, bool pass, const std::string& detail) {
  outcomes.push_back({id, description, pass, detail});
  std::printf("%s  %-4s %s  [%s]\n", pass ? "PASS" : "FAIL", id.c_str(), description.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Matrix random_simplex_rows(int N, int J, Rng& rng) {
  Matrix psi(N, J);
  for (int i = 0; i < N; ++i) psi.row(i) = rng.dirichlet(Vector::Constant(J, 1.5)).transpose();
  return psi;
}

PartitionSpec random_sbp(int J, Rng& rng) {
  std::vector<Partition> parts;
  std::vector<std::vector<int>> open;
  std::vector<int> all(J);
  for (int k = 0; k < J; ++k) all[k] = k;
  for (int k = J - 1; k > 0; --k) std::swap(all[k], all[rng.uniform_int(0, k)]);
  open.push_back(all);
  while (!open.empty()) {
    auto block = open.back();
    open.pop_back();
    const int cut = static_cast<int>(rng.uniform_int(1, static_cast<long>(block.size()) - 1));
    Partition p;
    p.plus.assign(block.begin(), block.begin() + cut);
    p.minus.assign(block.begin() + cut, block.end());
    if (p.plus.size() > 1) open.push_back(p.plus);
    if (p.minus.size() > 1) open.push_back(p.minus);
    parts.push_back(std::move(p));
  }
  return PartitionSpec(J, std::move(parts));
}

Matrix projection(const Matrix& A) { return A * (A.transpose() * A).ldlt().solve(A.transpose()); }

// ---------------------------------------------------------------------------
// A. Properties

void a1_balances() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double iso = 0.0, scale = 0.0, span = 0.0;
  for (int J : {2, 3, 8, 20, 150}) {
    for (int trial = 0; trial < 4; ++trial) {
      const auto spec = trial == 0 ? PartitionSpec::pivot(J) : random_sbp(J, rng);
      const Matrix& V = spec.contrast();
      const int M = J - 1;
      iso = std::max(iso, (V.transpose() * V - Matrix::Identity(M, M)).cwiseAbs().maxCoeff());
      iso = std::max(iso, (V.transpose() * Vector::Ones(J)).cwiseAbs().maxCoeff());
      const Matrix psi = random_simplex_rows(6, J, rng);
      const Matrix B = balance_matrix(psi, spec, false);
      iso = std::max(iso, (B - psi.array().log().matrix() * V).cwiseAbs().maxCoeff());
      for (int i = 0; i < 6; ++i) {
        const Vector row = psi.row(i).transpose();
        for (int m = 0; m < M; ++m) {
          const double base = balance_value(row, spec[m]);
          iso = std::max(iso, std::abs(base - B(i, m)));
          for (double k : {0.1, 1.0, 17.0}) scale = std::max(scale, std::abs(balance_value(Vector(k * row), spec[m]) - base));
        }
      }
    }
  }
  for (int J : {4, 8, 15}) {
    const Matrix psi = random_simplex_rows(3 * J, J, rng);
    const Matrix P0 = projection(balance_matrix(psi, PartitionSpec::pivot(J), false));
    for (int trial = 0; trial < 5; ++trial) {
      span = std::max(span, (P0 - projection(balance_matrix(psi, random_sbp(J, rng), false))).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  record("A1", "balance isometry, scale invariance, partition span invariance",
         iso < 1e-12 && scale < 1e-12 && span < 1e-8 && secs < 5.0,
         fmt("isometry %.2e (<1e-12), scale %.2e (<1e-12), span %.2e (<1e-8), %.2f s (<5 s)", iso, scale, span, secs));
}

void a2_gamma_identity() {
  double worst = 0.0;
  for (double zdot : {1.0, 3.0, 10.0}) {
    for (double T : {0.5, 2.0}) {
      worst = std::max(worst, std::abs(oracle::gamma_identity_integral(zdot, T) / std::pow(T, -zdot) - 1.0));
    }
  }
  record("A2", "gamma-integral identity by adaptive quadrature", worst < 1e-8,
         fmt("max relative error %.2e (<1e-8)", worst));
}

void a3_woodbury() {
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 20));
    const int k = static_cast<int>(rng.uniform_int(0, 5));
    Hyperparams h;
    h.h_alpha0 = rng.uniform(0.1, 5.0);
    h.h_beta = rng.uniform(0.1, 5.0);
    h.a0 = rng.uniform(0.5, 5.0);
    h.b0 = rng.uniform(0.2, 10.0);
    Vector y(n);
    Matrix B(n, k);
    for (int i = 0; i < n; ++i) y(i) = rng.normal(0.0, 3.0);
    for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = rng.normal(0.0, 1.0);
    worst = std::max(worst, std::abs(log_marginal_y(y, B, h) - oracle::dense_log_marginal(y, B, h)));
  }
  record("A3", "collapsed marginal: Woodbury path equals dense multivariate t (50 fixtures)", worst < 1e-8,
         fmt("max abs difference %.2e (<1e-8)", worst));
}

void a4_conjugacy() {
  const auto t0 = Clock::now();
  IntMatrix Z(1, 2);
  Z << 4, 1;
  const Dataset data = Dataset::make(Vector::Zero(1), Z, Matrix::Zero(1, 1));
  SamplerConfig cfg;
  cfg.mode = SamplerMode::dm_only;
  cfg.fix_regression = true;
  cfg.burn_in = 1000;
  cfg.thin = 10;
  cfg.iterations = cfg.burn_in + 5000 * cfg.thin;
  cfg.seed = 404;
  cfg.init_zeta_frac = 0.0;
  Rng rng(cfg.seed);
  ChainState init = initial_state(data, cfg, rng);
  init.alpha << std::log(2.0), std::log(3.0);
  const auto chain = run_chain(data, Hyperparams{}, PartitionSpec::pivot(2), cfg, init);
  std::vector<double> psi1;
  for (const auto& p : chain.psi) psi1.push_back(p(0, 0));
  boost::math::beta_distribution<double> target(6.0, 4.0);
  const double ks = oracle::ks_distance(psi1, [&](double x) { return boost::math::cdf(target, x); });
  const double secs = seconds_since(t0);
  record("A4", "count-model conjugacy: psi_1 ~ Beta(6, 4) with gamma = (2, 3), z = (4, 1)",
         ks < 0.03 && psi1.size() == 5000 && secs < 30.0,
         fmt("KS %.4f (<0.03) over %zu draws, %.2f s (<30 s)", ks, psi1.size(), secs));
}

void a5_reversibility() {
  SimConfig sim;
  sim.N = 12;
  sim.P = 3;
  sim.J = 5;
  sim.n_true_cov = 2;
  sim.n_true_bal = 1;
  sim.zdot_lo = 50;
  sim.zdot_hi = 200;
  sim.delta = 1e-3;
  sim.seed = 505;
  const auto rep = gen_replicate(sim);
  const auto spec = PartitionSpec::pivot(5);
  const Hyperparams hyper;
  SamplerConfig cfg;
  cfg.iterations = 10;
  cfg.burn_in = 0;
  cfg.init_zeta_frac = 0.3;
  cfg.init_xi_frac = 0.5;
  Rng rng(55);
  ChainState base = initial_state(rep.train, cfg, rng);
  for (Eigen::Index j = 0; j < base.alpha.size(); ++j) base.alpha(j) = rng.normal(0.0, 0.5);
  const Sampler s0(rep.train, hyper, spec, cfg, base);

  double alpha = 0.0, add_del = 0.0, within = 0.0, xi = 0.0;
  int n_add = 0, n_within = 0;
  for (int j = 0; j < 5; ++j) {
    ChainState moved = base;
    moved.alpha(j) += 0.4;
    const Sampler s1(rep.train, hyper, spec, cfg, moved);
    alpha = std::max(alpha, std::abs(s0.log_ratio_alpha(j, moved.alpha(j)) + s1.log_ratio_alpha(j, base.alpha(j))));
    for (int p = 0; p < 3; ++p) {
      ChainState other = base;
      if (base.zeta(j, p)) {
        other.phi(j, p) -= 0.3;
        const Sampler s2(rep.train, hyper, spec, cfg, other);
        within = std::max(within, std::abs(s0.log_ratio_within(j, p, other.phi(j, p)) +
                                           s2.log_ratio_within(j, p, base.phi(j, p))));
        ++n_within;
      } else {
        other.zeta(j, p) = 1;
        other.phi(j, p) = 0.9;
        const Sampler s2(rep.train, hyper, spec, cfg, other);
        add_del = std::max(add_del, std::abs(s0.log_ratio_add(j, p, 0.9) + s2.log_ratio_delete(j, p)));
        ++n_add;
      }
    }
  }
  for (int m = 0; m < 4; ++m) {
    ChainState flipped = base;
    flipped.xi(m) = 1 - flipped.xi(m);
    const Sampler s1(rep.train, hyper, spec, cfg, flipped);
    xi = std::max(xi, std::abs(s0.log_ratio_xi(m) + s1.log_ratio_xi(m)));
  }
  const double worst = std::max({alpha, add_del, within, xi});
  record("A5", "MH reversibility: forward and reverse log ratios cancel for every move type",
         worst < 1e-10 && n_add > 0 && n_within > 0,
         fmt("alpha %.1e, add/delete %.1e (%d pairs), within %.1e (%d pairs), xi %.1e (<1e-10)", alpha, add_del, n_add,
             within, n_within, xi));
}

void a6_ridge_oracle() {
  Vector y(3);
  y << 0.4, -1.1, 0.7;
  const Dataset train = Dataset::make(y, IntMatrix::Ones(3, 2), Matrix::Zero(3, 1));
  Matrix psi(3, 2);
  psi << 0.2, 0.8, 0.5, 0.5, 0.7, 0.3;
  Hyperparams hyper;
  hyper.h_beta = 2.0;
  hyper.h_alpha0 = 1.5;
  ChainOutput chain;
  chain.config.standardize_balances = false;
  chain.xi = {IntVector::Ones(1)};
  chain.psi = {psi};

  Vector b(3);
  for (int i = 0; i < 3; ++i) b(i) = std::sqrt(0.5) * std::log(psi(i, 0) / psi(i, 1));
  const double beta_hat = b.dot(y) / (b.dot(b) + 1.0 / hyper.h_beta);
  const double alpha_hat = y.sum() / (3.0 + 1.0 / hyper.h_alpha0);
  Matrix psi_new(2, 2);
  psi_new << 0.9, 0.1, 0.35, 0.65;
  const Vector pred = predict_from_psi(chain, train, psi_new, PartitionSpec::pivot(2), hyper);
  double worst = std::abs(ridge_coefficients(b, y, hyper.h_beta)(0) - beta_hat);
  for (int i = 0; i < 2; ++i) {
    const double b_new = std::sqrt(0.5) * std::log(psi_new(i, 0) / psi_new(i, 1));
    worst = std::max(worst, std::abs(pred(i) - (alpha_hat + b_new * beta_hat)));
  }
  record("A6", "scalar ridge and prediction oracle (n = 3, one balance)", worst < 1e-12,
         fmt("max abs error %.2e (<1e-12)", worst));
}

// ---------------------------------------------------------------------------
// B. Simulation study

struct RunMetrics {
  ConfusionSummary cov, bal;
  double mse = 0.0, pmse = 0.0;
  double mean_mppi_zeta = 0.0, max_mppi_xi = 0.0;
};

struct ReplicateResult {
  RunMetrics jm9, jm99, jm999, bayes9, null9;
  RunMetrics b0_sweep[4];  // b0 = 1, 2, 4, 8 at b = 9
  double seconds = 0.0;
};

constexpr double kSweepB0[4] = {1.0, 2.0, 4.0, 8.0};

struct StudyOptions {
  int replicates = 10;
  int jobs = 1;
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  int moves = 25;
  std::uint64_t seed = 20240101;
  std::string report;
};

Hyperparams prior(double b, double b0) {
  Hyperparams h;
  h.a = 1.0;
  h.b = b;
  h.a_m = 1.0;
  h.b_m = b;
  h.b0 = b0;
  return h;
}

RunMetrics score(const Matrix& mppi_zeta, const Vector& mppi_xi, const GroundTruth& truth, const Vector& fitted,
                 const Vector& y, const Vector& pred, const Vector& y_test) {
  RunMetrics r;
  r.cov = confusion(median_model(mppi_zeta), truth.zeta);
  r.bal = confusion(median_model(mppi_xi), truth.xi);
  r.mse = squared_error(y, fitted).sum;
  r.pmse = squared_error(y_test, pred).sum;
  r.mean_mppi_zeta = mppi_zeta.mean();
  r.max_mppi_xi = mppi_xi.maxCoeff();
  return r;
}

RunMetrics fit_joint(const Replicate& rep, const Hyperparams& hyper, const SamplerConfig& cfg) {
  const Standardizer st = Standardizer::fit(rep.train);
  const Dataset train = st.apply(rep.train);
  const TestSet test = st.apply(rep.test);
  const auto spec = PartitionSpec::pivot(static_cast<int>(train.j()));
  const auto chain = run_chain(train, hyper, spec, cfg);
  const Vector fitted = fitted_y(chain, train, spec, hyper).array() + st.y_mean;
  const Vector pred = predict_y(chain, train, test, spec, hyper).array() + st.y_mean;
  return score(chain.mppi_zeta, chain.mppi_xi, rep.truth, fitted, rep.train.Y, pred, *rep.test.Y);
}

RunMetrics fit_two_step(const Replicate& rep, const Hyperparams& hyper, const SamplerConfig& cfg) {
  const Standardizer st = Standardizer::fit(rep.train);
  const Dataset train = st.apply(rep.train);
  const TestSet test = st.apply(rep.test);
  const auto spec = PartitionSpec::pivot(static_cast<int>(train.j()));
  const auto fit = run_two_step(train, hyper, spec, cfg);
  const Vector fitted = fitted_y(fit.stage2, train, spec, hyper).array() + st.y_mean;
  const Vector pred = predict_two_step(fit, train, test, spec, hyper).array() + st.y_mean;
  return score(fit.stage1.mppi_zeta, fit.stage2.mppi_xi, rep.truth, fitted, rep.train.Y, pred, *rep.test.Y);
}

ReplicateResult run_replicate(int r, const StudyOptions& opts) {
  const auto t0 = Clock::now();
  SimConfig sim;
  sim.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
  const Replicate rep = gen_replicate(sim);
  SimConfig null_sim = sim;
  null_sim.n_true_cov = 0;
  null_sim.n_true_bal = 0;
  null_sim.seed = derive_seed(opts.seed ^ 0x5eedULL, static_cast<std::uint64_t>(r));
  const Replicate null_rep = gen_replicate(null_sim);

  SamplerConfig cfg;
  cfg.iterations = opts.iterations;
  cfg.burn_in = opts.burn_in;
  cfg.thin = opts.thin;
  cfg.between_moves_per_iter = opts.moves;
  cfg.seed = derive_seed(sim.seed, 1000);

  ReplicateResult out;
  out.jm9 = fit_joint(rep, prior(9, 2), cfg);
  out.jm99 = fit_joint(rep, prior(99, 2), cfg);
  out.jm999 = fit_joint(rep, prior(999, 2), cfg);
  out.bayes9 = fit_two_step(rep, prior(9, 2), cfg);
  for (int k = 0; k < 4; ++k) out.b0_sweep[k] = kSweepB0[k] == 2.0 ? out.jm9 : fit_joint(rep, prior(9, kSweepB0[k]), cfg);
  out.null9 = fit_joint(null_rep, prior(9, 2), cfg);
  out.seconds = seconds_since(t0);
  return out;
}

double mean_of(const std::vector<ReplicateResult>& res, const std::function<double(const ReplicateResult&)>& f) {
  double s = 0.0;
  for (const auto& r : res) s += f(r);
  return s / static_cast<double>(res.size());
}

void write_report(const std::string& path, const std::vector<ReplicateResult>& res) {
  std::ofstream out(path);
  out << "replicate,run,cov_selected,cov_sens,cov_spec,cov_mcc,bal_selected,bal_sens,bal_spec,bal_mcc,mse,pmse,"
         "mean_mppi_zeta,max_mppi_xi\n";
  auto row = [&out](std::size_t r, const std::string& name, const RunMetrics& m) {
    out << r + 1 << ',' << name << ',' << m.cov.selected() << ',' << m.cov.sensitivity << ',' << m.cov.specificity
        << ',' << m.cov.mcc << ',' << m.bal.selected() << ',' << m.bal.sensitivity << ',' << m.bal.specificity << ','
        << m.bal.mcc << ',' << m.mse << ',' << m.pmse << ',' << m.mean_mppi_zeta << ',' << m.max_mppi_xi << '\n';
  };
  for (std::size_t r = 0; r < res.size(); ++r) {
    row(r, "jm_b9", res[r].jm9);
    row(r, "jm_b99", res[r].jm99);
    row(r, "jm_b999", res[r].jm999);
    row(r, "bayes_b9", res[r].bayes9);
    for (int k = 0; k < 4; ++k) row(r, "jm_b9_b0_" + std::to_string(static_cast<int>(kSweepB0[k])), res[r].b0_sweep[k]);
    row(r, "null_b9", res[r].null9);
  }
}

void simulation_study(const StudyOptions& opts) {
  std::vector<ReplicateResult> res(opts.replicates);
  std::atomic<int> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (int r = next++; r < opts.replicates; r = next++) {
      res[r] = run_replicate(r, opts);
      std::lock_guard<std::mutex> lock(io_mutex);
      const auto& x = res[r];
      std::printf("  replicate %2d: JM b=9 cov %ld sel (MCC %.2f), bal %ld sel (MCC %.2f), PMSE %.1f | b=99 MCC %.2f | "
                  "b=999 PMSE %.1f | two-step bal sens %.2f PMSE %.1f | null mean MPPI %.3f (%.0f s)\n",
                  r + 1, x.jm9.cov.selected(), x.jm9.cov.mcc, x.jm9.bal.selected(), x.jm9.bal.mcc, x.jm9.pmse,
                  x.jm99.cov.mcc, x.jm999.pmse, x.bayes9.bal.sensitivity, x.bayes9.pmse, x.null9.mean_mppi_zeta,
                  x.seconds);
      std::fflush(stdout);
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::max(1, opts.jobs); ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!opts.report.empty()) write_report(opts.report, res);

  auto m = [&](auto f) { return mean_of(res, f); };

  {
    const double sens = m([](auto& r) { return r.jm9.cov.sensitivity; });
    const double spec = m([](auto& r) { return r.jm9.cov.specificity; });
    const double mcc = m([](auto& r) { return r.jm9.cov.mcc; });
    record("B7", "JM covariates at a=1, b=9: sensitivity 0.83 +/- 0.32, specificity >= 0.99, MCC 0.74 +/- 0.26",
           std::abs(sens - 0.83) <= 0.32 && spec >= 0.99 && std::abs(mcc - 0.74) <= 0.26,
           fmt("sensitivity %.3f, specificity %.4f, MCC %.3f", sens, spec, mcc));
  }
  {
    const double mcc = m([](auto& r) { return r.jm99.cov.mcc; });
    const double sel = m([](auto& r) { return static_cast<double>(r.jm99.cov.selected()); });
    record("B8", "JM covariates at a=1, b=99: MCC 0.82 +/- 0.24, selected 7.47 +/- 4.0",
           std::abs(mcc - 0.82) <= 0.24 && std::abs(sel - 7.47) <= 4.0, fmt("MCC %.3f, selected %.2f", mcc, sel));
  }
  {
    const double sens = m([](auto& r) { return r.jm9.bal.sensitivity; });
    const double mcc = m([](auto& r) { return r.jm9.bal.mcc; });
    record("B9", "JM balances at a_m=1, b_m=9: sensitivity 0.92 +/- 0.18, MCC 0.94 +/- 0.12",
           std::abs(sens - 0.92) <= 0.18 && std::abs(mcc - 0.94) <= 0.12, fmt("sensitivity %.3f, MCC %.3f", sens, mcc));
  }
  {
    const double sens = m([](auto& r) { return r.bayes9.bal.sensitivity; });
    record("B10", "two-step balances at a_m=1, b_m=9: sensitivity 0.97 +/- 0.12", std::abs(sens - 0.97) <= 0.12,
           fmt("sensitivity %.3f", sens));
  }
  {
    const double p9 = m([](auto& r) { return r.jm9.pmse; });
    const double p99 = m([](auto& r) { return r.jm99.pmse; });
    const double p999 = m([](auto& r) { return r.jm999.pmse; });
    const double mse_jm = m([](auto& r) { return r.jm9.mse; });
    const double mse_two = m([](auto& r) { return r.bayes9.mse; });
    const double p_two = m([](auto& r) { return r.bayes9.pmse; });
    record("B11",
           "orderings: PMSE JM b=9 < b=99 < b=999; MSE two-step < JM; PMSE JM < two-step",
           p9 < p99 && p99 < p999 && mse_two < mse_jm && p9 < p_two,
           fmt("PMSE JM %.1f / %.1f / %.1f, MSE two-step %.1f vs JM %.1f, PMSE JM %.1f vs two-step %.1f", p9, p99, p999,
               mse_two, mse_jm, p9, p_two));
  }
  {
    double sens[4], mcc[4], count[4], bal_mcc[4], pmse[4];
    for (int k = 0; k < 4; ++k) {
      sens[k] = m([k](auto& r) { return r.b0_sweep[k].cov.sensitivity; });
      mcc[k] = m([k](auto& r) { return r.b0_sweep[k].cov.mcc; });
      count[k] = m([k](auto& r) { return static_cast<double>(r.b0_sweep[k].bal.selected()); });
      bal_mcc[k] = m([k](auto& r) { return r.b0_sweep[k].bal.mcc; });
      pmse[k] = m([k](auto& r) { return r.b0_sweep[k].pmse; });
    }
    const double sens_range = *std::max_element(sens, sens + 4) - *std::min_element(sens, sens + 4);
    const double mcc_range = *std::max_element(mcc, mcc + 4) - *std::min_element(mcc, mcc + 4);
    bool nonincreasing = true;
    for (int k = 1; k < 4; ++k) nonincreasing &= count[k] <= count[k - 1] && bal_mcc[k] <= bal_mcc[k - 1];
    record("B12",
           "b0 sweep {1,2,4,8}: covariate sensitivity and MCC flat (range <= 0.1); balance count and MCC "
           "non-increasing; PMSE(b0=8) > PMSE(b0=1)",
           sens_range <= 0.1 && mcc_range <= 0.1 && nonincreasing && pmse[3] > pmse[0],
           fmt("cov sens range %.3f, cov MCC range %.3f, bal count %.2f/%.2f/%.2f/%.2f, bal MCC %.3f/%.3f/%.3f/%.3f, "
               "PMSE %.1f/%.1f/%.1f/%.1f",
               sens_range, mcc_range, count[0], count[1], count[2], count[3], bal_mcc[0], bal_mcc[1], bal_mcc[2],
               bal_mcc[3], pmse[0], pmse[1], pmse[2], pmse[3]));
  }
  {
    const double bound = 2.0 * 1.0 / (1.0 + 9.0);
    int good = 0;
    for (const auto& r : res) good += r.null9.mean_mppi_zeta < bound && r.null9.max_mppi_xi < 0.5;
    const int needed = (9 * opts.replicates + 9) / 10;
    record("B13", "null model: mean zeta MPPI < 2a/(a+b) and no balance MPPI >= 0.5 in >= 9 of 10 replicates",
           good >= needed, fmt("%d of %d replicates calibrated (need %d)", good, opts.replicates, needed));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string mode = "properties";
  StudyOptions study;
  app.add_option("mode", mode, "properties, simulation or all")->check(CLI::IsMember({"properties", "simulation", "all"}));
  app.add_option("--replicates", study.replicates, "Simulation replicates")->check(CLI::PositiveNumber);
  app.add_option("--jobs", study.jobs, "Replicates fitted in parallel")->check(CLI::PositiveNumber);
  app.add_option("--iterations", study.iterations, "MCMC iterations per chain");
  app.add_option("--burn-in", study.burn_in, "Burn-in iterations");
  app.add_option("--thin", study.thin, "Thinning interval");
  app.add_option("--moves", study.moves, "Between-model proposals per iteration");
  app.add_option("--seed", study.seed, "Master seed");
  app.add_option("--report", study.report, "CSV file for per-replicate metrics");
  CLI11_PARSE(app, argc, argv);
  if (study.jobs == 1) study.jobs = std::max(1u, std::thread::hardware_concurrency());

  const auto t0 = Clock::now();
  if (mode != "simulation") {
    a1_balances();
    a2_gamma_identity();
    a3_woodbury();
    a4_conjugacy();
    a5_reversibility();
    a6_ridge_oracle();
  }
  if (mode != "properties") {
    std::printf("simulation study: %d replicates, %d iterations (burn-in %d, thin %d), %d moves per iteration\n",
                study.replicates, study.iterations, study.burn_in, study.thin, study.moves);
    simulation_study(study);
  }
  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; });
  std::printf("%zu criteria, %ld failed, %.1f s\n", outcomes.size(), static_cast<long>(failed), seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
