#include "dmlm/core_model.hpp"
#include "dmlm/partition.hpp"
#include "dmlm/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace dmlm;

namespace {

double correlation(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("AR(1) covariates") {
    SimConfig cfg;
    cfg.N = 2000;
    cfg.P = 5;
    Rng rng(1);
    const Matrix X = gen_covariates(cfg, rng);
    CHECK(std::abs(correlation(X.col(0), X.col(1)) - 0.4) < 0.05);
    CHECK(std::abs(correlation(X.col(0), X.col(2)) - 0.16) < 0.05);
    cfg.N = 20000;
    const Matrix Xl = gen_covariates(cfg, rng);
    for (int p = 0; p < 5; ++p) CHECK(std::abs(Xl.col(p).squaredNorm() / 20000.0 - 1.0) < 0.05);

    cfg.N = 2000;
    cfg.omega = 0.0;
    const Matrix X0 = gen_covariates(cfg, rng);
    for (int p = 0; p < 4; ++p) CHECK(std::abs(correlation(X0.col(p), X0.col(p + 1))) < 0.1);
  }

  TEST_CASE("truth has exactly the configured signals") {
    SimConfig cfg;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      const auto truth = gen_truth(cfg, rng);
      CHECK(truth.zeta.sum() == cfg.n_true_cov);
      CHECK(truth.xi.sum() == cfg.n_true_bal);
      CHECK((truth.beta.array() != 0.0).count() == cfg.n_true_bal);
      for (int j = 0; j < cfg.J; ++j) {
        for (int p = 0; p < cfg.P; ++p) {
          if (truth.zeta(j, p)) {
            CHECK(std::abs(truth.phi(j, p)) >= cfg.phi_lo);
            CHECK(std::abs(truth.phi(j, p)) <= cfg.phi_hi);
          } else {
            CHECK(truth.phi(j, p) == 0.0);
          }
        }
      }
      for (int m = 0; m < cfg.J - 1; ++m) {
        if (truth.xi(m)) {
          CHECK(std::abs(truth.beta(m)) >= cfg.beta_lo);
          CHECK(std::abs(truth.beta(m)) <= cfg.beta_hi);
        }
      }
      CHECK(truth.alpha.minCoeff() >= cfg.alpha_lo);
      CHECK(truth.alpha.maxCoeff() <= cfg.alpha_hi);
    }
  }

  TEST_CASE("replicates at benchmark scale") {
    SimConfig cfg;
    cfg.seed = 17;
    const auto rep = gen_replicate(cfg);
    CHECK(rep.train.n() == 50);
    CHECK(rep.train.p() == 50);
    CHECK(rep.train.j() == 150);
    CHECK(rep.test.n() == 50);
    CHECK(rep.test.Y.has_value());
    CHECK(rep.train.row_totals.minCoeff() >= cfg.zdot_lo);
    CHECK(rep.train.row_totals.maxCoeff() <= cfg.zdot_hi);
    CHECK((rep.truth.psi_star.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
    Matrix replaced = rep.truth.psi_star;
    zero_replace_rows(replaced, cfg.delta);
    CHECK(replaced.minCoeff() > 0.0);
    CHECK((replaced.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(rep.train.X != rep.test.X);
    CHECK(rep.train.Z != rep.test.Z);

    const auto again = gen_replicate(cfg);
    CHECK(again.train.Z == rep.train.Z);
    CHECK(again.train.Y == rep.train.Y);
    CHECK(again.test.X == rep.test.X);
    CHECK(again.truth.zeta == rep.truth.zeta);
  }

  TEST_CASE("null truth gives symmetric compositions") {
    SimConfig cfg;
    cfg.N = 400;
    cfg.J = 4;
    cfg.P = 3;
    cfg.n_true_cov = 0;
    cfg.n_true_bal = 0;
    Rng rng(9);
    GroundTruth truth = gen_truth(cfg, rng);
    truth.alpha.setZero();
    const Matrix X = gen_covariates(cfg, rng);
    const auto [Z, psi] = gen_dm_counts(X, truth, cfg, rng);
    const Vector mean = psi.colwise().mean().transpose();
    CHECK((mean.array() - 0.25).abs().maxCoeff() < 0.02);
    CHECK((Z.rowwise().sum().array() >= cfg.zdot_lo).all());
  }

  TEST_CASE("noise-free response is a deterministic function of psi") {
    SimConfig cfg;
    cfg.sigma_eps = 0.0;
    Rng rng(10);
    const auto truth = gen_truth(cfg, rng);
    const Matrix X = gen_covariates(cfg, rng);
    const auto [Z, psi] = gen_dm_counts(X, truth, cfg, rng);
    const Vector y1 = gen_response(psi, truth, cfg, rng);
    const Vector y2 = gen_response(psi, truth, cfg, rng);
    CHECK(y1 == y2);
    Matrix replaced = psi;
    zero_replace_rows(replaced, cfg.delta);
    const Vector expected = balance_matrix(replaced, PartitionSpec::pivot(cfg.J), false) * truth.beta;
    CHECK((y1 - expected).cwiseAbs().maxCoeff() < 1e-10);

    GroundTruth zero = truth;
    zero.beta.setZero();
    CHECK(gen_response(psi, zero, cfg, rng).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.d = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig{};
    cfg.n_true_bal = cfg.J;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig{};
    cfg.phi_lo = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}
