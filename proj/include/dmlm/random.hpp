#pragma once

#include "dmlm/types.hpp"

#include <cstdint>
#include <random>

namespace dmlm {

/// Deterministic per-replicate seed: splitmix64 finalizer over (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Pseudo-random source injected into every sampler and generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), so log() is always finite.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer uniform on [lo, hi], inclusive.
  long uniform_int(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double standard_normal() { return normal(0.0, 1.0); }
  bool bernoulli(double p) { return uniform() < p; }
  long binomial(long trials, double p);

  /// Gamma(shape, rate) draw (Marsaglia-Tsang). May underflow to 0 for tiny shapes; see log_gamma_draw.
  double gamma(double shape, double rate);
  /// log of a Gamma(shape, rate) draw, exact even when the draw itself underflows.
  double log_gamma_draw(double shape, double rate);

  /// Dirichlet draw; zero entries possible when concentrations are tiny.
  Vector dirichlet(const Eigen::Ref<const Vector>& concentration);
  IntVector multinomial(long trials, const Eigen::Ref<const Vector>& probs);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace dmlm
