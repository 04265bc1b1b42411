#include "dmlm/random.hpp"

#include <cmath>

namespace dmlm {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

long Rng::binomial(long trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<long>(trials, p)(engine_);
}

double Rng::gamma(double shape, double rate) { return std::exp(log_gamma_draw(shape, rate)); }

double Rng::log_gamma_draw(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma draw needs positive shape and rate");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a), evaluated in log space.
    return log_gamma_draw(shape + 1.0, 1.0) + std::log(uniform()) / shape - std::log(rate);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = standard_normal();
    const double base = 1.0 + c * x;
    if (base <= 0.0) continue;
    const double v = base * base * base;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v) - std::log(rate);
    const double log_v = 3.0 * std::log(base);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + log_v)) return std::log(d) + log_v - std::log(rate);
  }
}

Vector Rng::dirichlet(const Eigen::Ref<const Vector>& concentration) {
  Vector out(concentration.size());
  for (;;) {
    for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = gamma(concentration(j), 1.0);
    const double total = out.sum();
    if (total > 0.0) return out / total;
  }
}

IntVector Rng::multinomial(long trials, const Eigen::Ref<const Vector>& probs) {
  IntVector out = IntVector::Zero(probs.size());
  double remaining_mass = 1.0;
  long remaining = trials;
  for (Eigen::Index j = 0; j + 1 < probs.size() && remaining > 0; ++j) {
    const double p = remaining_mass > 0.0 ? std::min(1.0, probs(j) / remaining_mass) : 0.0;
    const long draw = binomial(remaining, p);
    out(j) = static_cast<int>(draw);
    remaining -= draw;
    remaining_mass -= probs(j);
  }
  if (probs.size() > 0) out(probs.size() - 1) += static_cast<int>(remaining);
  return out;
}

}  // namespace dmlm
