#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mvpois/types.hpp"

// Deterministic random number generation.  The engine is a splitmix64
// walk whose starting state is derived from (seed, stream), so any number
// of independent substreams can be opened from one seed without
// coordination.  The Poisson and Gamma samplers below pick their algorithm
// as a pure function of the distribution parameters, which keeps seeded
// runs reproducible regardless of how work is split across threads.

namespace mvpois {

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(detail::mix64(detail::mix64(seed) ^
                             detail::mix64(stream * 0xda942042e4dd58b5ULL + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform on the open interval (0,1); never returns an exact 0 or 1.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Standard normal via Box-Muller (the sine partner is discarded so the
// draw count per variate is fixed).
inline double sample_normal(CounterRng& rng) {
  const double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

namespace detail {

inline Count poisson_inversion(CounterRng& rng, double mean) {
  const double u = rng.next_unit();
  double pmf = std::exp(-mean);
  double cum = pmf;
  Count k = 0;
  // P(K > 200 | mean <= 10) is far below any representable tail probability
  while (u > cum && k < 200) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    cum += pmf;
  }
  return k;
}

// Hoermann's transformed rejection (PTRD), for mean >= 10.
inline Count poisson_ptrd(CounterRng& rng, double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = rng.next_unit() - 0.5;
    double v = rng.next_unit();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<Count>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    const double k = kd;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + k * log_mean - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<Count>(kd);
  }
}

}  // namespace detail

// Poisson sampler; the algorithm switch depends only on the mean.
inline Count sample_poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("sample_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean <= 10.0) return detail::poisson_inversion(rng, mean);
  return detail::poisson_ptrd(rng, mean);
}

// Gamma(shape, rate) via Marsaglia-Tsang squeeze; shapes below one are
// boosted through Gamma(shape + 1).
inline double sample_gamma(CounterRng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("sample_gamma: shape and rate must be > 0");
  if (shape < 1.0) {
    const double g = sample_gamma(rng, shape + 1.0, 1.0);
    const double u = rng.next_unit();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = sample_normal(rng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

// Dirichlet via normalised Gamma variates.
inline std::vector<double> sample_dirichlet(CounterRng& rng,
                                            const std::vector<double>& alpha) {
  std::vector<double> g(alpha.size());
  double total = 0.0;
  do {
    total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      g[i] = sample_gamma(rng, alpha[i], 1.0);
      total += g[i];
    }
  } while (!(total > 0.0));
  for (double& v : g) v /= total;
  return g;
}

inline std::vector<Count> sample_poisson_vector(CounterRng& rng,
                                                const std::vector<double>& means) {
  std::vector<Count> y(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) y[i] = sample_poisson(rng, means[i]);
  return y;
}

}  // namespace mvpois
