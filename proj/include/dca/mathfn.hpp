#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dca {

/// Seeded 64-bit Mersenne Twister. Uniforms and normals are derived from the
/// raw 64-bit stream in-house, so a seed produces the same draws on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  double normal();

  /// Independent stream for worker `index` of a run seeded with `master`.
  static Rng derive(std::uint64_t master, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

double digamma(double x);
double log_gamma(double x);
/// ln(n!) for nonnegative integers.
double log_factorial(long n);

/// Gamma(shape, rate): density proportional to rate^shape x^(shape-1) e^(-rate x).
double sample_gamma(double shape, double rate, Rng& rng);
/// Logarithm of a Gamma(shape, 1) draw; stays finite when shape is tiny and
/// the draw itself would underflow.
double sample_log_gamma(double shape, Rng& rng);
double sample_beta(double a, double b, Rng& rng);
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);
long sample_binomial(long n, double p, Rng& rng);
long sample_poisson(double mean, Rng& rng);
std::vector<long> sample_multinomial(long n, std::span<const double> p, Rng& rng);
int sample_categorical(std::span<const double> weights, Rng& rng);

/// log P(L) for the Poisson-Gamma (negative binomial) law obtained by mixing
/// Poisson(l) over l ~ Gamma(a, b).
double poisson_gamma_logpmf(long L, double a, double b);

/// log of the Gamma(shape, rate) density.
double gamma_logpdf(double x, double shape, double rate);

double log_sum_exp(std::span<const double> xs);

}  // namespace dca
