#include "dca/mathfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dca/errors.hpp"

namespace dca {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Marsaglia & Tsang (2000), shape >= 1, unit rate.
double gamma_mt(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double Rng::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller, one variate per call so the stream position is predictable.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Rng Rng::derive(std::uint64_t master, std::uint64_t index) {
  return Rng(mix_seed(master, index));
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive, got " + std::to_string(x));
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series with Bernoulli numbers B_2..B_14.
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
  double shift = 0.0;
  if (x < 7.0) {
    double prod = 1.0;
    while (x < 7.0) {
      prod *= x;
      x += 1.0;
    }
    shift = -std::log(prod);
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12 -
             inv2 * (1.0 / 360 -
                     inv2 * (1.0 / 1260 -
                             inv2 * (1.0 / 1680 -
                                     inv2 * (1.0 / 1188 -
                                             inv2 * (691.0 / 360360 - inv2 * (1.0 / 156)))))));
  return shift + (x - 0.5) * std::log(x) - x + kLogSqrt2Pi + series;
}

double log_factorial(long n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  if (n < 2) return 0.0;
  return log_gamma(static_cast<double>(n) + 1.0);
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw DomainError("sample_gamma: shape must be positive");
  if (shape >= 1.0) return std::log(gamma_mt(shape, rng));
  // Gamma(a) = Gamma(a + 1) * U^(1/a)
  const double g = gamma_mt(shape + 1.0, rng);
  return std::log(g) + std::log(rng.uniform()) / shape;
}

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw DomainError("sample_gamma: shape and rate must be positive");
  const double x = std::exp(sample_log_gamma(shape, rng)) / rate;
  return std::max(x, std::numeric_limits<double>::denorm_min());
}

double sample_beta(double a, double b, Rng& rng) {
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  const double m = std::max(la, lb);
  const double ea = std::exp(la - m);
  const double eb = std::exp(lb - m);
  return ea / (ea + eb);
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  if (alpha.empty()) throw DomainError("sample_dirichlet: empty parameter vector");
  for (double a : alpha)
    if (!(a > 0.0)) throw DomainError("sample_dirichlet: parameters must be positive");
  std::vector<double> out(alpha.size());
  if (alpha.size() == 1) {
    out[0] = 1.0;
    return out;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out[k] = sample_log_gamma(alpha[k], rng);
    top = std::max(top, out[k]);
  }
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

long sample_binomial(long n, double p, Rng& rng) {
  if (n < 0) throw DomainError("sample_binomial: negative trial count");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_binomial: probability outside [0,1]");
  long offset = 0;
  // Knuth's beta-splitting reduces large n exactly to small cases.
  while (n > 64) {
    if (p == 0.0) return offset;
    if (p == 1.0) return offset + n;
    const long a = 1 + n / 2;
    const long b = n + 1 - a;
    const double x = sample_beta(static_cast<double>(a), static_cast<double>(b), rng);
    if (x >= p) {
      n = a - 1;
      p = p / x;
    } else {
      offset += a;
      n = b - 1;
      p = (p - x) / (1.0 - x);
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  if (p == 0.0) return offset;
  if (p == 1.0) return offset + n;
  long successes = 0;
  for (long t = 0; t < n; ++t)
    if (rng.uniform() < p) ++successes;
  return offset + successes;
}

long sample_poisson(double mean, Rng& rng) {
  if (!(mean >= 0.0)) throw DomainError("sample_poisson: mean must be nonnegative");
  long offset = 0;
  while (mean > 30.0) {
    const long m = static_cast<long>(std::floor(mean * 7.0 / 8.0));
    const double x = sample_gamma(static_cast<double>(m), 1.0, rng);
    if (x < mean) {
      offset += m;
      mean -= x;
    } else {
      return offset + sample_binomial(m - 1, mean / x, rng);
    }
  }
  const double limit = std::exp(-mean);
  long k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return offset + k;
}

std::vector<long> sample_multinomial(long n, std::span<const double> p, Rng& rng) {
  if (n < 0) throw DomainError("sample_multinomial: negative sample size");
  if (p.empty()) throw DomainError("sample_multinomial: empty probability vector");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("sample_multinomial: invalid probability");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("sample_multinomial: probabilities do not sum to 1");
  std::vector<long> out(p.size(), 0);
  long remaining = n;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < p.size() && remaining > 0; ++k) {
    if (p[k] <= 0.0) continue;
    const double q = mass > 0.0 ? std::min(1.0, p[k] / mass) : 1.0;
    out[k] = sample_binomial(remaining, q, rng);
    remaining -= out[k];
    mass -= p[k];
  }
  if (remaining > 0) {
    // Remainder goes to the last category carrying mass.
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] <= 0.0) --last;
    out[last] += remaining;
  }
  return out;
}

int sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("sample_categorical: invalid weight");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("sample_categorical: all weights are zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = static_cast<int>(k);
    if (target < acc) return last_positive;
  }
  return last_positive;
}

double poisson_gamma_logpmf(long L, double a, double b) {
  if (L < 0) throw DomainError("poisson_gamma_logpmf: negative count");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("poisson_gamma_logpmf: a and b must be positive");
  const double Ld = static_cast<double>(L);
  return log_gamma(Ld + a) - log_gamma(a) - log_factorial(L) + a * std::log(b / (b + 1.0)) -
         Ld * std::log1p(b);
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma_logpdf: shape and rate must be positive");
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  if (x == 0.0) {
    if (shape < 1.0) throw DomainError("gamma_logpdf: density unbounded at 0 for shape < 1");
    if (shape == 1.0) return std::log(rate);
    return -std::numeric_limits<double>::infinity();
  }
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - log_gamma(shape);
}

double log_sum_exp(std::span<const double> xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - top);
  return top + std::log(acc);
}

}  // namespace dca
