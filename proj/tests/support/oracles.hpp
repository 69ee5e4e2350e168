#pragma once

// Reference computations written independently of the library's likelihood
// code. Only containers and the corpus/model structs are shared.

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "dca/corpus.hpp"
#include "dca/model.hpp"

namespace oracle {

using dca::Document;
using dca::ModelParams;

inline double lgam(double x) { return std::lgamma(x); }

// log p(w | l, Theta) for independent Poisson counts.
inline double poisson_loglik(const Document& doc, const std::vector<double>& l, const ModelParams& p) {
  double acc = 0.0;
  for (double x : l) acc -= x;
  for (const auto& e : doc) {
    double mu = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) mu += p.theta(e.word, static_cast<int>(k)) * l[k];
    acc += static_cast<double>(e.count) * std::log(mu) - lgam(static_cast<double>(e.count) + 1.0);
  }
  return acc;
}

// GP marginal log p(w) by quadrature over l (K <= 2). The substitution
// l = t^(1/alpha) turns l^(alpha-1) dl into dt/alpha.
inline double quad_gp_marginal(const Document& doc, const ModelParams& p) {
  const int K = p.num_components();
  boost::math::quadrature::exp_sinh<double> outer, inner;
  auto weight = [&](int k, double t, double& l) {
    const double a = p.alpha(k), b = p.beta(k);
    l = std::pow(t, 1.0 / a);
    return a * std::log(b) - lgam(a) - std::log(a) - b * l;
  };
  // Scale by the value at the prior mean so the integrand stays O(1).
  std::vector<double> mean(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) mean[static_cast<std::size_t>(k)] = (p.alpha(k) + 1.0) / (p.beta(k) + 1.0);
  const double shift = poisson_loglik(doc, mean, p);
  if (K == 1) {
    const double v = outer.integrate([&](double t) {
      double l;
      const double w = weight(0, t, l);
      if (!std::isfinite(l)) return 0.0;
      return std::exp(w + poisson_loglik(doc, {l}, p) - shift);
    });
    return std::log(v) + shift;
  }
  const double v = outer.integrate([&](double t1) {
    double l1;
    const double w1 = weight(0, t1, l1);
    if (!std::isfinite(l1)) return 0.0;
    return inner.integrate([&](double t2) {
      double l2;
      const double w2 = weight(1, t2, l2);
      if (!std::isfinite(l2)) return 0.0;
      return std::exp(w1 + w2 + poisson_loglik(doc, {l1, l2}, p) - shift);
    });
  });
  return std::log(v) + shift;
}

// DM marginal log p(w) for K = 2 by quadrature over m_1 in (0, 1).
inline double quad_dm_marginal(const Document& doc, const ModelParams& p) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double a1 = p.alpha(0), a2 = p.alpha(1);
  double L = 0.0, coef = 0.0;
  for (const auto& e : doc) {
    L += static_cast<double>(e.count);
    coef -= lgam(static_cast<double>(e.count) + 1.0);
  }
  coef += lgam(L + 1.0) + lgam(a1 + a2) - lgam(a1) - lgam(a2);
  // xc is the signed distance to the nearer endpoint, which keeps 1 - m exact near m = 1.
  const double v = q.integrate(
      [&](double m, double xc) {
        const double rest = m > 0.5 ? xc : 1.0 - m;
        double acc = (a1 - 1.0) * std::log(m) + (a2 - 1.0) * std::log(rest);
        for (const auto& e : doc)
          acc += static_cast<double>(e.count) * std::log(p.theta(e.word, 0) * m + p.theta(e.word, 1) * rest);
        return std::exp(acc);
      },
      0.0, 1.0);
  return std::log(v) + coef;
}

// Exact posterior over token assignments of a whole corpus for the
// collapsed sampler (Theta and scores integrated out). Tokens are taken
// document by document in ascending word order; state index is the base-K
// number with the first token as the most significant digit.
inline std::vector<double> collapsed_posterior(const std::vector<Document>& docs, const ModelParams& p) {
  const int K = p.num_components(), J = p.vocab_size();
  std::vector<int> word, doc_of;
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& e : docs[d])
      for (long n = 0; n < e.count; ++n) {
        word.push_back(e.word);
        doc_of.push_back(static_cast<int>(d));
      }
  const std::size_t T = word.size();
  std::size_t states = 1;
  for (std::size_t t = 0; t < T; ++t) states *= static_cast<std::size_t>(K);
  std::vector<int> group(static_cast<std::size_t>(J), 0);
  int G = 1;
  if (p.groups) {
    group = p.groups->group_of;
    G = p.groups->num_groups;
  }
  std::vector<double> logp(states);
  std::vector<int> z(T);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t code = s;
    for (std::size_t t = T; t-- > 0;) {
      z[t] = static_cast<int>(code % static_cast<std::size_t>(K));
      code /= static_cast<std::size_t>(K);
    }
    std::vector<double> njk(static_cast<std::size_t>(J * K), 0.0), ngk(static_cast<std::size_t>(G * K), 0.0),
        c(docs.size() * static_cast<std::size_t>(K), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      njk[static_cast<std::size_t>(word[t] * K + z[t])] += 1.0;
      ngk[static_cast<std::size_t>(group[static_cast<std::size_t>(word[t])] * K + z[t])] += 1.0;
      c[static_cast<std::size_t>(doc_of[t]) * static_cast<std::size_t>(K) + static_cast<std::size_t>(z[t])] += 1.0;
    }
    double acc = 0.0;
    for (int g = 0; g < G; ++g) {
      double gsum = 0.0;
      for (int j = 0; j < J; ++j)
        if (group[static_cast<std::size_t>(j)] == g) gsum += p.gamma(j);
      for (int k = 0; k < K; ++k) {
        acc += lgam(gsum) - lgam(gsum + ngk[static_cast<std::size_t>(g * K + k)]);
        for (int j = 0; j < J; ++j)
          if (group[static_cast<std::size_t>(j)] == g)
            acc += lgam(p.gamma(j) + njk[static_cast<std::size_t>(j * K + k)]) - lgam(p.gamma(j));
      }
    }
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const double* cd = c.data() + d * static_cast<std::size_t>(K);
      if (p.family == dca::Family::DM) {
        double asum = 0.0, L = 0.0;
        for (int k = 0; k < K; ++k) {
          asum += p.alpha(k);
          L += cd[k];
          acc += lgam(p.alpha(k) + cd[k]) - lgam(p.alpha(k));
        }
        acc += lgam(asum) - lgam(asum + L);
        continue;
      }
      for (int k = 0; k < K; ++k) {
        const double a = p.alpha(k), b = p.beta(k);
        const double slab = lgam(a + cd[k]) - lgam(a) + a * std::log(b) - (a + cd[k]) * std::log(1.0 + b);
        if (p.family == dca::Family::GP || p.rho(k) == 0.0)
          acc += slab;
        else if (cd[k] > 0.0)
          acc += std::log(1.0 - p.rho(k)) + slab;
        else
          acc += std::log(p.rho(k) + (1.0 - p.rho(k)) * std::exp(slab));
      }
    }
    logp[s] = acc;
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double z_sum = 0.0;
  for (double& x : logp) z_sum += x = std::exp(x - top);
  for (double& x : logp) x /= z_sum;
  return logp;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

// Standard error of the mean by non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& xs, int batches = 50) {
  const std::size_t size = xs.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += xs[static_cast<std::size_t>(b) * size + i];
    means.push_back(s / static_cast<double>(size));
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double v = 0.0;
  for (double x : means) v += (x - m) * (x - m);
  v /= batches - 1;
  return std::sqrt(v / batches);
}

// One-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Critical value of the KS statistic at the 1% level (large n).
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Mean absolute error between two J x K matrices after the best column permutation.
inline double aligned_mae(const dca::Matrix& est, const dca::Matrix& truth) {
  const int K = static_cast<int>(truth.cols());
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double acc = 0.0;
    for (int k = 0; k < K; ++k) acc += (est.col(perm[static_cast<std::size_t>(k)]) - truth.col(k)).cwiseAbs().sum();
    best = std::min(best, acc / static_cast<double>(truth.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle
