#include "dca/model.hpp"

#include <cmath>
#include <limits>

#include "dca/errors.hpp"
#include "dca/mathfn.hpp"

namespace dca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNormTol = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void check_doc(const Document& doc, const ModelParams& params) {
  for (const auto& e : doc)
    require(e.word >= 0 && e.word < params.vocab_size(),
            "document word id " + std::to_string(e.word + 1) + " exceeds the model vocabulary");
}

void check_scores(const Vector& l, const ModelParams& params) {
  require(l.size() == params.num_components(), "score vector has " + std::to_string(l.size()) +
                                                   " entries, model has K=" +
                                                   std::to_string(params.num_components()));
}

void check_latent(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  require(V.num_components == params.num_components(), "latent counts have the wrong number of components");
  V.check_against(doc);
}

// sum_{j,k} v ln theta - ln v!, with 0 ln 0 := 0.
double word_terms(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  const int K = params.num_components();
  double acc = 0.0;
  for (std::size_t e = 0; e < doc.size(); ++e) {
    const auto row = params.theta.row(doc[e].word);
    for (int k = 0; k < K; ++k) {
      const long v = V.at(e, k);
      if (v == 0) continue;
      if (row(k) <= 0.0) return kNegInf;
      acc += static_cast<double>(v) * std::log(row(k)) - log_factorial(v);
    }
  }
  return acc;
}

double mixture_rate(const Document::value_type& e, const Vector& weights, const ModelParams& params) {
  return params.theta.row(e.word).dot(weights);
}

// ln Gamma(c+a)/Gamma(a) * b^a / (1+b)^(c+a)
double gp_component_term(long c, double a, double b) {
  const double cd = static_cast<double>(c);
  return log_gamma(cd + a) - log_gamma(a) + a * std::log(b) - (cd + a) * std::log1p(b);
}

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::GP: return "gp";
    case Family::CGP: return "cgp";
    case Family::DM: return "dm";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "gp" || s == "GP") return Family::GP;
  if (s == "cgp" || s == "CGP") return Family::CGP;
  if (s == "dm" || s == "DM") return Family::DM;
  throw ValidationError("unknown model family '" + s + "'");
}

void ModelParams::validate() const {
  const int K = num_components();
  const int J = vocab_size();
  require(K >= 1, "model needs at least one component");
  require(J >= 1, "model needs a nonempty vocabulary");
  require(alpha.size() == K, "alpha must have K entries");
  for (int k = 0; k < K; ++k) require(alpha(k) > 0.0 && std::isfinite(alpha(k)), "alpha entries must be positive");
  if (family != Family::DM) {
    require(beta.size() == K, "beta must have K entries");
    for (int k = 0; k < K; ++k) require(beta(k) > 0.0 && std::isfinite(beta(k)), "beta entries must be positive");
  }
  if (family == Family::CGP) {
    require(rho.size() == K, "rho must have K entries");
    for (int k = 0; k < K; ++k) require(rho(k) >= 0.0 && rho(k) <= 1.0, "rho entries must lie in [0,1]");
  }
  require(gamma.size() == J, "gamma must have J entries");
  for (int j = 0; j < J; ++j) require(gamma(j) >= 0.0 && std::isfinite(gamma(j)), "gamma entries must be nonnegative");
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      require(theta(j, k) >= 0.0 && std::isfinite(theta(j, k)), "theta entries must be finite and nonnegative");
  if (groups) {
    require(family == Family::DM, "word groups are only defined for the DM family");
    require(static_cast<int>(groups->group_of.size()) == J, "group assignment must cover the model vocabulary");
    Matrix sums = Matrix::Zero(groups->num_groups, K);
    for (int j = 0; j < J; ++j) {
      const int g = groups->group_of[static_cast<std::size_t>(j)];
      if (g < 0) {
        require(theta.row(j).sum() == 0.0, "ungrouped word " + std::to_string(j + 1) + " must carry zero loading");
        continue;
      }
      sums.row(g) += theta.row(j);
    }
    for (int g = 0; g < groups->num_groups; ++g)
      for (int k = 0; k < K; ++k)
        require(std::abs(sums(g, k) - 1.0) <= kNormTol,
                "theta column " + std::to_string(k + 1) + " is not normalized within group " + std::to_string(g + 1));
  } else {
    for (int k = 0; k < K; ++k)
      require(std::abs(theta.col(k).sum() - 1.0) <= kNormTol,
              "theta column " + std::to_string(k + 1) + " does not sum to one");
  }
}

ModelParams ModelParams::uniform(Family family, int vocab_size, int num_components, double alpha, double beta,
                                 double rho, double gamma) {
  ModelParams p;
  p.family = family;
  p.theta = Matrix::Constant(vocab_size, num_components, 1.0 / vocab_size);
  p.alpha = Vector::Constant(num_components, alpha);
  if (family != Family::DM) p.beta = Vector::Constant(num_components, beta);
  if (family == Family::CGP) p.rho = Vector::Constant(num_components, rho);
  p.gamma = Vector::Constant(vocab_size, gamma);
  return p;
}

void normalize_columns(Matrix& theta, const std::optional<GroupSpec>& groups) {
  const int K = static_cast<int>(theta.cols());
  if (!groups) {
    for (int k = 0; k < K; ++k) {
      const double s = theta.col(k).sum();
      if (!(s > 0.0)) throw ValidationError("cannot normalize a column with zero mass");
      theta.col(k) /= s;
    }
    return;
  }
  Matrix sums = Matrix::Zero(groups->num_groups, K);
  for (int j = 0; j < theta.rows(); ++j) {
    const int g = groups->group_of[static_cast<std::size_t>(j)];
    if (g >= 0) sums.row(g) += theta.row(j);
  }
  for (int j = 0; j < theta.rows(); ++j) {
    const int g = groups->group_of[static_cast<std::size_t>(j)];
    if (g < 0) {
      theta.row(j).setZero();
      continue;
    }
    for (int k = 0; k < K; ++k) {
      if (!(sums(g, k) > 0.0)) throw ValidationError("cannot normalize a group column with zero mass");
      theta(j, k) /= sums(g, k);
    }
  }
}

std::vector<long> LatentCounts::component_totals() const {
  std::vector<long> c(static_cast<std::size_t>(num_components), 0);
  if (num_components == 0) return c;
  const std::size_t rows = v.size() / static_cast<std::size_t>(num_components);
  for (std::size_t e = 0; e < rows; ++e)
    for (int k = 0; k < num_components; ++k) c[static_cast<std::size_t>(k)] += at(e, k);
  return c;
}

void LatentCounts::check_against(const Document& doc) const {
  require(v.size() == doc.size() * static_cast<std::size_t>(num_components),
          "latent counts do not match the document's observed words");
  for (std::size_t e = 0; e < doc.size(); ++e) {
    long row = 0;
    for (int k = 0; k < num_components; ++k) {
      require(at(e, k) >= 0, "latent counts must be nonnegative");
      row += at(e, k);
    }
    require(row == doc[e].count, "latent row for word " + std::to_string(doc[e].word + 1) +
                                     " does not sum to its observed count");
  }
}

double dirichlet_logpdf(const Vector& m, const Vector& alpha) {
  require(m.size() == alpha.size(), "proportion vector and alpha differ in length");
  require(std::abs(m.sum() - 1.0) <= kNormTol, "proportions must sum to one");
  double acc = log_gamma(alpha.sum());
  for (int k = 0; k < alpha.size(); ++k) {
    acc -= log_gamma(alpha(k));
    require(m(k) >= 0.0, "proportions must be nonnegative");
    if (m(k) == 0.0) {
      if (alpha(k) < 1.0) throw DomainError("Dirichlet density unbounded at a zero proportion with alpha < 1");
      if (alpha(k) > 1.0) return kNegInf;
      continue;
    }
    acc += (alpha(k) - 1.0) * std::log(m(k));
  }
  return acc;
}

double loglik_gp_joint(const Document& doc, const Vector& l, const ModelParams& params, Representation repr) {
  check_doc(doc, params);
  check_scores(l, params);
  double acc = 0.0;
  for (int k = 0; k < l.size(); ++k) {
    acc += gamma_logpdf(l(k), params.alpha(k), params.beta(k));
    acc -= l(k);  // Poisson exponent; columns of theta sum to one
  }
  if (acc == kNegInf) return acc;
  for (const auto& e : doc) {
    const double rate = mixture_rate(e, l, params);
    if (rate <= 0.0) return kNegInf;
    acc += static_cast<double>(e.count) * std::log(rate) - log_factorial(e.count);
  }
  if (repr == Representation::Sequence) acc -= log_multinomial_coeff(doc);
  return acc;
}

double loglik_cgp_joint(const Document& doc, const SpikeSlabScores& l, const ModelParams& params) {
  check_doc(doc, params);
  check_scores(l.value, params);
  require(static_cast<int>(l.spike.size()) == params.num_components(), "spike flags must have K entries");
  const int K = params.num_components();
  Vector effective = l.value;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const double rho = params.rho(k);
    if (l.spike[static_cast<std::size_t>(k)]) {
      if (rho <= 0.0) return kNegInf;
      acc += std::log(rho);
      effective(k) = 0.0;
    } else {
      if (rho >= 1.0) return kNegInf;
      require(l.value(k) > 0.0, "slab scores must be positive");
      acc += std::log1p(-rho) + gamma_logpdf(l.value(k), params.alpha(k), params.beta(k));
      acc -= l.value(k);
    }
  }
  for (const auto& e : doc) {
    const double rate = mixture_rate(e, effective, params);
    if (rate <= 0.0) return kNegInf;
    acc += static_cast<double>(e.count) * std::log(rate) - log_factorial(e.count);
  }
  return acc;
}

double loglik_gp_latent(const Document& doc, const LatentCounts& V, const Vector& l, const ModelParams& params) {
  check_doc(doc, params);
  check_scores(l, params);
  check_latent(doc, V, params);
  const auto c = V.component_totals();
  double acc = 0.0;
  for (int k = 0; k < l.size(); ++k) {
    const double a = params.alpha(k), b = params.beta(k);
    const double shape = static_cast<double>(c[static_cast<std::size_t>(k)]) + a;
    acc += a * std::log(b) - log_gamma(a) - (b + 1.0) * l(k);
    if (l(k) > 0.0) {
      acc += (shape - 1.0) * std::log(l(k));
    } else if (shape < 1.0) {
      throw DomainError("latent likelihood unbounded at a zero score");
    } else if (shape > 1.0) {
      return kNegInf;
    }
  }
  return acc + word_terms(doc, V, params);
}

double loglik_gp_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  check_doc(doc, params);
  check_latent(doc, V, params);
  const auto c = V.component_totals();
  double acc = 0.0;
  for (int k = 0; k < params.num_components(); ++k)
    acc += gp_component_term(c[static_cast<std::size_t>(k)], params.alpha(k), params.beta(k));
  return acc + word_terms(doc, V, params);
}

double loglik_cgp_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  check_doc(doc, params);
  check_latent(doc, V, params);
  const auto c = V.component_totals();
  double acc = 0.0;
  for (int k = 0; k < params.num_components(); ++k) {
    const long ck = c[static_cast<std::size_t>(k)];
    const double rho = params.rho(k);
    const double slab = gp_component_term(ck, params.alpha(k), params.beta(k));
    if (rho == 0.0) {
      acc += slab;
    } else if (rho == 1.0) {
      if (ck > 0) return kNegInf;
    } else {
      acc += log_add(std::log1p(-rho) + slab, ck == 0 ? std::log(rho) : kNegInf);
    }
  }
  return acc + word_terms(doc, V, params);
}

double loglik_dm_full(const Document& doc, const Vector& m, const ModelParams& params, Representation repr) {
  check_doc(doc, params);
  check_scores(m, params);
  double acc = dirichlet_logpdf(m, params.alpha);
  if (acc == kNegInf) return acc;
  if (repr == Representation::Bag) acc += log_multinomial_coeff(doc);
  for (const auto& e : doc) {
    const double p = mixture_rate(e, m, params);
    if (p <= 0.0) return kNegInf;
    acc += static_cast<double>(e.count) * std::log(p);
  }
  return acc;
}

double loglik_dm_latent(const Document& doc, const LatentCounts& V, const Vector& m, const ModelParams& params) {
  check_doc(doc, params);
  check_scores(m, params);
  check_latent(doc, V, params);
  require(std::abs(m.sum() - 1.0) <= kNormTol, "proportions must sum to one");
  const auto c = V.component_totals();
  double acc = log_factorial(document_length(doc)) + log_gamma(params.alpha.sum());
  for (int k = 0; k < m.size(); ++k) {
    const double shape = static_cast<double>(c[static_cast<std::size_t>(k)]) + params.alpha(k);
    acc -= log_gamma(params.alpha(k));
    if (m(k) > 0.0) {
      acc += (shape - 1.0) * std::log(m(k));
    } else if (shape < 1.0) {
      throw DomainError("latent likelihood unbounded at a zero proportion");
    } else if (shape > 1.0) {
      return kNegInf;
    }
  }
  return acc + word_terms(doc, V, params);
}

double loglik_dm_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  check_doc(doc, params);
  check_latent(doc, V, params);
  const auto c = V.component_totals();
  const long L = document_length(doc);
  const double alpha_sum = params.alpha.sum();
  double acc = log_factorial(L) + log_gamma(alpha_sum) - log_gamma(static_cast<double>(L) + alpha_sum);
  for (int k = 0; k < params.num_components(); ++k)
    acc += log_gamma(static_cast<double>(c[static_cast<std::size_t>(k)]) + params.alpha(k)) - log_gamma(params.alpha(k));
  return acc + word_terms(doc, V, params);
}

double loglik_grouped(const Document& doc, const Vector& m, const ModelParams& params) {
  if (!params.groups) throw ValidationError("grouped likelihood requires a word-group partition");
  check_doc(doc, params);
  check_scores(m, params);
  double acc = dirichlet_logpdf(m, params.alpha);
  if (acc == kNegInf) return acc;
  const auto L = params.groups->totals(doc);
  for (long Lg : L) acc += log_factorial(Lg);
  for (const auto& e : doc) {
    const double p = mixture_rate(e, m, params);
    if (p <= 0.0) return kNegInf;
    acc += static_cast<double>(e.count) * std::log(p) - log_factorial(e.count);
  }
  return acc;
}

double loglik_grouped_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params) {
  if (!params.groups) throw ValidationError("grouped likelihood requires a word-group partition");
  double acc = loglik_dm_marginal(doc, V, params) - log_factorial(document_length(doc));
  for (long Lg : params.groups->totals(doc)) acc += log_factorial(Lg);
  return acc;
}

double cgp_spike_probability(double alpha, double beta, double rho) {
  if (rho <= 0.0) return 0.0;
  if (rho >= 1.0) return 1.0;
  // rho (1+b)^a / [(1-rho) b^a + rho (1+b)^a], via the odds ratio.
  const double log_odds = std::log(rho) - std::log1p(-rho) + alpha * (std::log1p(beta) - std::log(beta));
  return 1.0 / (1.0 + std::exp(-log_odds));
}

Vector posterior_mean_scores(const std::vector<long>& c, const ModelParams& params) {
  if (params.family == Family::DM)
    throw ValidationError("posterior_mean_scores is undefined for DM; use posterior_mean_proportions");
  const int K = params.num_components();
  require(static_cast<int>(c.size()) == K, "component counts must have K entries");
  Vector out(K);
  for (int k = 0; k < K; ++k) {
    const double ck = static_cast<double>(c[static_cast<std::size_t>(k)]);
    out(k) = (ck + params.alpha(k)) / (1.0 + params.beta(k));
    if (params.family == Family::CGP && c[static_cast<std::size_t>(k)] == 0)
      out(k) *= 1.0 - cgp_spike_probability(params.alpha(k), params.beta(k), params.rho(k));
  }
  return out;
}

Vector posterior_mean_proportions(const std::vector<long>& c, const Vector& alpha) {
  require(static_cast<int>(c.size()) == alpha.size(), "component counts must have K entries");
  double total = alpha.sum();
  for (long x : c) total += static_cast<double>(x);
  Vector out(alpha.size());
  for (int k = 0; k < alpha.size(); ++k) out(k) = (static_cast<double>(c[static_cast<std::size_t>(k)]) + alpha(k)) / total;
  return out;
}

}  // namespace dca
