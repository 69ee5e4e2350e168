#include "dca/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "dca/errors.hpp"
#include "dca/mathfn.hpp"

namespace dca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string id_list(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s;
}

InferenceResult infer_variational(const Document& doc, const ModelParams& params, const InferenceConfig& config) {
  InferenceResult r;
  r.method = InferenceMethod::Variational;
  VariationalState state = initial_state(doc, params);
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int cycle = 0; cycle < config.max_cycles; ++cycle) {
    auto step = e_step(doc, params, state);
    state = std::move(step.state);
    if (std::isfinite(previous) && std::abs(step.bound - previous) <= config.tol * std::abs(previous)) break;
    previous = step.bound;
  }
  state.bound = variational_bound(doc, params, state);
  r.log_prob = state.bound;
  r.scores = variational_scores(state, params.family);
  r.mean_counts = state.a - params.alpha;
  r.state = std::move(state);
  return r;
}

// log density of the score posterior given c at a point with all scores positive.
double score_posterior_logpdf(const Vector& x, const std::vector<long>& c, const ModelParams& params) {
  const int K = params.num_components();
  if (params.family == Family::DM) {
    Vector shape(K);
    for (int k = 0; k < K; ++k) shape(k) = static_cast<double>(c[static_cast<std::size_t>(k)]) + params.alpha(k);
    return dirichlet_logpdf(x, shape);
  }
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const long ck = c[static_cast<std::size_t>(k)];
    acc += gamma_logpdf(x(k), static_cast<double>(ck) + params.alpha(k), 1.0 + params.beta(k));
    if (params.family == Family::CGP && ck == 0)
      acc += std::log1p(-cgp_spike_probability(params.alpha(k), params.beta(k), params.rho(k)));
  }
  return acc;
}

double score_prior_logpdf(const Vector& x, const ModelParams& params) {
  if (params.family == Family::DM) return dirichlet_logpdf(x, params.alpha);
  double acc = 0.0;
  for (int k = 0; k < x.size(); ++k) {
    acc += gamma_logpdf(x(k), params.alpha(k), params.beta(k));
    if (params.family == Family::CGP) acc += std::log1p(-params.rho(k));
  }
  return acc;
}

// Per-document direct Gibbs with Theta frozen; Chib's identity at the
// posterior mean of the scores.
InferenceResult infer_gibbs(const Document& doc, const ModelParams& params, const InferenceConfig& config) {
  if (config.samples < 1 || config.burn_in < 0) throw ValidationError("invalid per-document chain length");
  const int K = params.num_components();
  InferenceResult r;
  r.method = InferenceMethod::Gibbs;
  Rng rng(config.seed);
  std::vector<long> c(static_cast<std::size_t>(K), 0);
  for (const auto& e : doc)
    for (long n = 0; n < e.count; ++n) ++c[static_cast<std::size_t>(std::min(K - 1, static_cast<int>(rng.uniform() * K)))];
  std::vector<std::vector<long>> kept;
  kept.reserve(static_cast<std::size_t>(config.samples));
  Vector mean = Vector::Zero(K);
  r.mean_counts = Vector::Zero(K);
  for (int cycle = 0; cycle < config.burn_in + config.samples; ++cycle) {
    const Vector scores = direct_sample_scores(c, params, rng);
    c = direct_sample_assignments(doc, scores, params, rng).component_totals();
    if (cycle < config.burn_in) continue;
    kept.push_back(c);
    if (params.family == Family::DM)
      mean += posterior_mean_proportions(c, params.alpha);
    else
      mean += posterior_mean_scores(c, params);
    for (int k = 0; k < K; ++k) r.mean_counts(k) += static_cast<double>(c[static_cast<std::size_t>(k)]);
  }
  const double n = static_cast<double>(kept.size());
  mean /= n;
  r.mean_counts /= n;
  r.scores = mean;
  std::vector<double> ordinates;
  ordinates.reserve(kept.size());
  for (const auto& ck : kept) ordinates.push_back(score_posterior_logpdf(mean, ck, params));
  const double log_posterior = log_sum_exp(ordinates) - std::log(n);
  r.log_prob = conditional_loglik(doc, mean, params) + score_prior_logpdf(mean, params) - log_posterior;
  return r;
}

// ln Gamma(sum g) - sum ln Gamma(g) - ln Gamma(sum l) + sum ln Gamma(l)
//   + sum (g - l)(digamma(l) - digamma(sum l)),  i.e. E ln p(theta) - E ln q(theta).
double dirichlet_kl_term(const std::vector<double>& prior, const std::vector<double>& post) {
  double gs = 0.0, ls = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    gs += prior[j];
    ls += post[j];
    acc += log_gamma(post[j]) - log_gamma(prior[j]);
  }
  const double dl = digamma(ls);
  for (std::size_t j = 0; j < prior.size(); ++j) acc += (prior[j] - post[j]) * (digamma(post[j]) - dl);
  return acc + log_gamma(gs) - log_gamma(ls);
}

std::vector<std::vector<int>> groups_of(const ModelParams& params) {
  const int J = params.vocab_size();
  if (!params.groups) {
    std::vector<int> all(static_cast<std::size_t>(J));
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }
  std::vector<std::vector<int>> out;
  for (int g = 0; g < params.groups->num_groups; ++g) out.push_back(params.groups->members(g));
  return out;
}

}  // namespace

std::vector<int> out_of_vocabulary(const Document& doc, int vocab_size) {
  std::vector<int> ids;
  for (const auto& e : doc)
    if (e.word < 0 || e.word >= vocab_size) ids.push_back(e.word + 1);
  return ids;
}

void check_vocabulary(const Corpus& corpus, int vocab_size) {
  std::vector<int> ids;
  for (const auto& doc : corpus.docs())
    for (int id : out_of_vocabulary(doc, vocab_size)) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty())
    throw ValidationError("word ids outside the model vocabulary of " + std::to_string(vocab_size) + ": " + id_list(ids));
}

std::string to_string(InferenceMethod m) { return m == InferenceMethod::Variational ? "variational" : "gibbs"; }

InferenceResult infer_document(const Document& doc, const ModelParams& params, InferenceMethod method,
                               const InferenceConfig& config) {
  const auto oov = out_of_vocabulary(doc, params.vocab_size());
  if (!oov.empty()) throw ValidationError("word ids outside the model vocabulary: " + id_list(oov));
  if (params.groups)
    for (const auto& e : doc)
      if (params.groups->group_of[static_cast<std::size_t>(e.word)] < 0)
        throw ValidationError("observed word " + std::to_string(e.word + 1) + " belongs to no group");
  return method == InferenceMethod::Variational ? infer_variational(doc, params, config)
                                                : infer_gibbs(doc, params, config);
}

std::string to_string(CompareCriterion c) {
  switch (c) {
    case CompareCriterion::Training: return "training";
    case CompareCriterion::HeldOut: return "heldout";
    case CompareCriterion::Evidence: return "evidence";
  }
  return "?";
}

ModelParams initial_params(const Corpus& corpus, Family family, int num_components, double alpha, double beta,
                           double rho, double gamma, std::uint64_t seed) {
  const int J = corpus.vocab_size(), K = num_components;
  if (K < 1) throw ValidationError("K must be at least 1");
  ModelParams p = ModelParams::uniform(family, J, K, alpha, beta, rho, gamma);
  p.groups = corpus.groups();
  Rng rng(mix_seed(seed, 0x1417));
  const auto freq = corpus.word_totals();
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j)
      p.theta(j, k) = (static_cast<double>(freq[static_cast<std::size_t>(j)]) + gamma) * (0.5 + rng.uniform());
  normalize_columns(p.theta, p.groups);
  p.validate();
  return p;
}

std::vector<CompareRow> compare_k(const Corpus& corpus, const std::vector<int>& ks, const CompareConfig& config) {
  if (ks.empty()) throw ValidationError("compare_k needs at least one K");
  const bool variational = config.engine == "variational";
  if (!variational && config.engine != "direct" && config.engine != "collapsed")
    throw ValidationError("unknown engine '" + config.engine + "'");
  if (config.criterion == CompareCriterion::Evidence && !variational)
    throw ValidationError("the evidence criterion needs the variational engine");

  Corpus train = corpus, test;
  if (config.criterion == CompareCriterion::HeldOut) {
    if (!(config.heldout_fraction > 0.0 && config.heldout_fraction < 1.0))
      throw ValidationError("held-out fraction must lie in (0, 1)");
    std::vector<int> order(static_cast<std::size_t>(corpus.num_docs()));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(config.seed, 0x5117));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_u64() % i)]);
    const auto held = static_cast<std::size_t>(std::lround(config.heldout_fraction * static_cast<double>(order.size())));
    if (held == 0 || held == order.size()) throw ValidationError("held-out split leaves an empty side");
    std::vector<int> test_ids(order.begin(), order.begin() + static_cast<long>(held));
    std::vector<int> train_ids(order.begin() + static_cast<long>(held), order.end());
    std::sort(test_ids.begin(), test_ids.end());
    std::sort(train_ids.begin(), train_ids.end());
    train = corpus.subset(train_ids);
    test = corpus.subset(test_ids);
  }

  std::vector<CompareRow> rows;
  for (int K : ks) {
    const ModelParams init =
        initial_params(train, config.family, K, config.alpha, config.beta, config.rho, config.gamma, config.seed);
    ModelParams fitted;
    double training = 0.0;
    if (variational) {
      const auto fit = fit_variational(train, init, config.variational);
      fitted = fit.params;
      training = config.criterion == CompareCriterion::Evidence ? variational_evidence(train, fit)
                                                                : fit.report.final_value;
    } else {
      ChainConfig chain = config.chain;
      chain.seed = config.seed;
      chain.algorithm = config.engine == "direct" ? GibbsAlgorithm::Direct : GibbsAlgorithm::Collapsed;
      const auto summary = run_chain(train, init, chain);
      fitted = summary.params;
      training = summary.report.final_value;
    }
    CompareRow row;
    row.num_components = K;
    if (config.criterion == CompareCriterion::HeldOut) {
      InferenceConfig inf = config.inference;
      double total = 0.0;
      for (int i = 0; i < test.num_docs(); ++i) {
        inf.seed = mix_seed(config.seed, static_cast<std::uint64_t>(i));
        total += infer_document(test.doc(i), fitted,
                                variational ? InferenceMethod::Variational : InferenceMethod::Gibbs, inf)
                     .log_prob;
      }
      row.nll_nats = -total;
      row.documents = test.num_docs();
    } else {
      row.nll_nats = -training;
      row.documents = train.num_docs();
    }
    row.nll_bits = row.nll_nats / std::log(2.0);
    rows.push_back(row);
  }
  return rows;
}

void write_comparison(const std::vector<CompareRow>& rows, const CompareConfig& config, std::ostream& out) {
  out << "# dca compare version=1 family=" << to_string(config.family) << " engine=" << config.engine
      << " criterion=" << to_string(config.criterion) << " seed=" << config.seed << '\n';
  out << "K\tnll_bits\tnll_nats\tdocuments\n";
  out << std::setprecision(10);
  for (const auto& r : rows) out << r.num_components << '\t' << r.nll_bits << '\t' << r.nll_nats << '\t' << r.documents << '\n';
}

double variational_evidence(const Corpus& corpus, const VariationalFit& fit, int cycles, double tol) {
  const ModelParams& params = fit.params;
  for (int j = 0; j < params.vocab_size(); ++j)
    if (!(params.gamma(j) > 0.0) && (!params.groups || params.groups->group_of[static_cast<std::size_t>(j)] >= 0))
      throw ValidationError("the evidence bound needs a proper prior (gamma > 0)");
  const int J = params.vocab_size(), K = params.num_components();
  const auto groups = groups_of(params);
  std::vector<VariationalState> states = fit.states;
  Matrix stats = fit.suffstats;
  ModelParams tilted = params;
  double previous = std::numeric_limits<double>::quiet_NaN(), total = 0.0;
  for (int cycle = 0; cycle < cycles; ++cycle) {
    double theta_terms = 0.0;
    tilted.theta = Matrix::Zero(J, K);
    std::vector<double> prior, post;
    for (const auto& members : groups) {
      for (int k = 0; k < K; ++k) {
        prior.clear();
        post.clear();
        for (int j : members) {
          prior.push_back(params.gamma(j));
          post.push_back(params.gamma(j) + stats(j, k));
        }
        const double dsum = digamma(std::accumulate(post.begin(), post.end(), 0.0));
        for (std::size_t s = 0; s < members.size(); ++s) tilted.theta(members[s], k) = std::exp(digamma(post[s]) - dsum);
        theta_terms += dirichlet_kl_term(prior, post);
      }
    }
    total = theta_terms;
    stats.setZero();
    for (int i = 0; i < corpus.num_docs(); ++i) {
      const auto& doc = corpus.doc(i);
      auto step = e_step(doc, tilted, states[static_cast<std::size_t>(i)]);
      total += step.bound;
      for (std::size_t e = 0; e < doc.size(); ++e) stats.row(doc[e].word) += step.contrib.row(static_cast<int>(e));
      states[static_cast<std::size_t>(i)] = std::move(step.state);
    }
    if (std::isfinite(previous) && std::abs(total - previous) <= tol * std::abs(previous)) break;
    previous = total;
  }
  return total;
}

void for_each_latent(const Document& doc, int num_components, const std::function<void(const LatentCounts&)>& fn) {
  const int K = num_components;
  LatentCounts V(doc.size(), K);
  // Rows are compositions of w_j into K parts, enumerated odometer-style.
  std::function<void(std::size_t, int, long)> fill = [&](std::size_t e, int k, long left) {
    if (e == doc.size()) {
      fn(V);
      return;
    }
    if (k == K - 1) {
      V.at(e, k) = left;
      fill(e + 1, 0, e + 1 < doc.size() ? doc[e + 1].count : 0);
      return;
    }
    for (long v = 0; v <= left; ++v) {
      V.at(e, k) = v;
      fill(e, k + 1, left - v);
    }
  };
  fill(0, 0, doc.empty() ? 0 : doc.front().count);
}

double brute_force_marginal(const Document& doc, const ModelParams& params) {
  const int J = params.vocab_size(), K = params.num_components();
  const long L = document_length(doc);
  if (J * K > 6 || L > 4)
    throw ValidationError("instance too large for enumeration (needs J*K <= 6 and L <= 4, got J*K=" +
                          std::to_string(J * K) + ", L=" + std::to_string(L) + ")");
  for (const auto& e : doc)
    if (e.word < 0 || e.word >= J) throw ValidationError("word id outside the model vocabulary");
  std::vector<double> terms;
  for_each_latent(doc, K, [&](const LatentCounts& V) {
    std::vector<double> c(static_cast<std::size_t>(K), 0.0);
    double acc = 0.0;
    for (std::size_t e = 0; e < doc.size(); ++e)
      for (int k = 0; k < K; ++k) {
        const double v = static_cast<double>(V.at(e, k));
        c[static_cast<std::size_t>(k)] += v;
        if (v == 0.0) continue;
        const double t = params.theta(doc[e].word, k);
        if (t <= 0.0) return;
        acc += v * std::log(t) - std::lgamma(v + 1.0);
      }
    if (params.family == Family::DM) {
      double asum = 0.0;
      for (int k = 0; k < K; ++k) asum += params.alpha(k);
      if (params.groups) {
        std::vector<double> Lg(static_cast<std::size_t>(params.groups->num_groups), 0.0);
        for (const auto& e : doc) Lg[static_cast<std::size_t>(params.groups->group_of[static_cast<std::size_t>(e.word)])] += static_cast<double>(e.count);
        for (double x : Lg) acc += std::lgamma(x + 1.0);
      } else {
        acc += std::lgamma(static_cast<double>(L) + 1.0);
      }
      acc += std::lgamma(asum) - std::lgamma(static_cast<double>(L) + asum);
      for (int k = 0; k < K; ++k)
        acc += std::lgamma(c[static_cast<std::size_t>(k)] + params.alpha(k)) - std::lgamma(params.alpha(k));
    } else {
      for (int k = 0; k < K; ++k) {
        const double a = params.alpha(k), b = params.beta(k), ck = c[static_cast<std::size_t>(k)];
        const double slab = std::lgamma(ck + a) - std::lgamma(a) + a * std::log(b) - (ck + a) * std::log(1.0 + b);
        if (params.family == Family::CGP) {
          const double rho = params.rho(k);
          if (ck > 0.0) {
            if (rho >= 1.0) return;
            acc += std::log(1.0 - rho) + slab;
          } else {
            acc += std::log(rho + (1.0 - rho) * std::exp(slab));
          }
        } else {
          acc += slab;
        }
      }
    }
    terms.push_back(acc);
  });
  if (terms.empty()) return kNegInf;
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

FeatureMatrix export_features(const ModelParams& params, const std::vector<VariationalState>& states, double threshold) {
  Matrix counts(static_cast<int>(states.size()), params.num_components());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].a.size() != params.num_components()) throw ValidationError("state has the wrong number of components");
    counts.row(static_cast<int>(i)) = (states[i].a - params.alpha).transpose();
  }
  return export_features(counts, threshold);
}

FeatureMatrix export_features(const Matrix& mean_counts, double threshold) {
  FeatureMatrix f;
  f.num_components = static_cast<int>(mean_counts.cols());
  for (int i = 0; i < mean_counts.rows(); ++i) {
    auto& row = f.rows.emplace_back();
    for (int k = 0; k < mean_counts.cols(); ++k)
      if (mean_counts(i, k) >= threshold) row.emplace_back(k, mean_counts(i, k));
  }
  return f;
}

void write_features(const FeatureMatrix& features, std::ostream& out) {
  std::size_t nnz = 0;
  for (const auto& r : features.rows) nnz += r.size();
  out << features.rows.size() << '\n' << features.num_components << '\n' << nnz << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < features.rows.size(); ++i)
    for (const auto& [k, v] : features.rows[i]) out << i + 1 << ' ' << k + 1 << ' ' << v << '\n';
}

}  // namespace dca
