#include "dca/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "dca/errors.hpp"
#include "parallel.hpp"

namespace dca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::optional<GroupSpec> effective_groups(const Corpus& corpus, const ModelParams& params) {
  if (params.groups) return params.groups;
  return corpus.groups();
}

// Word ids of each group; one group holding every word when ungrouped.
std::vector<std::vector<int>> group_members(int J, const std::optional<GroupSpec>& groups) {
  if (!groups) {
    std::vector<int> all(static_cast<std::size_t>(J));
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(groups->num_groups));
  for (int j = 0; j < J; ++j) {
    const int g = groups->group_of[static_cast<std::size_t>(j)];
    if (g >= 0) out[static_cast<std::size_t>(g)].push_back(j);
  }
  return out;
}

void check_compatible(const Corpus& corpus, const ModelParams& params) {
  if (corpus.vocab_size() != params.vocab_size())
    throw ValidationError("corpus vocabulary (" + std::to_string(corpus.vocab_size()) + ") differs from model (" +
                          std::to_string(params.vocab_size()) + ")");
}

Vector mean_scores(const std::vector<long>& c, const ModelParams& params) {
  return params.family == Family::DM ? posterior_mean_proportions(c, params.alpha) : posterior_mean_scores(c, params);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(GibbsAlgorithm a) { return a == GibbsAlgorithm::Direct ? "direct" : "collapsed"; }

void ChainConfig::validate() const {
  if (burn_in < 0) throw ValidationError("burn-in must be nonnegative");
  if (samples < 1) throw ValidationError("at least one kept sample is required");
  if (thin < 1) throw ValidationError("thinning interval must be at least 1");
  if (audit_every < 0) throw ValidationError("audit interval must be nonnegative");
}

Vector direct_sample_scores(const std::vector<long>& c, const ModelParams& params, Rng& rng) {
  const int K = params.num_components();
  if (static_cast<int>(c.size()) != K) throw ValidationError("component counts must have K entries");
  Vector out(K);
  if (params.family == Family::DM) {
    std::vector<double> shape(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) shape[static_cast<std::size_t>(k)] = static_cast<double>(c[static_cast<std::size_t>(k)]) + params.alpha(k);
    const auto m = sample_dirichlet(shape, rng);
    for (int k = 0; k < K; ++k) out(k) = m[static_cast<std::size_t>(k)];
    return out;
  }
  for (int k = 0; k < K; ++k) {
    const long ck = c[static_cast<std::size_t>(k)];
    if (params.family == Family::CGP && ck == 0 && params.rho(k) > 0.0) {
      const double spike = cgp_spike_probability(params.alpha(k), params.beta(k), params.rho(k));
      if (rng.uniform() < spike) {
        out(k) = 0.0;
        continue;
      }
    }
    out(k) = sample_gamma(static_cast<double>(ck) + params.alpha(k), 1.0 + params.beta(k), rng);
  }
  return out;
}

LatentCounts direct_sample_assignments(const Document& doc, const Vector& scores, const ModelParams& params, Rng& rng) {
  const int K = params.num_components();
  if (scores.size() != K) throw ValidationError("scores must have K entries");
  LatentCounts V(doc.size(), K);
  std::vector<double> p(static_cast<std::size_t>(K));
  for (std::size_t e = 0; e < doc.size(); ++e) {
    const int j = doc[e].word;
    if (j < 0 || j >= params.vocab_size()) throw ValidationError("word id outside the model vocabulary");
    double total = 0.0;
    for (int k = 0; k < K; ++k) total += p[static_cast<std::size_t>(k)] = scores(k) * params.theta(j, k);
    if (!(total > 0.0))
      throw DegenerateDocument(j, "word " + std::to_string(j + 1) + " has zero probability under every component");
    for (auto& x : p) x /= total;
    const auto draw = sample_multinomial(doc[e].count, p, rng);
    for (int k = 0; k < K; ++k) V.at(e, k) = draw[static_cast<std::size_t>(k)];
  }
  return V;
}

Matrix direct_sample_theta(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups, Rng& rng) {
  const int J = static_cast<int>(totals.rows()), K = static_cast<int>(totals.cols());
  if (gamma.size() != J) throw ValidationError("gamma must have J entries");
  Matrix theta = Matrix::Zero(J, K);
  std::vector<double> shape;
  for (const auto& members : group_members(J, groups)) {
    shape.resize(members.size());
    for (int k = 0; k < K; ++k) {
      for (std::size_t s = 0; s < members.size(); ++s) {
        const double t = totals(members[s], k);
        if (t < 0.0) throw ValidationError("totals must be nonnegative");
        shape[s] = gamma(members[s]) + t;
      }
      const auto draw = sample_dirichlet(shape, rng);
      for (std::size_t s = 0; s < members.size(); ++s) theta(members[s], k) = draw[s];
    }
  }
  return theta;
}

Matrix posterior_mean_theta(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups) {
  const int J = static_cast<int>(totals.rows()), K = static_cast<int>(totals.cols());
  if (gamma.size() != J) throw ValidationError("gamma must have J entries");
  Matrix theta = Matrix::Zero(J, K);
  for (const auto& members : group_members(J, groups)) {
    for (int k = 0; k < K; ++k) {
      double z = 0.0;
      for (int j : members) z += theta(j, k) = gamma(j) + totals(j, k);
      if (!(z > 0.0)) throw ValidationError("posterior Theta column has zero mass");
      for (int j : members) theta(j, k) /= z;
    }
  }
  return theta;
}

double conditional_loglik(const Document& doc, const Vector& scores, const ModelParams& params) {
  double acc = 0.0;
  if (params.family == Family::DM) {
    if (params.groups) {
      for (long Lg : params.groups->totals(doc)) acc += log_factorial(Lg);
      for (const auto& e : doc) acc -= log_factorial(e.count);
    } else {
      acc = log_multinomial_coeff(doc);
    }
  } else {
    acc = -scores.sum();
    for (const auto& e : doc) acc -= log_factorial(e.count);
  }
  for (const auto& e : doc) {
    const double mu = params.theta.row(e.word).dot(scores);
    if (!(mu > 0.0)) return kNegInf;
    acc += static_cast<double>(e.count) * std::log(mu);
  }
  return acc;
}

Matrix CollapsedState::totals() const {
  Matrix out(vocab_size, num_components);
  for (int j = 0; j < vocab_size; ++j)
    for (int k = 0; k < num_components; ++k) out(j, k) = static_cast<double>(word_total(j, k));
  return out;
}

void CollapsedState::audit() const {
  const int K = num_components;
  std::vector<long> words(word_totals.size(), 0), groups(group_totals.size(), 0);
  for (std::size_t d = 0; d < tokens.size(); ++d) {
    std::vector<long> c(static_cast<std::size_t>(K), 0);
    for (std::size_t t = 0; t < tokens[d].size(); ++t) {
      const int j = tokens[d][t], k = assignment[d][t];
      if (k < 0 || k >= K) throw InvariantError("token assigned to a nonexistent component");
      ++words[static_cast<std::size_t>(j) * K + k];
      ++groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(j)]) * K + k];
      ++c[static_cast<std::size_t>(k)];
    }
    if (c != doc_totals[d]) throw InvariantError("document " + std::to_string(d + 1) + " component counts drifted");
  }
  if (words != word_totals) throw InvariantError("word-component totals drifted from the assignments");
  if (groups != group_totals) throw InvariantError("group-component totals drifted from the assignments");
}

CollapsedState init_collapsed(const Corpus& corpus, const ModelParams& params, Rng& rng) {
  check_compatible(corpus, params);
  const int J = corpus.vocab_size(), K = params.num_components();
  const auto groups = effective_groups(corpus, params);
  CollapsedState s;
  s.num_components = K;
  s.vocab_size = J;
  const int G = groups ? groups->num_groups : 1;
  s.group_of = groups ? groups->group_of : std::vector<int>(static_cast<std::size_t>(J), 0);
  s.group_prior.assign(static_cast<std::size_t>(G), 0.0);
  for (int j = 0; j < J; ++j) {
    const int g = s.group_of[static_cast<std::size_t>(j)];
    if (g >= 0) s.group_prior[static_cast<std::size_t>(g)] += params.gamma(j);
  }
  s.word_totals.assign(static_cast<std::size_t>(J) * K, 0);
  s.group_totals.assign(static_cast<std::size_t>(G) * K, 0);
  s.scratch.assign(static_cast<std::size_t>(K), 0.0);
  for (const auto& doc : corpus.docs()) {
    s.tokens.push_back(sequence_of(doc));
    auto& assign = s.assignment.emplace_back();
    auto& c = s.doc_totals.emplace_back(static_cast<std::size_t>(K), 0);
    for (int j : s.tokens.back()) {
      const int g = s.group_of[static_cast<std::size_t>(j)];
      if (g < 0) throw ValidationError("observed word " + std::to_string(j + 1) + " belongs to no group");
      const int k = std::min(K - 1, static_cast<int>(rng.uniform() * K));
      assign.push_back(k);
      ++s.word_total(j, k);
      ++s.group_totals[static_cast<std::size_t>(g) * K + k];
      ++c[static_cast<std::size_t>(k)];
    }
  }
  return s;
}

double collapsed_weight(const ModelParams& params, double word_total, double group_prior, double group_total,
                        long doc_count, int j, int k) {
  const double theta_part = (params.gamma(j) + word_total) / (group_prior + group_total);
  const double ck = static_cast<double>(doc_count);
  switch (params.family) {
    case Family::DM:
      return theta_part * (ck + params.alpha(k));
    case Family::GP:
      return theta_part * (ck + params.alpha(k)) / (1.0 + params.beta(k));
    case Family::CGP:
      if (doc_count > 0 || params.rho(k) <= 0.0) return theta_part * (ck + params.alpha(k)) / (1.0 + params.beta(k));
      return theta_part * params.alpha(k) / (1.0 + params.beta(k)) *
             (1.0 - cgp_spike_probability(params.alpha(k), params.beta(k), params.rho(k)));
  }
  return 0.0;
}

int collapsed_resample_token(CollapsedState& s, int doc, int token, const ModelParams& params, Rng& rng) {
  const int K = s.num_components;
  const auto d = static_cast<std::size_t>(doc);
  const auto t = static_cast<std::size_t>(token);
  const int j = s.tokens[d][t];
  const int g = s.group_of[static_cast<std::size_t>(j)];
  long* group = s.group_totals.data() + static_cast<std::size_t>(g) * K;
  auto& c = s.doc_totals[d];
  const int old = s.assignment[d][t];
  if (--s.word_total(j, old) < 0 || --group[old] < 0 || --c[static_cast<std::size_t>(old)] < 0)
    throw InvariantError("negative count after removing a token from component " + std::to_string(old + 1));
  for (int k = 0; k < K; ++k)
    s.scratch[static_cast<std::size_t>(k)] =
        collapsed_weight(params, static_cast<double>(s.word_total(j, k)), s.group_prior[static_cast<std::size_t>(g)],
                         static_cast<double>(group[k]), c[static_cast<std::size_t>(k)], j, k);
  const int k = sample_categorical(s.scratch, rng);
  s.assignment[d][t] = k;
  ++s.word_total(j, k);
  ++group[k];
  ++c[static_cast<std::size_t>(k)];
  return k;
}

ChainSummary run_chain(const Corpus& corpus, const ModelParams& init, const ChainConfig& config,
                       const ChainObserver& observer) {
  config.validate();
  init.validate();
  check_compatible(corpus, init);
  const int I = corpus.num_docs(), J = corpus.vocab_size(), K = init.num_components();

  ModelParams params = init;
  if (!params.groups && corpus.groups()) {
    params.groups = corpus.groups();
    normalize_columns(params.theta, params.groups);
    params.validate();
  }

  Rng rng(config.seed);
  Rng report_rng = Rng::derive(config.seed, 1);
  ChainSummary out;
  out.theta_mean = Matrix::Zero(J, K);
  out.scores_mean = Matrix::Zero(I, K);
  out.counts_mean = Matrix::Zero(I, K);
  out.report.quantity = "loglik_estimate";

  const int total_cycles = config.burn_in + config.samples * config.thin;
  const auto start = std::chrono::steady_clock::now();
  const bool direct = config.algorithm == GibbsAlgorithm::Direct;

  std::vector<std::vector<long>> counts;
  std::vector<LatentCounts> latent;
  CollapsedState state;
  Matrix totals(J, K);
  if (direct) {
    for (const auto& doc : corpus.docs()) {
      auto& c = counts.emplace_back(static_cast<std::size_t>(K), 0);
      for (const auto& e : doc)
        for (long n = 0; n < e.count; ++n) ++c[static_cast<std::size_t>(std::min(K - 1, static_cast<int>(rng.uniform() * K)))];
    }
    latent.resize(static_cast<std::size_t>(I));
  } else {
    state = init_collapsed(corpus, params, rng);
  }

  for (int cycle = 1; cycle <= total_cycles; ++cycle) {
    double logp = 0.0;
    if (direct) {
      totals.setZero();
      for (int i = 0; i < I; ++i) {
        const auto& doc = corpus.doc(i);
        auto& c = counts[static_cast<std::size_t>(i)];
        const Vector scores = direct_sample_scores(c, params, rng);
        auto& V = latent[static_cast<std::size_t>(i)] = direct_sample_assignments(doc, scores, params, rng);
        c = V.component_totals();
        for (std::size_t e = 0; e < doc.size(); ++e)
          for (int k = 0; k < K; ++k) totals(doc[e].word, k) += static_cast<double>(V.at(e, k));
        logp += conditional_loglik(doc, scores, params);
      }
      params.theta = direct_sample_theta(totals, params.gamma, params.groups, rng);
    } else {
      for (int i = 0; i < I; ++i)
        for (int t = 0; t < static_cast<int>(state.tokens[static_cast<std::size_t>(i)].size()); ++t)
          collapsed_resample_token(state, i, t, params, rng);
      if (config.audit_every > 0 && cycle % config.audit_every == 0) state.audit();
      totals = state.totals();
      ModelParams sampled = params;
      sampled.theta = direct_sample_theta(totals, params.gamma, params.groups, report_rng);
      for (int i = 0; i < I; ++i) {
        const Vector scores = direct_sample_scores(state.doc_totals[static_cast<std::size_t>(i)], sampled, report_rng);
        logp += conditional_loglik(corpus.doc(i), scores, sampled);
      }
    }
    out.report.cycles.push_back({cycle, logp, seconds_since(start)});

    if (cycle <= config.burn_in || (cycle - config.burn_in) % config.thin != 0) continue;
    const auto& c_now = direct ? counts : state.doc_totals;
    const Matrix theta_hat = posterior_mean_theta(totals, params.gamma, params.groups);
    out.theta_mean += theta_hat;
    if (config.record_theta_trace) out.theta_trace.push_back(theta_hat);
    for (int i = 0; i < I; ++i) {
      const auto& c = c_now[static_cast<std::size_t>(i)];
      out.scores_mean.row(i) += mean_scores(c, params).transpose();
      for (int k = 0; k < K; ++k) out.counts_mean(i, k) += static_cast<double>(c[static_cast<std::size_t>(k)]);
    }
    ++out.kept;
    out.report.final_value = (out.kept == 1 ? 0.0 : out.report.final_value) + logp;
    if (observer) {
      ChainView view;
      view.counts = &c_now;
      if (direct)
        view.latent = &latent;
      else
        view.collapsed = &state;
      observer(cycle, view);
    }
  }
  if (!direct && config.audit_every > 0) state.audit();

  const double n = static_cast<double>(out.kept);
  out.theta_mean /= n;
  out.scores_mean /= n;
  out.counts_mean /= n;
  out.report.final_value /= n;
  out.report.converged = true;
  out.params = params;
  out.params.theta = out.theta_mean;
  normalize_columns(out.params.theta, out.params.groups);
  return out;
}

namespace {

// Permutation of b's components that best matches a's columns (L1 distance).
std::vector<int> align_columns(const Matrix& a, const Matrix& b) {
  const int K = static_cast<int>(a.cols());
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  auto cost = [&](const std::vector<int>& p) {
    double c = 0.0;
    for (int k = 0; k < K; ++k) c += (a.col(k) - b.col(p[static_cast<std::size_t>(k)])).cwiseAbs().sum();
    return c;
  };
  if (K <= 7) {
    std::vector<int> best = perm;
    double best_cost = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double c = cost(perm);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    }
    return best;
  }
  std::vector<bool> used_a(static_cast<std::size_t>(K)), used_b(static_cast<std::size_t>(K));
  for (int step = 0; step < K; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int ba = 0, bb = 0;
    for (int x = 0; x < K; ++x)
      for (int y = 0; y < K; ++y) {
        if (used_a[static_cast<std::size_t>(x)] || used_b[static_cast<std::size_t>(y)]) continue;
        const double c = (a.col(x) - b.col(y)).cwiseAbs().sum();
        if (c < best) best = c, ba = x, bb = y;
      }
    used_a[static_cast<std::size_t>(ba)] = used_b[static_cast<std::size_t>(bb)] = true;
    perm[static_cast<std::size_t>(ba)] = bb;
  }
  return perm;
}

Matrix permute_columns(const Matrix& m, const std::vector<int>& perm) {
  Matrix out(m.rows(), m.cols());
  for (int k = 0; k < m.cols(); ++k) out.col(k) = m.col(perm[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace

ChainSummary run_chains(const Corpus& corpus, const ModelParams& init, const ChainConfig& config, int chains,
                        int threads) {
  if (chains < 1) throw ValidationError("at least one chain is required");
  if (chains == 1) return run_chain(corpus, init, config);
  std::vector<ChainSummary> runs(static_cast<std::size_t>(chains));
  detail::parallel_for(chains, threads, [&](int c) {
    ChainConfig cfg = config;
    cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(c));
    runs[static_cast<std::size_t>(c)] = run_chain(corpus, init, cfg);
  });
  ChainSummary out = runs.front();
  for (int c = 1; c < chains; ++c) {
    const auto& r = runs[static_cast<std::size_t>(c)];
    const auto perm = align_columns(runs.front().theta_mean, r.theta_mean);
    out.theta_mean += permute_columns(r.theta_mean, perm);
    out.scores_mean += permute_columns(r.scores_mean, perm);
    out.counts_mean += permute_columns(r.counts_mean, perm);
    for (const auto& t : r.theta_trace) out.theta_trace.push_back(permute_columns(t, perm));
    for (std::size_t i = 0; i < out.report.cycles.size(); ++i) {
      out.report.cycles[i].value += r.report.cycles[i].value;
      out.report.cycles[i].wall_seconds = std::max(out.report.cycles[i].wall_seconds, r.report.cycles[i].wall_seconds);
    }
    out.report.final_value += r.report.final_value;
    out.kept += r.kept;
  }
  const double n = static_cast<double>(chains);
  out.theta_mean /= n;
  out.scores_mean /= n;
  out.counts_mean /= n;
  for (auto& rec : out.report.cycles) rec.value /= n;
  out.report.final_value /= n;
  out.params.theta = out.theta_mean;
  normalize_columns(out.params.theta, out.params.groups);
  return out;
}

}  // namespace dca
