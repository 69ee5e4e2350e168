#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dca/corpus.hpp"
#include "dca/mathfn.hpp"
#include "dca/model.hpp"
#include "dca/report.hpp"

namespace dca {

enum class GibbsAlgorithm { Direct, Collapsed };

std::string to_string(GibbsAlgorithm a);

struct ChainConfig {
  int burn_in = 200;
  int samples = 800;
  int thin = 1;
  std::uint64_t seed = 0;
  GibbsAlgorithm algorithm = GibbsAlgorithm::Collapsed;
  /// Full recount of the collapsed totals every this many cycles (0 = never).
  int audit_every = 0;
  /// Keep the per-sample Rao-Blackwellised Theta estimates.
  bool record_theta_trace = false;

  void validate() const;
};

/// Scores given component counts: Gamma(c_k + alpha_k, 1 + beta_k) for GP,
/// Dirichlet(c + alpha) for DM, spike-or-slab for CGP components with c_k = 0.
Vector direct_sample_scores(const std::vector<long>& c, const ModelParams& params, Rng& rng);

/// V rows ~ Multinomial(w_j, l_k theta_{j,k} / sum_k l_k theta_{j,k}).
LatentCounts direct_sample_assignments(const Document& doc, const Vector& scores, const ModelParams& params, Rng& rng);

/// Columns ~ Dirichlet(gamma + totals), separately within each group.
Matrix direct_sample_theta(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups, Rng& rng);

/// E[Theta | totals]: (gamma_j + totals_{j,k}) / sum over the word's group.
Matrix posterior_mean_theta(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups);

/// log p(w | scores, theta): Poisson counts for GP/CGP, one multinomial
/// (per group when grouped) for DM.
double conditional_loglik(const Document& doc, const Vector& scores, const ModelParams& params);

/// Token-level state of the collapsed sampler. Only the word-by-component
/// totals are kept for Theta.
struct CollapsedState {
  int num_components = 0;
  int vocab_size = 0;
  std::vector<DocumentSeq> tokens;
  std::vector<std::vector<int>> assignment;
  std::vector<long> word_totals;      // J x K
  std::vector<long> group_totals;     // G x K
  std::vector<std::vector<long>> doc_totals;  // per document, K
  std::vector<int> group_of;          // word -> group row in group_totals
  std::vector<double> group_prior;    // sum of gamma over each group
  std::vector<double> scratch;

  long& word_total(int j, int k) { return word_totals[static_cast<std::size_t>(j) * num_components + k]; }
  long word_total(int j, int k) const { return word_totals[static_cast<std::size_t>(j) * num_components + k]; }
  /// Word-by-component totals as a real matrix.
  Matrix totals() const;
  /// Recounts everything from the assignments; throws InvariantError on a mismatch.
  void audit() const;
};

/// Uniformly random initial assignment of every token. Word groups come
/// from params, else from the corpus.
CollapsedState init_collapsed(const Corpus& corpus, const ModelParams& params, Rng& rng);

/// Removes the token from the counts, draws its component from the
/// collapsed conditional and adds it back. Returns the new component.
int collapsed_resample_token(CollapsedState& state, int doc, int token, const ModelParams& params, Rng& rng);

/// Unnormalized collapsed weight of component k for word j given counts
/// that exclude the token being moved.
double collapsed_weight(const ModelParams& params, double word_total, double group_prior, double group_total,
                        long doc_count, int j, int k);

/// What an observer sees after each kept cycle.
struct ChainView {
  const CollapsedState* collapsed = nullptr;       // collapsed chains
  const std::vector<LatentCounts>* latent = nullptr;  // direct chains
  const std::vector<std::vector<long>>* counts = nullptr;  // per-document c
};
using ChainObserver = std::function<void(int cycle, const ChainView& view)>;

struct ChainSummary {
  /// Model with theta set to the posterior mean.
  ModelParams params;
  Matrix theta_mean;
  Matrix scores_mean;  // I x K
  Matrix counts_mean;  // I x K, posterior mean of c
  /// One conditional log-probability estimate per cycle (burn-in included).
  FitReport report;
  std::vector<Matrix> theta_trace;
  int kept = 0;
};

ChainSummary run_chain(const Corpus& corpus, const ModelParams& init, const ChainConfig& config,
                       const ChainObserver& observer = {});

/// Independent chains on derived seeds, run `threads` at a time. Means are
/// averaged over chains, reports averaged cycle by cycle.
ChainSummary run_chains(const Corpus& corpus, const ModelParams& init, const ChainConfig& config, int chains,
                        int threads = 1);

}  // namespace dca
