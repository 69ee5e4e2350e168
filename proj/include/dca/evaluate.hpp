#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dca/corpus.hpp"
#include "dca/gibbs.hpp"
#include "dca/model.hpp"
#include "dca/variational.hpp"

namespace dca {

/// Word ids (1-based) of `doc` that the model does not know.
std::vector<int> out_of_vocabulary(const Document& doc, int vocab_size);
/// Throws ValidationError listing every unknown id in the corpus.
void check_vocabulary(const Corpus& corpus, int vocab_size);

enum class InferenceMethod { Variational, Gibbs };

std::string to_string(InferenceMethod m);

struct InferenceConfig {
  int max_cycles = 1000;
  /// Relative change of the bound that ends the per-document E-step.
  double tol = 1e-12;
  int burn_in = 200;
  int samples = 2000;
  std::uint64_t seed = 0;
};

struct InferenceResult {
  Vector scores;
  /// Variational: lower bound on log p(w | Theta). Gibbs: Chib estimate of it.
  double log_prob = 0.0;
  InferenceMethod method = InferenceMethod::Variational;
  VariationalState state;  // variational only
  Vector mean_counts;      // posterior mean of c
};

/// Scores and log-probability of one new document with Theta held fixed.
InferenceResult infer_document(const Document& doc, const ModelParams& params, InferenceMethod method,
                               const InferenceConfig& config = {});

enum class CompareCriterion {
  /// Final training bound (variational) or mean sampler estimate (Gibbs).
  Training,
  /// Fit on a training split, score the held-out documents.
  HeldOut,
  /// Variational bound with Theta integrated against a Dirichlet surrogate.
  Evidence
};

std::string to_string(CompareCriterion c);

struct CompareConfig {
  Family family = Family::DM;
  /// "variational", "direct" or "collapsed".
  std::string engine = "variational";
  double alpha = 0.1;
  double beta = 1.0;
  double rho = 0.0;
  double gamma = 0.5;
  std::uint64_t seed = 0;
  VariationalConfig variational;
  ChainConfig chain;
  CompareCriterion criterion = CompareCriterion::Training;
  /// Fraction of documents held out for CompareCriterion::HeldOut.
  double heldout_fraction = 0.2;
  InferenceConfig inference;
};

struct CompareRow {
  int num_components = 0;
  double nll_nats = 0.0;
  double nll_bits = 0.0;
  int documents = 0;
};

/// Fits every K with the same seed and configuration and reports the
/// negative log-probability of the scored documents.
std::vector<CompareRow> compare_k(const Corpus& corpus, const std::vector<int>& ks, const CompareConfig& config);
void write_comparison(const std::vector<CompareRow>& rows, const CompareConfig& config, std::ostream& out);

/// Starting parameters shared by the engines: columns proportional to
/// (word frequency + gamma) jittered by U(0.5, 1.5) factors.
ModelParams initial_params(const Corpus& corpus, Family family, int num_components, double alpha, double beta,
                           double rho, double gamma, std::uint64_t seed);

/// Full variational treatment of Theta: q(theta_k) = Dirichlet(gamma +
/// expected counts), alternated with document updates, starting from a
/// finished point-estimate fit. Returns the evidence lower bound.
double variational_evidence(const Corpus& corpus, const VariationalFit& fit, int cycles = 50, double tol = 1e-8);

/// Calls fn for every latent table V whose rows sum to the document counts.
void for_each_latent(const Document& doc, int num_components, const std::function<void(const LatentCounts&)>& fn);

/// Exact log p(w | params) by enumeration of V. Requires J*K <= 6 and L <= 4.
double brute_force_marginal(const Document& doc, const ModelParams& params);

/// Expected component-generated word counts per document, as a corpus over
/// K "words" with real counts. Entries below `threshold` are dropped.
struct FeatureMatrix {
  int num_components = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
};
/// Variational: E[c_k] = a_k - alpha_k.
FeatureMatrix export_features(const ModelParams& params, const std::vector<VariationalState>& states,
                              double threshold = 0.01);
/// Sampler: posterior mean counts (I x K).
FeatureMatrix export_features(const Matrix& mean_counts, double threshold = 0.01);
/// "I", "K", "NNZ" header lines then 1-based "doc component value" triplets.
void write_features(const FeatureMatrix& features, std::ostream& out);

}  // namespace dca
