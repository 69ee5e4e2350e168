#pragma once

#include "dca/corpus.hpp"
#include "dca/mathfn.hpp"
#include "dca/model.hpp"

namespace dca {

/// J x K loadings with columns drawn from a symmetric Dirichlet.
Matrix random_theta(int vocab_size, int num_components, double concentration, Rng& rng);

struct SyntheticCorpus {
  Corpus corpus;
  Matrix scores;  // I x K, the l or m used for each document
};

/// Samples documents from the generative model in `truth`.
///   GP/CGP: l_k ~ Gamma(alpha_k, beta_k) (zero with probability rho_k for
///           CGP), w_j ~ Poisson((Theta l)_j).
///   DM:     L ~ Poisson(mean_length), m ~ Dirichlet(alpha), w ~ Multinomial(L, Theta m).
///   grouped DM: one token per group, drawn from that group's sub-columns.
/// mean_length is ignored except for ungrouped DM.
SyntheticCorpus generate_corpus(const ModelParams& truth, int num_docs, double mean_length, Rng& rng);

}  // namespace dca
