#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "dca/corpus.hpp"

namespace dca {

/// J x K, row-major so that the K loadings of one word are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Family { GP, CGP, DM };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Whether a document log-likelihood counts the bag (multiset) or one
/// particular token sequence. They differ by log_multinomial_coeff.
enum class Representation { Bag, Sequence };

struct ModelParams {
  Family family = Family::DM;
  Matrix theta;   // J x K, columns normalized (per group when grouped)
  Vector alpha;   // K
  Vector beta;    // K, GP and CGP
  Vector rho;     // K, CGP
  Vector gamma;   // J, Dirichlet prior on the columns of theta
  std::optional<GroupSpec> groups;

  int num_components() const { return static_cast<int>(theta.cols()); }
  int vocab_size() const { return static_cast<int>(theta.rows()); }

  /// Throws ValidationError when shapes, supports or normalization are off.
  void validate() const;

  /// Uniform columns with broadcast priors. beta/rho ignored where unused.
  static ModelParams uniform(Family family, int vocab_size, int num_components, double alpha, double beta = 1.0,
                             double rho = 0.0, double gamma = 0.5);
};

/// Renormalizes every column of theta to sum to one (per group when given).
void normalize_columns(Matrix& theta, const std::optional<GroupSpec>& groups);

/// Latent word-to-component counts V of one document. Rows follow the
/// document's entries (observed words only).
struct LatentCounts {
  int num_components = 0;
  std::vector<long> v;  // entries x K, row-major

  LatentCounts() = default;
  LatentCounts(std::size_t entries, int K) : num_components(K), v(entries * static_cast<std::size_t>(K), 0) {}

  long& at(std::size_t entry, int k) { return v[entry * static_cast<std::size_t>(num_components) + static_cast<std::size_t>(k)]; }
  long at(std::size_t entry, int k) const { return v[entry * static_cast<std::size_t>(num_components) + static_cast<std::size_t>(k)]; }

  /// Column sums c.
  std::vector<long> component_totals() const;
  /// Throws ValidationError unless row sums reproduce the document counts.
  void check_against(const Document& doc) const;
};

/// Scores of a CGP document: each component is either at the spike (exactly
/// zero) or carries a positive slab value.
struct SpikeSlabScores {
  Vector value;
  std::vector<bool> spike;
};

// Document log-likelihoods. All return natural logs; -infinity marks an
// impossible configuration.

/// log p(w, l | GP), gamma prior on l times Poisson counts.
double loglik_gp_joint(const Document& doc, const Vector& l, const ModelParams& params,
                       Representation repr = Representation::Bag);
/// log p(w, l | CGP) with the spike as an atom of mass rho_k.
double loglik_cgp_joint(const Document& doc, const SpikeSlabScores& l, const ModelParams& params);
/// log p(V, l | GP).
double loglik_gp_latent(const Document& doc, const LatentCounts& V, const Vector& l, const ModelParams& params);
/// log p(V | GP) with l integrated out.
double loglik_gp_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params);
/// log p(V | CGP) with the spike-and-slab scores integrated out.
double loglik_cgp_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params);
/// log p(w, m | L, DM).
double loglik_dm_full(const Document& doc, const Vector& m, const ModelParams& params,
                      Representation repr = Representation::Bag);
/// log p(V, m | L, DM).
double loglik_dm_latent(const Document& doc, const LatentCounts& V, const Vector& m, const ModelParams& params);
/// log p(V | L, DM) with m integrated out.
double loglik_dm_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params);
/// log p(w, m | L_1..L_G) for the grouped DM: Dirichlet on m and one
/// multinomial per word group.
double loglik_grouped(const Document& doc, const Vector& m, const ModelParams& params);
/// log p(V | L_1..L_G) for the grouped DM with m integrated out.
double loglik_grouped_marginal(const Document& doc, const LatentCounts& V, const ModelParams& params);

/// Posterior mean of l given component counts c (GP and CGP).
Vector posterior_mean_scores(const std::vector<long>& c, const ModelParams& params);
/// Posterior mean of m given c under DM: (c_k + alpha_k) / (L + sum alpha).
Vector posterior_mean_proportions(const std::vector<long>& c, const Vector& alpha);
/// Posterior probability that a CGP component with c_k = 0 sits at the spike.
double cgp_spike_probability(double alpha, double beta, double rho);

/// log of the Dirichlet density at a point of the simplex.
double dirichlet_logpdf(const Vector& m, const Vector& alpha);

}  // namespace dca
