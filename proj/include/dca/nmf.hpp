#pragma once

#include <cstdint>

#include "dca/corpus.hpp"
#include "dca/model.hpp"
#include "dca/report.hpp"

namespace dca {

struct NmfConfig {
  int num_components = 2;
  int iterations = 500;
  std::uint64_t seed = 0;
  /// Lower bound on each reconstruction sum_k theta_{j,k} l_k before dividing.
  double floor = 1e-12;
};

/// Factorization W ~ Theta L with the columns of Theta normalized and the
/// scores rescaled by the removed column sums.
struct NmfResult {
  Matrix theta;   // J x K
  Matrix scores;  // I x K
  /// Poisson log-likelihood (GP with alpha = beta = 0) after every iteration.
  FitReport report;
};

/// Multiplicative Kullback-Leibler updates: all scores, then all loadings,
/// per iteration. Initial entries are uniform on (0.5, 1.5).
NmfResult fit_nmf(const Corpus& corpus, const NmfConfig& config);

/// sum_i log p(w_i | Theta, l_i) under independent Poissons with means
/// (Theta l_i)_j. Theta need not be normalized.
double nmf_loglik(const Corpus& corpus, const Matrix& theta, const Matrix& scores);

/// Generalized KL divergence D(W || Theta L^T).
double nmf_divergence(const Corpus& corpus, const Matrix& theta, const Matrix& scores);

/// Largest violations of the normalized fixed-point rules
///   l_k   = l_k sum_j theta_{j,k} w_j / (Theta l)_j
///   theta_{j,k} proportional to theta_{j,k} sum_i l_{k,(i)} w_{j,(i)} / (Theta l_(i))_j
/// each measured relative to max(1, |value|).
struct FixedPointResiduals {
  double scores = 0.0;
  double theta = 0.0;
};
FixedPointResiduals nmf_fixed_point_residuals(const Corpus& corpus, const Matrix& theta, const Matrix& scores);

}  // namespace dca
