#include "dca/nmf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dca/errors.hpp"
#include "dca/mathfn.hpp"

namespace dca {

namespace {

double reconstruction(const Matrix& theta, const Matrix& scores, int i, int j, double floor) {
  return std::max(theta.row(j).dot(scores.row(i)), floor);
}

void check_shapes(const Corpus& corpus, const Matrix& theta, const Matrix& scores) {
  if (theta.rows() != corpus.vocab_size() || scores.rows() != corpus.num_docs() || theta.cols() != scores.cols())
    throw ValidationError("factor shapes do not match the corpus");
}

}  // namespace

NmfResult fit_nmf(const Corpus& corpus, const NmfConfig& config) {
  const int I = corpus.num_docs(), J = corpus.vocab_size(), K = config.num_components;
  if (K < 1) throw ValidationError("NMF needs at least one component");
  if (config.iterations < 0) throw ValidationError("iteration count must be nonnegative");
  Rng rng(config.seed);
  Matrix theta(J, K), scores(I, K);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k) theta(j, k) = 0.5 + rng.uniform();
  for (int i = 0; i < I; ++i)
    for (int k = 0; k < K; ++k) scores(i, k) = 0.5 + rng.uniform();

  NmfResult result;
  result.report.quantity = "loglik";
  const auto start = std::chrono::steady_clock::now();
  Matrix numer(J, K);
  for (int it = 1; it <= config.iterations; ++it) {
    // Scores: l_k <- l_k sum_j (theta_jk / sum_j theta_jk) w_j / (Theta l)_j
    const Vector colsum = theta.colwise().sum().transpose();
    for (int i = 0; i < I; ++i) {
      Vector acc = Vector::Zero(K);
      for (const auto& e : corpus.doc(i)) {
        const double ratio = static_cast<double>(e.count) / reconstruction(theta, scores, i, e.word, config.floor);
        acc += ratio * theta.row(e.word).transpose();
      }
      for (int k = 0; k < K; ++k) scores(i, k) *= acc(k) / colsum(k);
    }
    // Loadings: theta_jk <- theta_jk sum_i (l_ik / sum_i l_ik) w_ij / (Theta l_i)_j
    const Vector score_sum = scores.colwise().sum().transpose();
    numer.setZero();
    for (int i = 0; i < I; ++i)
      for (const auto& e : corpus.doc(i)) {
        const double ratio = static_cast<double>(e.count) / reconstruction(theta, scores, i, e.word, config.floor);
        numer.row(e.word) += ratio * scores.row(i);
      }
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k)
        if (score_sum(k) > 0.0) theta(j, k) *= numer(j, k) / score_sum(k);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.cycles.push_back({it, nmf_loglik(corpus, theta, scores), elapsed});
  }

  // Remove the scale indeterminacy: psi_k = sum_j theta_jk.
  for (int k = 0; k < K; ++k) {
    const double psi = theta.col(k).sum();
    if (psi > 0.0) {
      theta.col(k) /= psi;
      scores.col(k) *= psi;
    }
  }
  result.theta = std::move(theta);
  result.scores = std::move(scores);
  result.report.final_value = nmf_loglik(corpus, result.theta, result.scores);
  return result;
}

double nmf_loglik(const Corpus& corpus, const Matrix& theta, const Matrix& scores) {
  check_shapes(corpus, theta, scores);
  const Vector colsum = theta.colwise().sum().transpose();
  double acc = 0.0;
  for (int i = 0; i < corpus.num_docs(); ++i) {
    acc -= scores.row(i).dot(colsum);
    for (const auto& e : corpus.doc(i)) {
      const double mu = theta.row(e.word).dot(scores.row(i));
      if (mu <= 0.0) return -std::numeric_limits<double>::infinity();
      acc += static_cast<double>(e.count) * std::log(mu) - log_factorial(e.count);
    }
  }
  return acc;
}

double nmf_divergence(const Corpus& corpus, const Matrix& theta, const Matrix& scores) {
  check_shapes(corpus, theta, scores);
  const Vector colsum = theta.colwise().sum().transpose();
  double acc = 0.0;
  for (int i = 0; i < corpus.num_docs(); ++i) {
    acc += scores.row(i).dot(colsum);
    for (const auto& e : corpus.doc(i)) {
      const double w = static_cast<double>(e.count);
      const double mu = theta.row(e.word).dot(scores.row(i));
      if (mu <= 0.0) return std::numeric_limits<double>::infinity();
      acc += w * std::log(w / mu) - w;
    }
  }
  return acc;
}

FixedPointResiduals nmf_fixed_point_residuals(const Corpus& corpus, const Matrix& theta, const Matrix& scores) {
  check_shapes(corpus, theta, scores);
  const int I = corpus.num_docs(), J = corpus.vocab_size(), K = static_cast<int>(theta.cols());
  FixedPointResiduals r;
  Matrix s = Matrix::Zero(J, K);
  for (int i = 0; i < I; ++i) {
    Vector acc = Vector::Zero(K);
    for (const auto& e : corpus.doc(i)) {
      const double mu = theta.row(e.word).dot(scores.row(i));
      const double ratio = static_cast<double>(e.count) / mu;
      acc += ratio * theta.row(e.word).transpose();
      s.row(e.word) += ratio * scores.row(i);
    }
    for (int k = 0; k < K; ++k) {
      const double l = scores(i, k);
      r.scores = std::max(r.scores, std::abs(l - l * acc(k)) / std::max(1.0, std::abs(l)));
    }
  }
  for (int k = 0; k < K; ++k) {
    double z = 0.0;
    for (int j = 0; j < J; ++j) z += theta(j, k) * s(j, k);
    for (int j = 0; j < J; ++j) {
      const double t = theta(j, k);
      const double rewritten = z > 0.0 ? t * s(j, k) / z : t;
      r.theta = std::max(r.theta, std::abs(t - rewritten) / std::max(1.0, std::abs(t)));
    }
  }
  return r;
}

}  // namespace dca
