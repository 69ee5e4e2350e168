#include "dca/synthetic.hpp"

#include "dca/errors.hpp"

namespace dca {

Matrix random_theta(int vocab_size, int num_components, double concentration, Rng& rng) {
  if (vocab_size < 1 || num_components < 1) throw ValidationError("Theta needs positive dimensions");
  Matrix theta(vocab_size, num_components);
  const std::vector<double> shape(static_cast<std::size_t>(vocab_size), concentration);
  for (int k = 0; k < num_components; ++k) {
    const auto col = sample_dirichlet(shape, rng);
    for (int j = 0; j < vocab_size; ++j) theta(j, k) = col[static_cast<std::size_t>(j)];
  }
  return theta;
}

SyntheticCorpus generate_corpus(const ModelParams& truth, int num_docs, double mean_length, Rng& rng) {
  truth.validate();
  const int J = truth.vocab_size(), K = truth.num_components();
  SyntheticCorpus out;
  out.scores.resize(num_docs, K);
  std::vector<Document> docs;
  docs.reserve(static_cast<std::size_t>(num_docs));
  std::vector<double> p(static_cast<std::size_t>(J));
  for (int i = 0; i < num_docs; ++i) {
    std::vector<Entry> entries;
    if (truth.family == Family::DM) {
      const std::vector<double> alpha(truth.alpha.data(), truth.alpha.data() + K);
      const auto m = sample_dirichlet(alpha, rng);
      for (int k = 0; k < K; ++k) out.scores(i, k) = m[static_cast<std::size_t>(k)];
      const Vector mix = truth.theta * out.scores.row(i).transpose();
      if (truth.groups) {
        for (int g = 0; g < truth.groups->num_groups; ++g) {
          const auto members = truth.groups->members(g);
          std::vector<double> q;
          for (int j : members) q.push_back(mix(j));
          entries.push_back({members[static_cast<std::size_t>(sample_categorical(q, rng))], 1});
        }
      } else {
        const long L = sample_poisson(mean_length, rng);
        double z = 0.0;
        for (int j = 0; j < J; ++j) z += p[static_cast<std::size_t>(j)] = mix(j);
        for (auto& x : p) x /= z;
        const auto w = sample_multinomial(L, p, rng);
        for (int j = 0; j < J; ++j) entries.push_back({j, w[static_cast<std::size_t>(j)]});
      }
    } else {
      for (int k = 0; k < K; ++k) {
        const bool spike = truth.family == Family::CGP && truth.rho(k) > 0.0 && rng.uniform() < truth.rho(k);
        out.scores(i, k) = spike ? 0.0 : sample_gamma(truth.alpha(k), truth.beta(k), rng);
      }
      const Vector mu = truth.theta * out.scores.row(i).transpose();
      for (int j = 0; j < J; ++j) entries.push_back({j, sample_poisson(mu(j), rng)});
    }
    docs.push_back(make_document(std::move(entries)));
  }
  out.corpus = Corpus(J, std::move(docs));
  if (truth.groups) out.corpus = split_groups(out.corpus, *truth.groups);
  return out;
}

}  // namespace dca
