#include "dca/variational.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dca/errors.hpp"
#include "dca/mathfn.hpp"
#include "parallel.hpp"

namespace dca {

namespace {

constexpr int kBlockDocs = 64;

struct Expectations {
  Vector elog;    // E[ln l_k] or E[ln m_k]
  Vector weight;  // exp(elog_k - shift)
  double shift = 0.0;
};

Expectations expectations(const VariationalState& s, const ModelParams& params) {
  const int K = params.num_components();
  if (s.a.size() != K) throw ValidationError("variational state has the wrong number of components");
  Expectations ex;
  ex.elog.resize(K);
  if (params.family == Family::DM) {
    const double total = digamma(s.a.sum());
    for (int k = 0; k < K; ++k) ex.elog(k) = digamma(s.a(k)) - total;
  } else {
    if (s.b.size() != K) throw ValidationError("GP variational state needs b");
    for (int k = 0; k < K; ++k) ex.elog(k) = digamma(s.a(k)) - std::log(s.b(k));
  }
  ex.shift = ex.elog.maxCoeff();
  ex.weight = (ex.elog.array() - ex.shift).exp().matrix();
  return ex;
}

// Fills n_{j,k} for one observed word into `n` and returns ln Z_j.
double word_responsibility(const ModelParams& params, const Expectations& ex, int word, double* n) {
  const int K = params.num_components();
  const auto row = params.theta.row(word);
  double z = 0.0;
  for (int k = 0; k < K; ++k) {
    n[k] = row(k) * ex.weight(k);
    z += n[k];
  }
  if (z > 0.0 && std::isfinite(z)) {
    for (int k = 0; k < K; ++k) n[k] /= z;
    return std::log(z) + ex.shift;
  }
  // Underflow of the shifted weights: redo in log space.
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    n[k] = row(k) > 0.0 ? std::log(row(k)) + ex.elog(k) : -std::numeric_limits<double>::infinity();
    top = std::max(top, n[k]);
  }
  if (!std::isfinite(top))
    throw DegenerateDocument(word, "word " + std::to_string(word + 1) + " has zero weight under every component");
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    n[k] = std::exp(n[k] - top);
    acc += n[k];
  }
  for (int k = 0; k < K; ++k) n[k] /= acc;
  return top + std::log(acc);
}

// Sum over observed words of w_j ln Z_j. Adds w_j n_{j,k} to `expected` (K)
// and, when given, writes them to `contrib` (entries x K).
double responsibilities(const Document& doc, const ModelParams& params, const Expectations& ex, Vector& expected,
                        Matrix* contrib) {
  const int K = params.num_components();
  std::vector<double> n(static_cast<std::size_t>(K));
  double acc = 0.0;
  expected.setZero(K);
  for (std::size_t e = 0; e < doc.size(); ++e) {
    const double w = static_cast<double>(doc[e].count);
    acc += w * word_responsibility(params, ex, doc[e].word, n.data());
    for (int k = 0; k < K; ++k) {
      expected(k) += w * n[static_cast<std::size_t>(k)];
      if (contrib) (*contrib)(static_cast<int>(e), k) = w * n[static_cast<std::size_t>(k)];
    }
  }
  return acc;
}

double log_coefficient(const Document& doc, const ModelParams& params) {
  if (params.family != Family::DM) {
    double acc = 0.0;
    for (const auto& e : doc) acc -= log_factorial(e.count);
    return acc;
  }
  if (!params.groups) return log_multinomial_coeff(doc);
  double acc = 0.0;
  for (long Lg : params.groups->totals(doc)) acc += log_factorial(Lg);
  for (const auto& e : doc) acc -= log_factorial(e.count);
  return acc;
}

// Everything in the bound except sum_j w_j ln Z_j.
double bound_prior_terms(const Document& doc, const ModelParams& params, const VariationalState& s,
                         const Expectations& ex) {
  const int K = params.num_components();
  double acc = log_coefficient(doc, params);
  if (params.family == Family::DM) {
    acc -= log_gamma(s.a.sum()) - log_gamma(params.alpha.sum());
    for (int k = 0; k < K; ++k) acc -= log_gamma(params.alpha(k)) - log_gamma(s.a(k));
  } else {
    for (int k = 0; k < K; ++k)
      acc -= log_gamma(params.alpha(k)) + s.a(k) * std::log(s.b(k)) - log_gamma(s.a(k)) -
             params.alpha(k) * std::log(params.beta(k));
  }
  for (int k = 0; k < K; ++k) acc += (params.alpha(k) - s.a(k)) * ex.elog(k);
  return acc;
}

void check_family(const ModelParams& params) {
  if (params.family == Family::CGP) throw ValidationError("variational inference is not available for CGP");
}

// Rewrites `state` in place and returns the bound; contributions go to `contrib`.
double update_document(const Document& doc, const ModelParams& params, VariationalState& state, Matrix* contrib) {
  const int K = params.num_components();
  Vector expected(K);
  responsibilities(doc, params, expectations(state, params), expected, nullptr);
  state.a = params.alpha + expected;
  if (params.family != Family::DM) state.b = (params.beta.array() + 1.0).matrix();
  const auto ex = expectations(state, params);
  const double words = responsibilities(doc, params, ex, expected, contrib);
  state.bound = bound_prior_terms(doc, params, state, ex) + words;
  return state.bound;
}

struct BlockResult {
  std::vector<int> words;  // first-touch order
  std::vector<double> values;
  double bound = 0.0;
};

}  // namespace

VariationalState initial_state(const Document& doc, const ModelParams& params) {
  check_family(params);
  const int K = params.num_components();
  VariationalState s;
  if (params.family == Family::DM) {
    s.a = Vector::Constant(K, 0.5);
  } else {
    const double L = static_cast<double>(document_length(doc));
    s.a = Vector::Constant(K, (params.alpha.sum() + L) / K);
    s.b = (params.beta.array() + 1.0).matrix();
  }
  return s;
}

EStepResult e_step_gp(const Document& doc, const ModelParams& params, const VariationalState& state) {
  if (params.family != Family::GP) throw ValidationError("e_step_gp requires the GP family");
  EStepResult r{state, Matrix(static_cast<int>(doc.size()), params.num_components()), 0.0};
  r.bound = update_document(doc, params, r.state, &r.contrib);
  return r;
}

EStepResult e_step_dm(const Document& doc, const ModelParams& params, const VariationalState& state) {
  if (params.family != Family::DM) throw ValidationError("e_step_dm requires the DM family");
  EStepResult r{state, Matrix(static_cast<int>(doc.size()), params.num_components()), 0.0};
  r.bound = update_document(doc, params, r.state, &r.contrib);
  return r;
}

EStepResult e_step(const Document& doc, const ModelParams& params, const VariationalState& state) {
  check_family(params);
  return params.family == Family::DM ? e_step_dm(doc, params, state) : e_step_gp(doc, params, state);
}

double bound_gp(const Document& doc, const ModelParams& params, const VariationalState& state) {
  if (params.family != Family::GP) throw ValidationError("bound_gp requires the GP family");
  const auto ex = expectations(state, params);
  Vector expected(params.num_components());
  return bound_prior_terms(doc, params, state, ex) + responsibilities(doc, params, ex, expected, nullptr);
}

double bound_dm(const Document& doc, const ModelParams& params, const VariationalState& state) {
  if (params.family != Family::DM) throw ValidationError("bound_dm requires the DM family");
  const auto ex = expectations(state, params);
  Vector expected(params.num_components());
  return bound_prior_terms(doc, params, state, ex) + responsibilities(doc, params, ex, expected, nullptr);
}

double variational_bound(const Document& doc, const ModelParams& params, const VariationalState& state) {
  check_family(params);
  return params.family == Family::DM ? bound_dm(doc, params, state) : bound_gp(doc, params, state);
}

Matrix m_step(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups) {
  if (totals.rows() != gamma.size()) throw ValidationError("m_step: totals and gamma disagree on J");
  Matrix theta = totals;
  for (int j = 0; j < theta.rows(); ++j) {
    if (gamma(j) < 0.0) throw ValidationError("m_step: gamma must be nonnegative");
    for (int k = 0; k < theta.cols(); ++k) {
      if (totals(j, k) < 0.0) throw ValidationError("m_step: totals must be nonnegative");
      theta(j, k) += gamma(j);
    }
  }
  normalize_columns(theta, groups);
  return theta;
}

Vector variational_scores(const VariationalState& state, Family family) {
  if (family == Family::DM) return state.a / state.a.sum();
  return (state.a.array() / state.b.array()).matrix();
}

VariationalFit fit_variational(const Corpus& corpus, const ModelParams& init, const VariationalConfig& config,
                               std::vector<VariationalState> states) {
  check_family(init);
  init.validate();
  if (corpus.vocab_size() != init.vocab_size())
    throw ValidationError("corpus vocabulary (" + std::to_string(corpus.vocab_size()) + ") differs from model (" +
                          std::to_string(init.vocab_size()) + ")");
  if (config.max_cycles < 1) throw ValidationError("max_cycles must be at least 1");
  const int I = corpus.num_docs();
  const int J = corpus.vocab_size();
  const int K = init.num_components();

  VariationalFit fit;
  fit.params = init;
  if (corpus.groups() && !fit.params.groups) {
    fit.params.groups = corpus.groups();
    normalize_columns(fit.params.theta, fit.params.groups);
    fit.params.validate();
  }
  if (states.empty()) {
    states.reserve(static_cast<std::size_t>(I));
    for (const auto& d : corpus.docs()) states.push_back(initial_state(d, fit.params));
  } else if (static_cast<int>(states.size()) != I) {
    throw ValidationError("resume states do not match the number of documents");
  }
  fit.report.quantity = "bound";

  const int num_blocks = (I + kBlockDocs - 1) / kBlockDocs;
  const int wave = std::max(1, config.threads) * 4;
  const auto start = std::chrono::steady_clock::now();
  double previous = std::numeric_limits<double>::quiet_NaN();
  Matrix stats(J, K);

  for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
    stats.setZero();
    double total = 0.0;
    double prior_term = 0.0;
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k)
        if (fit.params.gamma(j) > 0.0 && fit.params.theta(j, k) > 0.0)
          prior_term += fit.params.gamma(j) * std::log(fit.params.theta(j, k));
    for (int first = 0; first < num_blocks; first += wave) {
      const int count = std::min(wave, num_blocks - first);
      std::vector<BlockResult> blocks(static_cast<std::size_t>(count));
      detail::parallel_for(count, config.threads, [&](int t) {
        const int b = first + t;
        auto& out = blocks[static_cast<std::size_t>(t)];
        Matrix contrib;
        const int lo = b * kBlockDocs, hi = std::min(I, lo + kBlockDocs);
        std::unordered_map<int, int> slots;
        for (int i = lo; i < hi; ++i) {
          const auto& doc = corpus.doc(i);
          contrib.resize(static_cast<int>(doc.size()), K);
          out.bound += update_document(doc, fit.params, states[static_cast<std::size_t>(i)], &contrib);
          for (std::size_t e = 0; e < doc.size(); ++e) {
            auto [it, fresh] = slots.try_emplace(doc[e].word, static_cast<int>(out.words.size()));
            if (fresh) {
              out.words.push_back(doc[e].word);
              out.values.resize(out.values.size() + static_cast<std::size_t>(K), 0.0);
            }
            double* dst = out.values.data() + static_cast<std::size_t>(it->second) * static_cast<std::size_t>(K);
            for (int k = 0; k < K; ++k) dst[k] += contrib(static_cast<int>(e), k);
          }
        }
      });
      for (const auto& blk : blocks) {
        total += blk.bound;
        for (std::size_t s = 0; s < blk.words.size(); ++s)
          for (int k = 0; k < K; ++k) stats(blk.words[s], k) += blk.values[s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
      }
    }
    fit.params.theta = m_step(stats, fit.params.gamma, fit.params.groups);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fit.report.cycles.push_back({cycle, total, elapsed});
    fit.objective.push_back(total + prior_term);
    if (!config.checkpoint_path.empty()) save_states(states, config.checkpoint_path);
    if (std::isfinite(previous) && std::abs(total - previous) < config.tol * std::abs(previous)) {
      fit.report.converged = true;
      break;
    }
    previous = total;
  }

  double final_total = 0.0;
  for (int i = 0; i < I; ++i) {
    auto& s = states[static_cast<std::size_t>(i)];
    s.bound = variational_bound(corpus.doc(i), fit.params, s);
    final_total += s.bound;
  }
  fit.report.final_value = final_total;
  fit.states = std::move(states);
  fit.suffstats = std::move(stats);
  return fit;
}

void write_states(const std::vector<VariationalState>& states, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& s : states) {
    for (int k = 0; k < s.a.size(); ++k) out << (k ? " " : "") << s.a(k);
    if (s.b.size() > 0) {
      out << '\t';
      for (int k = 0; k < s.b.size(); ++k) out << (k ? " " : "") << s.b(k);
    }
    out << '\n';
  }
}

std::vector<VariationalState> read_states(std::istream& in, int num_components, const std::string& name) {
  std::vector<VariationalState> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> values;
    double x;
    while (ss >> x) values.push_back(x);
    if (!ss.eof()) throw ParseError(name, line_no, "malformed number");
    VariationalState s;
    const auto K = static_cast<std::size_t>(num_components);
    if (values.size() != K && values.size() != 2 * K)
      throw ParseError(name, line_no, "expected K or 2K values per line");
    s.a = Eigen::Map<Vector>(values.data(), num_components);
    if (values.size() == 2 * K) s.b = Eigen::Map<Vector>(values.data() + K, num_components);
    for (int k = 0; k < num_components; ++k)
      if (!(s.a(k) > 0.0)) throw ParseError(name, line_no, "state parameters must be positive");
    out.push_back(std::move(s));
  }
  return out;
}

void save_states(const std::vector<VariationalState>& states, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ValidationError("cannot open " + tmp + " for writing");
    write_states(states, out);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<VariationalState> load_states(const std::string& path, int num_components) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_states(in, num_components, path);
}

}  // namespace dca
