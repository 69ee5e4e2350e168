#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "dca/corpus.hpp"
#include "dca/errors.hpp"
#include "dca/evaluate.hpp"
#include "dca/gibbs.hpp"
#include "dca/model_io.hpp"
#include "dca/nmf.hpp"
#include "dca/synthetic.hpp"
#include "dca/variational.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dca;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Prior flags: a scalar broadcast to K entries, or a comma list of K values.
Vector parse_prior(const std::string& text, int K, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  if (values.size() == 1) return Vector::Constant(K, values[0]);
  if (static_cast<int>(values.size()) != K)
    throw UsageError(flag + " lists " + std::to_string(values.size()) + " values but --k is " + std::to_string(K));
  return Eigen::Map<Vector>(values.data(), K);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size() || out.back() < 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  return out;
}

struct FitOptions {
  std::string corpus, vocab, groups, model = "dm", algorithm, alpha = "0.1", beta = "1", rho, out = ".";
  int k = 2, cycles = 200, threads = 1, burn_in = 200, samples = 800, thin = 1, chains = 1;
  double gamma = 0.5, tol = 1e-6;
  std::uint64_t seed = 0;
  bool features = false;
};

// Flags shared by `fit` and `eval --k-sweep`.
void add_model_flags(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--corpus", o.corpus, "docword file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--groups", o.groups, "word-group file (dm only)")->check(CLI::ExistingFile);
  cmd->add_option("--model", o.model, "gp, cgp or dm")->check(CLI::IsMember({"gp", "cgp", "dm"}));
  cmd->add_option("--algorithm", o.algorithm, "variational, gibbs, collapsed or nmf")
      ->check(CLI::IsMember({"variational", "gibbs", "collapsed", "nmf"}));
  cmd->add_option("--alpha", o.alpha, "score prior shape (scalar or comma list)");
  cmd->add_option("--beta", o.beta, "score prior rate, gp/cgp");
  cmd->add_option("--rho", o.rho, "spike probability, cgp");
  cmd->add_option("--gamma", o.gamma, "Dirichlet prior on Theta columns")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--cycles", o.cycles, "maximum variational cycles / NMF iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "relative bound change for convergence")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--burn-in", o.burn_in, "sampler burn-in cycles")->check(CLI::NonNegativeNumber);
  cmd->add_option("--samples", o.samples, "kept sampler cycles")->check(CLI::PositiveNumber);
  cmd->add_option("--thin", o.thin, "keep every n-th cycle")->check(CLI::PositiveNumber);
  cmd->add_option("--chains", o.chains, "independent chains")->check(CLI::PositiveNumber);
}

Family family_of(const FitOptions& o) { return family_from_string(o.model); }

std::string default_engine(const FitOptions& o) {
  if (!o.algorithm.empty()) return o.algorithm;
  return o.model == "dm" ? "variational" : "collapsed";
}

void check_combination(const CLI::App* cmd, const FitOptions& o) {
  const std::string engine = default_engine(o);
  if (cmd->count("--rho") && o.model != "cgp") throw UsageError("--rho applies only to --model cgp");
  if (cmd->count("--beta") && o.model == "dm") throw UsageError("--beta does not apply to --model dm");
  if (!o.groups.empty() && o.model != "dm") throw UsageError("--groups requires --model dm");
  if (engine == "nmf" && o.model != "gp") throw UsageError("--algorithm nmf is defined only for --model gp");
  if (engine == "nmf" && (cmd->count("--alpha") || cmd->count("--beta")))
    throw UsageError("--algorithm nmf takes no score prior");
  if (engine == "variational" && o.model == "cgp") throw UsageError("variational inference is unavailable for cgp");
  const bool sampler = engine == "gibbs" || engine == "collapsed";
  for (const char* flag : {"--burn-in", "--samples", "--thin", "--chains"})
    if (cmd->count(flag) && !sampler) throw UsageError(std::string(flag) + " applies only to gibbs/collapsed");
  if ((cmd->count("--tol")) && engine != "variational") throw UsageError("--tol applies only to variational");
  if (cmd->count("--cycles") && sampler) throw UsageError("--cycles does not apply to samplers; use --samples");
  if (o.model == "cgp" && o.rho.empty()) throw UsageError("--model cgp needs --rho");
}

Corpus load_corpus(const FitOptions& o) {
  Corpus corpus = load_docword(o.corpus);
  if (!o.groups.empty()) corpus = split_groups(corpus, load_groups(o.groups, corpus.vocab_size()));
  return corpus;
}

ModelParams starting_params(const Corpus& corpus, const FitOptions& o) {
  const Family family = family_of(o);
  ModelParams p = initial_params(corpus, family, o.k, 1.0, 1.0, 0.0, o.gamma, o.seed);
  p.alpha = parse_prior(o.alpha, o.k, "--alpha");
  if (family != Family::DM) p.beta = parse_prior(o.beta, o.k, "--beta");
  if (family == Family::CGP) p.rho = parse_prior(o.rho, o.k, "--rho");
  p.validate();
  return p;
}

ChainConfig chain_config(const FitOptions& o, const std::string& engine) {
  ChainConfig c;
  c.burn_in = o.burn_in;
  c.samples = o.samples;
  c.thin = o.thin;
  c.seed = o.seed;
  c.algorithm = engine == "gibbs" ? GibbsAlgorithm::Direct : GibbsAlgorithm::Collapsed;
  c.audit_every = 50;
  return c;
}

std::string header(const std::string& kind, const FitOptions& o, const std::string& engine) {
  return "# dca " + kind + " version=1 family=" + o.model + " engine=" + engine + " K=" + std::to_string(o.k) +
         " seed=" + std::to_string(o.seed);
}

void write_scores(const fs::path& path, const std::string& head, const Matrix& scores) {
  auto out = open_out(path);
  out << head << '\n' << "doc";
  for (int k = 0; k < scores.cols(); ++k) out << "\tk" << k + 1;
  out << '\n' << std::setprecision(17);
  for (int i = 0; i < scores.rows(); ++i) {
    out << i + 1;
    for (int k = 0; k < scores.cols(); ++k) out << '\t' << scores(i, k);
    out << '\n';
  }
}

void write_report_file(const fs::path& path, const std::string& head, const FitReport& report) {
  auto out = open_out(path);
  out << head << " quantity=" << report.quantity << " converged=" << (report.converged ? "yes" : "no") << '\n';
  out << std::setprecision(17);
  write_report(report, out);
}

nlohmann::json meta(const FitOptions& o, const std::string& engine, const FitReport& report) {
  nlohmann::json m;
  m["tool"] = "dca fit";
  m["engine"] = engine;
  m["seed"] = o.seed;
  m["cycles"] = static_cast<int>(report.cycles.size());
  m["converged"] = report.converged;
  m["quantity"] = report.quantity;
  m["final_value"] = report.final_value;
  return m;
}

int cmd_fit(const CLI::App* cmd, FitOptions& o) {
  check_combination(cmd, o);
  const std::string engine = default_engine(o);
  const Corpus corpus = load_corpus(o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const std::string head_scores = header("scores", o, engine), head_report = header("report", o, engine);

  if (engine == "nmf") {
    NmfConfig cfg;
    cfg.num_components = o.k;
    cfg.iterations = o.cycles;
    cfg.seed = o.seed;
    const auto r = fit_nmf(corpus, cfg);
    ModelParams p = ModelParams::uniform(Family::GP, corpus.vocab_size(), o.k, 1.0, 1.0, 0.0, o.gamma);
    p.theta = r.theta;
    auto m = meta(o, engine, r.report);
    m["divergence"] = nmf_divergence(corpus, r.theta, r.scores);
    m["note"] = "maximum-likelihood factorization; alpha and beta are placeholders";
    save_model(p, (dir / "model.json").string(), m.dump());
    write_scores(dir / "scores.tsv", head_scores, r.scores);
    write_report_file(dir / "report.tsv", head_report, r.report);
    std::ofstream(dir / "report.tsv", std::ios::app)
        << "# divergence\t" << std::setprecision(17) << nmf_divergence(corpus, r.theta, r.scores) << '\n';
    if (o.features) {
      auto out = open_out(dir / "features.docword");
      write_features(export_features(r.scores), out);
    }
    return 0;
  }

  const ModelParams init = starting_params(corpus, o);
  if (engine == "variational") {
    VariationalConfig cfg;
    cfg.max_cycles = o.cycles;
    cfg.tol = o.tol;
    cfg.threads = o.threads;
    const auto fit = fit_variational(corpus, init, cfg);
    save_model(fit.params, (dir / "model.json").string(), meta(o, engine, fit.report).dump());
    Matrix scores(corpus.num_docs(), o.k);
    for (int i = 0; i < corpus.num_docs(); ++i)
      scores.row(i) = variational_scores(fit.states[static_cast<std::size_t>(i)], fit.params.family).transpose();
    write_scores(dir / "scores.tsv", head_scores, scores);
    write_report_file(dir / "report.tsv", head_report, fit.report);
    {
      auto out = open_out(dir / "states.tsv");
      out << header("states", o, engine) << '\n';
      write_states(fit.states, out);
    }
    if (o.features) {
      auto out = open_out(dir / "features.docword");
      write_features(export_features(fit.params, fit.states), out);
    }
    return 0;
  }

  const ChainConfig chain = chain_config(o, engine);
  const auto summary = run_chains(corpus, init, chain, o.chains, o.threads);
  auto m = meta(o, engine, summary.report);
  m["burn_in"] = o.burn_in;
  m["samples"] = o.samples;
  m["thin"] = o.thin;
  m["chains"] = o.chains;
  save_model(summary.params, (dir / "model.json").string(), m.dump());
  write_scores(dir / "scores.tsv", head_scores, summary.scores_mean);
  write_report_file(dir / "report.tsv", head_report, summary.report);
  if (o.features) {
    auto out = open_out(dir / "features.docword");
    write_features(export_features(summary.counts_mean), out);
  }
  return 0;
}

struct TopicsOptions {
  std::string model, vocab;
  int top = 10;
};

int cmd_topics(const TopicsOptions& o) {
  const ModelParams p = load_model(o.model);
  if (o.vocab.empty() || !fs::exists(o.vocab)) throw UsageError("topics needs an existing --vocab file");
  const auto vocab = load_vocab(o.vocab);
  if (static_cast<int>(vocab.size()) != p.vocab_size())
    throw ValidationError("vocabulary has " + std::to_string(vocab.size()) + " words, model has J=" +
                          std::to_string(p.vocab_size()));
  const int K = p.num_components();
  std::cout << "# dca topics version=1 family=" << to_string(p.family) << " K=" << K << '\n';
  std::cout << std::setprecision(6);
  if (p.groups) {
    // One row per component, one column per group: weight of the group's first word.
    std::cout << "component";
    for (int g = 0; g < p.groups->num_groups; ++g) std::cout << '\t' << vocab[static_cast<std::size_t>(p.groups->members(g).front())];
    std::cout << '\n';
    if (o.top == 0) return 0;
    for (int k = 0; k < K; ++k) {
      std::cout << k + 1;
      for (int g = 0; g < p.groups->num_groups; ++g) std::cout << '\t' << p.theta(p.groups->members(g).front(), k);
      std::cout << '\n';
    }
    return 0;
  }
  std::cout << "component\trank\tword\tweight\n";
  const int top = std::min(o.top, p.vocab_size());
  for (int k = 0; k < K; ++k) {
    std::vector<int> order(static_cast<std::size_t>(p.vocab_size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p.theta(a, k) > p.theta(b, k); });
    for (int r = 0; r < top; ++r) {
      const int j = order[static_cast<std::size_t>(r)];
      std::cout << k + 1 << '\t' << r + 1 << '\t' << vocab[static_cast<std::size_t>(j)] << '\t' << p.theta(j, k) << '\n';
    }
  }
  return 0;
}

struct EvalOptions {
  FitOptions fit;
  std::string model, states, method = "variational", criterion, k_sweep, out;
  double heldout = 0.0;
  int samples = 2000;
};

int cmd_eval(const CLI::App* cmd, EvalOptions& o) {
  std::ostringstream buffer;
  if (!o.k_sweep.empty()) {
    if (!o.model.empty() || !o.states.empty()) throw UsageError("--k-sweep fits its own models; drop --model/--states");
    check_combination(cmd, o.fit);
    const std::string engine = default_engine(o.fit);
    if (engine == "nmf") throw UsageError("--k-sweep does not support nmf");
    CompareConfig cfg;
    cfg.family = family_of(o.fit);
    cfg.engine = engine == "gibbs" ? "direct" : engine;
    cfg.alpha = parse_prior(o.fit.alpha, 1, "--alpha")(0);
    if (cfg.family != Family::DM) cfg.beta = parse_prior(o.fit.beta, 1, "--beta")(0);
    if (cfg.family == Family::CGP) cfg.rho = parse_prior(o.fit.rho, 1, "--rho")(0);
    cfg.gamma = o.fit.gamma;
    cfg.seed = o.fit.seed;
    cfg.variational.max_cycles = o.fit.cycles;
    cfg.variational.tol = o.fit.tol;
    cfg.variational.threads = o.fit.threads;
    cfg.chain = chain_config(o.fit, engine);
    cfg.inference.samples = o.samples;
    if (o.criterion.empty()) o.criterion = o.heldout > 0.0 ? "heldout" : "training";
    if (o.criterion == "heldout") {
      cfg.criterion = CompareCriterion::HeldOut;
      cfg.heldout_fraction = o.heldout > 0.0 ? o.heldout : 0.2;
    } else if (o.criterion == "evidence") {
      cfg.criterion = CompareCriterion::Evidence;
    } else if (o.heldout > 0.0) {
      throw UsageError("--heldout conflicts with --criterion " + o.criterion);
    }
    const Corpus corpus = load_corpus(o.fit);
    write_comparison(compare_k(corpus, parse_int_list(o.k_sweep, "--k-sweep"), cfg), cfg, buffer);
  } else {
    if (o.model.empty()) throw UsageError("eval needs --model or --k-sweep");
    if (!o.criterion.empty() || o.heldout > 0.0) throw UsageError("--criterion/--heldout apply only to --k-sweep");
    const ModelParams p = load_model(o.model);
    const Corpus corpus = load_docword(o.fit.corpus);
    check_vocabulary(corpus, p.vocab_size());
    const InferenceMethod method = o.method == "gibbs" ? InferenceMethod::Gibbs : InferenceMethod::Variational;
    std::vector<VariationalState> states;
    if (!o.states.empty()) {
      if (method != InferenceMethod::Variational) throw UsageError("--states applies only to --method variational");
      states = load_states(o.states, p.num_components());
      if (static_cast<int>(states.size()) != corpus.num_docs())
        throw ValidationError("states file has " + std::to_string(states.size()) + " documents, corpus has " +
                              std::to_string(corpus.num_docs()));
    }
    buffer << "# dca eval version=1 family=" << to_string(p.family) << " K=" << p.num_components()
           << " method=" << to_string(method) << (states.empty() ? "" : " source=states")
           << " seed=" << o.fit.seed << '\n';
    buffer << "doc\tlog_prob";
    for (int k = 0; k < p.num_components(); ++k) buffer << "\tk" << k + 1;
    buffer << '\n' << std::setprecision(17);
    InferenceConfig inf;
    inf.samples = o.samples;
    double total = 0.0;
    for (int i = 0; i < corpus.num_docs(); ++i) {
      const auto& doc = corpus.doc(i);
      double logp;
      Vector scores;
      if (!states.empty()) {
        const auto& s = states[static_cast<std::size_t>(i)];
        logp = variational_bound(doc, p, s);
        scores = variational_scores(s, p.family);
      } else {
        inf.seed = mix_seed(o.fit.seed, static_cast<std::uint64_t>(i));
        const auto r = infer_document(doc, p, method, inf);
        logp = r.log_prob;
        scores = r.scores;
      }
      total += logp;
      buffer << i + 1 << '\t' << logp;
      for (int k = 0; k < scores.size(); ++k) buffer << '\t' << scores(k);
      buffer << '\n';
    }
    buffer << "# total\t" << total << '\n';
  }
  if (o.out.empty()) {
    std::cout << buffer.str();
  } else {
    auto out = open_out(o.out);
    out << buffer.str();
  }
  return 0;
}

struct GenerateOptions {
  std::string model = "dm", alpha = "0.5", beta = "0.02", rho = "0", out = ".";
  int k = 2, j = 20, docs = 200, pairs = 0;
  double length = 50.0, concentration = 0.5;
  std::uint64_t seed = 0;
};

int cmd_generate(const CLI::App* cmd, const GenerateOptions& o) {
  const Family family = family_from_string(o.model);
  if (cmd->count("--rho") && family != Family::CGP) throw UsageError("--rho applies only to --model cgp");
  if (o.pairs > 0 && family != Family::DM) throw UsageError("--pairs requires --model dm");
  Rng rng(o.seed);
  const int J = o.pairs > 0 ? 2 * o.pairs : o.j;
  ModelParams truth = ModelParams::uniform(family, J, o.k, 1.0, 1.0, 0.0, 0.5);
  truth.alpha = parse_prior(o.alpha, o.k, "--alpha");
  if (family != Family::DM) truth.beta = parse_prior(o.beta, o.k, "--beta");
  if (family == Family::CGP) truth.rho = parse_prior(o.rho, o.k, "--rho");
  truth.theta = random_theta(J, o.k, o.concentration, rng);
  if (o.pairs > 0) {
    truth.groups = GroupSpec::pairs(o.pairs);
    normalize_columns(truth.theta, truth.groups);
  }
  const auto data = generate_corpus(truth, o.docs, o.length, rng);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_docword(data.corpus, (dir / "docword.txt").string());
  std::vector<std::string> vocab;
  for (int j = 0; j < J; ++j)
    vocab.push_back(o.pairs > 0 ? "v" + std::to_string(j / 2 + 1) + (j % 2 ? "_nay" : "_yea") : "w" + std::to_string(j + 1));
  save_vocab(vocab, (dir / "vocab.txt").string());
  if (truth.groups) save_groups(*truth.groups, (dir / "groups.txt").string());
  nlohmann::json m;
  m["tool"] = "dca generate";
  m["seed"] = o.seed;
  save_model(truth, (dir / "truth.json").string(), m.dump());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete component analysis of sparse count data"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a docword corpus");
  add_model_flags(fit_cmd, fit);
  fit_cmd->add_option("--k", fit.k, "number of components")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit.out, "output directory");
  fit_cmd->add_flag("--features", fit.features, "also write features.docword");

  TopicsOptions topics;
  auto* topics_cmd = app.add_subcommand("topics", "print the top words of each component");
  topics_cmd->add_option("--model", topics.model, "model.json")->required()->check(CLI::ExistingFile);
  topics_cmd->add_option("--vocab", topics.vocab, "vocabulary file, one word per line");
  topics_cmd->add_option("--top", topics.top, "words per component")->check(CLI::NonNegativeNumber);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score documents or compare K");
  add_model_flags(eval_cmd, eval.fit);
  eval_cmd->add_option("--model-file", eval.model, "fitted model.json")->check(CLI::ExistingFile);
  eval_cmd->add_option("--states", eval.states, "states.tsv from fit (training corpus only)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--method", eval.method, "variational or gibbs")->check(CLI::IsMember({"variational", "gibbs"}));
  eval_cmd->add_option("--k-sweep", eval.k_sweep, "comma list of K to compare");
  eval_cmd->add_option("--criterion", eval.criterion, "training, heldout or evidence")
      ->check(CLI::IsMember({"training", "heldout", "evidence"}));
  eval_cmd->add_option("--heldout", eval.heldout, "fraction of documents held out")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--doc-samples", eval.samples, "per-document chain length for --method gibbs")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", eval.out, "output file (default stdout)");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "sample a synthetic corpus");
  gen_cmd->add_option("--model", gen.model, "gp, cgp or dm")->check(CLI::IsMember({"gp", "cgp", "dm"}));
  gen_cmd->add_option("--k", gen.k, "components")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--j", gen.j, "vocabulary size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--docs", gen.docs, "documents")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--length", gen.length, "mean document length (dm)")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--alpha", gen.alpha, "score prior shape");
  gen_cmd->add_option("--beta", gen.beta, "score prior rate (gp/cgp)");
  gen_cmd->add_option("--rho", gen.rho, "spike probability (cgp)");
  gen_cmd->add_option("--concentration", gen.concentration, "Dirichlet concentration of Theta columns")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--pairs", gen.pairs, "roll-call style: this many yea/nay word pairs")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--out", gen.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_cmd, fit);
    if (*topics_cmd) return cmd_topics(topics);
    if (*eval_cmd) return cmd_eval(eval_cmd, eval);
    if (*gen_cmd) return cmd_generate(gen_cmd, gen);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateDocument& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
