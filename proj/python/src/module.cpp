#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dca/corpus.hpp"
#include "dca/errors.hpp"
#include "dca/evaluate.hpp"
#include "dca/gibbs.hpp"
#include "dca/model.hpp"
#include "dca/model_io.hpp"
#include "dca/nmf.hpp"
#include "dca/synthetic.hpp"
#include "dca/variational.hpp"

namespace py = pybind11;
using namespace dca;

namespace {

// Documents cross the boundary as lists of (word, count) pairs.
using PyDoc = std::vector<std::pair<int, long>>;

Document to_doc(const PyDoc& d) {
  std::vector<Entry> e;
  e.reserve(d.size());
  for (const auto& [w, c] : d) e.push_back({w, c});
  return make_document(std::move(e));
}

PyDoc from_doc(const Document& d) {
  PyDoc out;
  for (const auto& e : d) out.emplace_back(e.word, e.count);
  return out;
}

py::dict report_dict(const FitReport& r) {
  py::dict d;
  std::vector<double> values, seconds;
  for (const auto& c : r.cycles) {
    values.push_back(c.value);
    seconds.push_back(c.wall_seconds);
  }
  d["quantity"] = r.quantity;
  d["values"] = values;
  d["wall_seconds"] = seconds;
  d["converged"] = r.converged;
  d["final_value"] = r.final_value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dca, m) {
  m.doc() = "Discrete component analysis: GP, CGP and DM models for count data";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DegenerateDocument>(m, "DegenerateDocument", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::enum_<Family>(m, "Family").value("GP", Family::GP).value("CGP", Family::CGP).value("DM", Family::DM);

  py::class_<GroupSpec>(m, "GroupSpec")
      .def_readonly("group_of", &GroupSpec::group_of)
      .def_readonly("num_groups", &GroupSpec::num_groups)
      .def("members", &GroupSpec::members)
      .def_static("pairs", &GroupSpec::pairs)
      .def_static("single", &GroupSpec::single)
      .def_static("singletons", &GroupSpec::singletons);

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](int J, const std::vector<PyDoc>& docs) {
             std::vector<Document> d;
             for (const auto& x : docs) d.push_back(to_doc(x));
             return Corpus(J, std::move(d));
           }),
           py::arg("vocab_size"), py::arg("docs"))
      .def_property_readonly("num_docs", &Corpus::num_docs)
      .def_property_readonly("vocab_size", &Corpus::vocab_size)
      .def_property_readonly("total_tokens", &Corpus::total_tokens)
      .def_property_readonly("groups", &Corpus::groups)
      .def("doc", [](const Corpus& c, int i) { return from_doc(c.doc(i)); })
      .def("subset", &Corpus::subset)
      .def("with_groups", [](const Corpus& c, const GroupSpec& g) { return split_groups(c, g); })
      .def("save", [](const Corpus& c, const std::string& path) { save_docword(c, path); })
      .def_static("load", &load_docword);

  m.def("load_groups", &load_groups, py::arg("path"), py::arg("vocab_size"));
  m.def("log_multinomial_coeff", [](const PyDoc& d) { return log_multinomial_coeff(to_doc(d)); });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init(&ModelParams::uniform), py::arg("family"), py::arg("vocab_size"), py::arg("num_components"),
           py::arg("alpha"), py::arg("beta") = 1.0, py::arg("rho") = 0.0, py::arg("gamma") = 0.5)
      .def_readwrite("family", &ModelParams::family)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("rho", &ModelParams::rho)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("groups", &ModelParams::groups)
      .def_property_readonly("num_components", &ModelParams::num_components)
      .def_property_readonly("vocab_size", &ModelParams::vocab_size)
      .def("validate", &ModelParams::validate)
      .def("save", [](const ModelParams& p, const std::string& path) { save_model(p, path); })
      .def_static("load", &load_model);

  m.def("initial_params", &initial_params, py::arg("corpus"), py::arg("family"), py::arg("num_components"),
        py::arg("alpha"), py::arg("beta") = 1.0, py::arg("rho") = 0.0, py::arg("gamma") = 0.5, py::arg("seed") = 0);

  m.def(
      "fit_variational",
      [](const Corpus& c, const ModelParams& init, int max_cycles, double tol, int threads) {
        VariationalConfig cfg;
        cfg.max_cycles = max_cycles;
        cfg.tol = tol;
        cfg.threads = threads;
        py::gil_scoped_release release;
        auto fit = fit_variational(c, init, cfg);
        py::gil_scoped_acquire acquire;
        std::vector<Vector> a;
        for (const auto& s : fit.states) a.push_back(s.a);
        py::dict out;
        out["params"] = fit.params;
        out["a"] = a;
        out["scores"] = [&] {
          std::vector<Vector> sc;
          for (const auto& s : fit.states) sc.push_back(variational_scores(s, fit.params.family));
          return sc;
        }();
        out["report"] = report_dict(fit.report);
        return out;
      },
      py::arg("corpus"), py::arg("init"), py::arg("max_cycles") = 200, py::arg("tol") = 1e-6, py::arg("threads") = 1);

  m.def(
      "fit_nmf",
      [](const Corpus& c, int K, int iterations, std::uint64_t seed) {
        NmfConfig cfg;
        cfg.num_components = K;
        cfg.iterations = iterations;
        cfg.seed = seed;
        auto r = fit_nmf(c, cfg);
        return py::make_tuple(r.theta, r.scores, report_dict(r.report));
      },
      py::arg("corpus"), py::arg("num_components"), py::arg("iterations") = 500, py::arg("seed") = 0);

  m.def(
      "run_chain",
      [](const Corpus& c, const ModelParams& init, const std::string& algorithm, int burn_in, int samples, int thin,
         std::uint64_t seed, int chains) {
        ChainConfig cfg;
        cfg.burn_in = burn_in;
        cfg.samples = samples;
        cfg.thin = thin;
        cfg.seed = seed;
        if (algorithm == "direct")
          cfg.algorithm = GibbsAlgorithm::Direct;
        else if (algorithm != "collapsed")
          throw ValidationError("algorithm must be 'direct' or 'collapsed'");
        py::gil_scoped_release release;
        auto r = chains > 1 ? run_chains(c, init, cfg, chains) : run_chain(c, init, cfg);
        py::gil_scoped_acquire acquire;
        py::dict out;
        out["params"] = r.params;
        out["theta"] = r.theta_mean;
        out["scores"] = r.scores_mean;
        out["counts"] = r.counts_mean;
        out["report"] = report_dict(r.report);
        return out;
      },
      py::arg("corpus"), py::arg("init"), py::arg("algorithm") = "collapsed", py::arg("burn_in") = 200,
      py::arg("samples") = 800, py::arg("thin") = 1, py::arg("seed") = 0, py::arg("chains") = 1);

  m.def(
      "infer_document",
      [](const PyDoc& doc, const ModelParams& p, const std::string& method, int samples, std::uint64_t seed) {
        InferenceConfig cfg;
        cfg.samples = samples;
        cfg.seed = seed;
        if (method != "variational" && method != "gibbs") throw ValidationError("method must be 'variational' or 'gibbs'");
        const auto r = infer_document(to_doc(doc), p, method == "gibbs" ? InferenceMethod::Gibbs : InferenceMethod::Variational, cfg);
        return py::make_tuple(r.scores, r.log_prob);
      },
      py::arg("doc"), py::arg("params"), py::arg("method") = "variational", py::arg("samples") = 2000,
      py::arg("seed") = 0);

  m.def(
      "compare_k",
      [](const Corpus& c, const std::vector<int>& ks, Family family, const std::string& engine, double alpha,
         double beta, const std::string& criterion, std::uint64_t seed) {
        CompareConfig cfg;
        cfg.family = family;
        cfg.engine = engine;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.seed = seed;
        if (criterion == "heldout")
          cfg.criterion = CompareCriterion::HeldOut;
        else if (criterion == "evidence")
          cfg.criterion = CompareCriterion::Evidence;
        else if (criterion != "training")
          throw ValidationError("criterion must be training, heldout or evidence");
        std::vector<py::tuple> rows;
        for (const auto& r : compare_k(c, ks, cfg)) rows.push_back(py::make_tuple(r.num_components, r.nll_nats, r.nll_bits));
        return rows;
      },
      py::arg("corpus"), py::arg("ks"), py::arg("family") = Family::DM, py::arg("engine") = "variational",
      py::arg("alpha") = 0.1, py::arg("beta") = 1.0, py::arg("criterion") = "training", py::arg("seed") = 0);

  m.def(
      "brute_force_marginal", [](const PyDoc& d, const ModelParams& p) { return brute_force_marginal(to_doc(d), p); },
      py::arg("doc"), py::arg("params"));

  m.def(
      "generate_corpus",
      [](const ModelParams& truth, int num_docs, double mean_length, std::uint64_t seed) {
        Rng rng(seed);
        auto s = generate_corpus(truth, num_docs, mean_length, rng);
        return py::make_tuple(s.corpus, s.scores);
      },
      py::arg("truth"), py::arg("num_docs"), py::arg("mean_length") = 50.0, py::arg("seed") = 0);

  m.def(
      "random_theta",
      [](int J, int K, double concentration, std::uint64_t seed) {
        Rng rng(seed);
        return random_theta(J, K, concentration, rng);
      },
      py::arg("vocab_size"), py::arg("num_components"), py::arg("concentration") = 0.5, py::arg("seed") = 0);

  m.def("poisson_gamma_logpmf", &poisson_gamma_logpmf, py::arg("L"), py::arg("a"), py::arg("b"));
  m.def("digamma", &digamma);
  m.def("log_gamma", &log_gamma);
}
