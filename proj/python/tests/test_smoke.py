import math

import numpy as np
import pytest

import dca


def small_corpus(seed=1, family=dca.Family.DM, k=2, docs=80):
    truth = dca.ModelParams(family, 20, k, 0.5 if family == dca.Family.DM else 2.0, 0.08)
    truth.theta = dca.random_theta(20, k, 0.5, seed)
    corpus, _ = dca.generate_corpus(truth, docs, 50.0, seed)
    return truth, corpus


def aligned_mae(est, truth):
    direct = np.abs(est - truth).mean()
    swapped = np.abs(est[:, ::-1] - truth).mean()
    return min(direct, swapped)


def test_corpus_roundtrip(tmp_path):
    c = dca.Corpus(3, [[(0, 2), (2, 1)], [], [(1, 5), (1, 1)]])
    assert c.num_docs == 3
    assert c.total_tokens == 9
    assert c.doc(2) == [(1, 6)]
    path = str(tmp_path / "docword.txt")
    c.save(path)
    back = dca.Corpus.load(path)
    assert back.doc(0) == c.doc(0)
    assert back.doc(1) == []


def test_special_functions():
    assert dca.digamma(1.0) == pytest.approx(-0.5772156649, abs=1e-10)
    assert dca.log_gamma(5.0) == pytest.approx(math.log(24.0))
    assert dca.poisson_gamma_logpmf(3, 1.0, 1.0) == pytest.approx(math.log(1 / 16))
    assert dca.log_multinomial_coeff([(0, 2), (1, 1), (2, 1)]) == pytest.approx(math.log(12))


def test_variational_recovers_theta():
    truth, corpus = small_corpus(2)
    init = dca.initial_params(corpus, dca.Family.DM, 2, 0.5, gamma=0.5, seed=3)
    fit = dca.fit_variational(corpus, init, max_cycles=300)
    theta = fit["params"].theta
    assert theta.shape == (20, 2)
    assert np.allclose(theta.sum(axis=0), 1.0)
    assert aligned_mae(theta, truth.theta) < 0.05
    assert fit["report"]["quantity"] == "bound"
    assert len(fit["scores"]) == corpus.num_docs


def test_samplers_and_nmf():
    truth, corpus = small_corpus(4, dca.Family.GP)
    init = dca.initial_params(corpus, dca.Family.GP, 2, 2.0, 0.08, seed=1)
    chain = dca.run_chain(corpus, init, algorithm="collapsed", burn_in=50, samples=100, seed=2)
    assert aligned_mae(chain["theta"], truth.theta) < 0.05
    again = dca.run_chain(corpus, init, algorithm="collapsed", burn_in=50, samples=100, seed=2)
    assert np.array_equal(chain["theta"], again["theta"])
    theta, scores, report = dca.fit_nmf(corpus, 2, 300, 0)
    assert scores.shape == (corpus.num_docs, 2)
    assert all(b >= a - 1e-9 for a, b in zip(report["values"], report["values"][1:]))


def test_inference_and_comparison():
    _, corpus = small_corpus(5, k=3, docs=60)
    rows = dca.compare_k(corpus, [2, 3], alpha=0.5, seed=1)
    assert [r[0] for r in rows] == [2, 3]
    assert rows[0][2] == pytest.approx(rows[0][1] / math.log(2))

    p = dca.ModelParams(dca.Family.DM, 2, 2, 0.6)
    p.theta = np.array([[0.7, 0.4], [0.3, 0.6]])
    doc = [(0, 2), (1, 1)]
    exact = dca.brute_force_marginal(doc, p)
    _, bound = dca.infer_document(doc, p)
    assert bound <= exact + 1e-12
    _, estimate = dca.infer_document(doc, p, method="gibbs", samples=5000, seed=1)
    assert estimate == pytest.approx(exact, abs=0.02)


def test_errors_surface_as_python_exceptions():
    p = dca.ModelParams(dca.Family.DM, 2, 2, 0.6)
    with pytest.raises(dca.ValidationError, match="3"):
        dca.infer_document([(2, 1)], p)
    with pytest.raises(ValueError):
        dca.Corpus.load("/nonexistent/docword.txt")
