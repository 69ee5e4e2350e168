"""Discrete component analysis for sparse count data."""

from ._dca import (
    Corpus,
    DegenerateDocument,
    DomainError,
    Family,
    GroupSpec,
    InvariantError,
    ModelParams,
    ParseError,
    ValidationError,
    brute_force_marginal,
    compare_k,
    digamma,
    fit_nmf,
    fit_variational,
    generate_corpus,
    infer_document,
    initial_params,
    load_groups,
    log_gamma,
    log_multinomial_coeff,
    poisson_gamma_logpmf,
    random_theta,
    run_chain,
)

__all__ = [name for name in dir() if not name.startswith("_")]
