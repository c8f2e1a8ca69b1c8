"""Noisy-query Grover search: exact and trajectory simulation, search
experiments and numerical certification of the progress-measure bounds."""

from ._noisyq import (
    Mode,
    NoiseKind,
    NoiseSpec,
    TruthTable,
    CapExceededError,
    derive_seed,
    grover_success_formula,
    grover_success,
    random_algorithm_success,
    trajectory_success,
    noisy_search,
    search_trials,
    check_policy,
    truncated_schedule,
    verify_claim_identities,
    verify_claim_norms,
    verify_lemma_inequalities,
    progress_trace,
    projector,
    choi_signaling,
)

__all__ = [
    "Mode",
    "NoiseKind",
    "NoiseSpec",
    "TruthTable",
    "CapExceededError",
    "derive_seed",
    "grover_success_formula",
    "grover_success",
    "random_algorithm_success",
    "trajectory_success",
    "noisy_search",
    "search_trials",
    "check_policy",
    "truncated_schedule",
    "verify_claim_identities",
    "verify_claim_norms",
    "verify_lemma_inequalities",
    "progress_trace",
    "projector",
    "choi_signaling",
]
