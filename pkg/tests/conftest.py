"""Shared random-instance generators for the test suite.

All generators take an explicit numpy Generator so every test pins its own
seed; nothing here reads global RNG state.
"""

from __future__ import annotations

import numpy as np

from povmlab import Povm, StateEnsemble


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a complex Gaussian factor G G^dag / Tr."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ensemble(rng: np.random.Generator, dim: int, n_states: int) -> StateEnsemble:
    """Full-rank states with well-separated priors (each at least 0.1/N)."""
    priors = rng.random(n_states) + 0.1
    priors = priors / priors.sum()
    states = tuple(random_density(rng, dim) for _ in range(n_states))
    return StateEnsemble(states, priors)


def random_povm(rng: np.random.Generator, dim: int, n_outcomes: int) -> Povm:
    """Random valid POVM: PSD seeds A_k whitened by their sum,
    S^{-1/2} A_k S^{-1/2}, which closes to the identity by construction."""
    seeds = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        seeds.append(g @ g.conj().T)
    total = sum(seeds)
    w, v = np.linalg.eigh(total)
    whiten = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    elements = tuple(whiten @ a @ whiten for a in seeds)
    return Povm(elements)


def helstrom_two_state(e: StateEnsemble) -> float:
    """Independent minimum-error oracle for two states:
    (1 + trace norm of p_1 rho_1 - p_2 rho_2) / 2."""
    assert e.n_states == 2
    gap = e.priors[0] * e.states[0] - e.priors[1] * e.states[1]
    return 0.5 * (1.0 + float(np.sum(np.abs(np.linalg.eigvalsh(gap)))))
