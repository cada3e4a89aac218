"""Numeric probes for the symmetry, locality, robustness and commutativity axioms."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .blocks import DEFAULT_ZERO_TOL, minimal_blocks
from .dynamics import DynamicsKind, DynamicsParams, submatrix_state, transition
from .state import evolve


def _perm_matrix(P) -> np.ndarray:
    P = np.asarray(P)
    if P.ndim == 1:
        M = np.zeros((len(P), len(P)))
        M[P, np.arange(len(P))] = 1.0
        return M
    return P.astype(float)


def random_permutation(n: int, rng) -> np.ndarray:
    return _perm_matrix(rng.permutation(n))


def check_symmetry(kind, rho, U, P, Q, params: DynamicsParams = DynamicsParams()) -> float:
    """||D(P rho P^+, Q U P^+) - Q D(rho, U) P^+||_max.

    ``P`` and ``Q`` are permutation matrices, or index arrays sending basis
    state ``x`` to ``P[x]``.
    """
    P, Q = _perm_matrix(P), _perm_matrix(Q)
    S = transition(kind, rho, U, params)
    S_rel = transition(kind, P @ rho @ P.T, Q @ U @ P.T, params)
    return float(np.abs(S_rel - Q @ S @ P.T).max())


def check_locality(kind, rho, U, zero_tol: float = DEFAULT_ZERO_TOL,
                   params: DynamicsParams = DynamicsParams()) -> float:
    """Largest cross-block transition plus largest within-block mismatch.

    The within-block reference is the dynamics applied to the block on its
    own, ``D(rho_L, U_L)``; blocks without mass have no such reference and
    only their cross-block entries are counted.
    """
    kind = DynamicsKind.parse(kind)
    params = DynamicsParams(params.tol, params.max_iter, zero_tol)
    S = np.asarray(transition(kind, rho, U, params))
    part = minimal_blocks(U, zero_tol)
    labels = part.labels
    cross = np.abs(S[labels[:, None] != labels[None, :]]).max(initial=0.0)
    within = 0.0
    for block in part.blocks:
        rho_L = submatrix_state(rho, block)
        if rho_L is None:
            continue
        U_L = np.asarray(U)[np.ix_(block, block)]
        S_L = np.asarray(transition(kind, rho_L, U_L, params))
        within = max(within, float(np.abs(S[np.ix_(block, block)] - S_L).max()))
    return float(cross + within)


def perturb_state(rho, delta: float, rng) -> np.ndarray:
    """Mix toward a random state so that ||rho - rho*||_max <= delta."""
    n = rho.shape[0]
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    sigma = G @ G.conj().T
    sigma /= np.trace(sigma).real
    return (1 - delta / 2) * rho + (delta / 2) * sigma


def perturb_unitary(U, delta: float, rng) -> np.ndarray:
    """U exp(i delta K) with K Hermitian of unit spectral norm."""
    n = U.shape[0]
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K = (G + G.conj().T) / 2
    K /= np.abs(np.linalg.eigvalsh(K)).max()
    return np.asarray(U) @ sla.expm(1j * delta * K)


def check_robustness_probe(kind, rho, U, delta: float, trials: int, rng,
                           params: DynamicsParams = DynamicsParams()) -> float:
    if delta == 0:
        return 0.0
    S = np.asarray(transition(kind, rho, U, params))
    worst = 0.0
    for _ in range(trials):
        rho_p = perturb_state(rho, delta, rng)
        U_p = perturb_unitary(U, delta, rng)
        S_p = np.asarray(transition(kind, rho_p, U_p, params))
        worst = max(worst, float(np.abs(S - S_p).max()))
    return worst


def check_commutativity(kind, rho_ab, U_a, U_b, params: DynamicsParams = DynamicsParams()) -> float:
    """Compare applying U_a then U_b against U_b then U_a, step by step.

    The joint space is ``A (x) B`` with index ``a * dim(B) + b``.  Each
    product composes chronologically: the first step's matrix acts first,
    i.e. sits rightmost.
    """
    da, db = U_a.shape[0], U_b.shape[0]
    if da * db != rho_ab.shape[0]:
        raise ValueError(
            f"registers of dimension {da} and {db} do not split a space of dimension {rho_ab.shape[0]}"
        )
    A = np.kron(U_a, np.eye(db))
    B = np.kron(np.eye(da), U_b)
    ab = np.asarray(transition(kind, evolve(rho_ab, A), B, params)) @ np.asarray(
        transition(kind, rho_ab, A, params))
    ba = np.asarray(transition(kind, evolve(rho_ab, B), A, params)) @ np.asarray(
        transition(kind, rho_ab, B, params))
    return float(np.abs(ab - ba).max())
