"""Product, Dieks and Schrödinger dynamics.

A transition matrix ``S`` is stored with ``S[j, i] = Pr(j after U | i before U)``,
so each column is a distribution over destinations and sums to 1.

All three rules see the state only through its source Born vector
``p = diag(rho)`` and destination Born vector ``q = diag(U rho U^+)``.  For
Dieks this uses that ``U`` never couples different minimal blocks, so the
block-restricted destination marginal of ``U_L rho_L U_L^+`` is ``q`` on ``L``
divided by the block mass.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .blocks import DEFAULT_ZERO_TOL, BlockPartition, block_fill, minimal_blocks, support
from .scaling import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    MarginalTargets,
    column_stochasticize,
    rc_scale,
    squared_magnitudes,
)
from .state import born_distribution, evolve, normalize_probabilities


class DynamicsKind(str, enum.Enum):
    PD = "pd"
    DD = "dd"
    SD = "sd"

    @classmethod
    def parse(cls, value) -> "DynamicsKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class DynamicsParams:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    zero_tol: float = DEFAULT_ZERO_TOL


def _check_dims(rho, U):
    if rho.shape[0] != U.shape[0] or U.shape[0] != U.shape[1]:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, U {U.shape}")


def _as_output(S, like):
    if sp.issparse(like):
        return sp.csc_array(S)
    return S.toarray() if sp.issparse(S) else np.asarray(S)


def pd_from_marginals(p, q):
    return np.tile(np.asarray(q, dtype=float)[:, None], (1, len(p)))


def dd_from_marginals(U, p, q, zero_tol=DEFAULT_ZERO_TOL, blocks: BlockPartition | None = None):
    blocks = blocks if blocks is not None else minimal_blocks(U, zero_tol)
    n = len(p)
    rows, cols, vals = block_fill(np.arange(n), blocks, np.asarray(q, dtype=float))
    S = sp.csc_array((vals, (rows, cols)), shape=(n, n))
    return _as_output(S, U)


def sd_from_marginals(U, p, q, params: DynamicsParams = DynamicsParams()):
    """Scale |U|^2 to the marginals; unreachable columns follow U's column support.

    Convergence is judged block by block, so each minimal block ends exactly
    where the scaling of that block alone would.
    """
    M = squared_magnitudes(U)
    mask = support(U, params.zero_tol)
    M = sp.csr_array(M.multiply(mask)) if sp.issparse(M) else np.where(mask, M, 0.0)
    blocks = minimal_blocks(U, params.zero_tol)
    res = rc_scale(M, MarginalTargets(p, q), params.tol, params.max_iter, blocks=blocks)
    return _as_output(column_stochasticize(res.limit, p, support=mask), U)


def transition_from_marginals(kind, U, p, q, params: DynamicsParams = DynamicsParams(),
                              blocks: BlockPartition | None = None):
    kind = DynamicsKind.parse(kind)
    if kind is DynamicsKind.PD:
        S = pd_from_marginals(p, q)
        return sp.csc_array(S) if sp.issparse(U) else S
    if kind is DynamicsKind.DD:
        return dd_from_marginals(U, p, q, params.zero_tol, blocks)
    return sd_from_marginals(U, p, q, params)


def _marginals(rho, U):
    _check_dims(rho, U)
    p = born_distribution(rho)
    q = born_distribution(evolve(rho, U))
    return p, q


def pd_transition(rho, U):
    p, q = _marginals(rho, U)
    return pd_from_marginals(p, q)


def dd_transition(rho, U, zero_tol: float = DEFAULT_ZERO_TOL):
    p, q = _marginals(rho, U)
    return dd_from_marginals(U, p, q, zero_tol)


def sd_transition(rho, U, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  zero_tol: float = DEFAULT_ZERO_TOL):
    p, q = _marginals(rho, U)
    return sd_from_marginals(U, p, q, DynamicsParams(tol, max_iter, zero_tol))


def transition(kind, rho, U, params: DynamicsParams = DynamicsParams()):
    p, q = _marginals(rho, U)
    return transition_from_marginals(kind, U, p, q, params)


def check_marginalization(S, rho, U) -> float:
    """max_j |sum_i S(j<-i) rho_ii - (U rho U^+)_jj|."""
    _check_dims(rho, U)
    p = np.real(np.diagonal(rho))
    q = np.real(np.diagonal(evolve(rho, U)))
    return float(np.abs(S @ p - q).max())


def submatrix_state(rho, block) -> np.ndarray | None:
    """The block's submatrix of rho normalized to trace 1, or None if it has no mass."""
    sub = np.asarray(rho)[np.ix_(block, block)]
    tr = np.trace(sub).real
    if tr <= DEFAULT_ZERO_TOL:
        return None
    return sub / tr


__all__ = [
    "DynamicsKind",
    "DynamicsParams",
    "dd_transition",
    "pd_transition",
    "sd_transition",
    "transition",
    "transition_from_marginals",
    "check_marginalization",
    "minimal_blocks",
    "normalize_probabilities",
]
