"""(r, c)-scaling of nonnegative matrices.

Orientation: column ``i`` is a source, row ``j`` a destination, so the
column targets ``r`` are source probabilities and the row targets ``c``
destination probabilities.  The iteration is carried in factor form,
``limit = diag(B) @ M @ diag(A)``, and only needs products with ``M`` and
``M.T``; dense arrays and ``scipy.sparse`` arrays go through the same code.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .blocks import BlockPartition, block_fill

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
TARGET_ZERO = 1e-12
FLOW_SLACK = 1e-9


class NonConvergence(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"scaling did not converge: residual {residual:.3e} after {iterations} sweeps")
        self.iterations = iterations
        self.residual = residual


class InfeasibleTargets(ValueError):
    """No nonnegative matrix on the given support has the requested marginals."""


@dataclass(frozen=True)
class MarginalTargets:
    col_targets: np.ndarray
    row_targets: np.ndarray

    def __post_init__(self):
        for name in ("col_targets", "row_targets"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.min(initial=0.0) < 0 or abs(v.sum() - 1.0) > 1e-10:
                raise ValueError(f"{name} must be a probability vector")
            object.__setattr__(self, name, v)


@dataclass(frozen=True, eq=False)
class ScalingResult:
    limit: Any  # same kind (dense / sparse) as the input matrix
    col_factors: np.ndarray
    row_factors: np.ndarray
    iterations: int
    residual: float


def squared_magnitudes(U):
    if sp.issparse(U):
        M = sp.csr_array(U, copy=True)
        M.data = np.abs(M.data) ** 2
        return sp.csr_array(M.real)
    return np.abs(np.asarray(U)) ** 2


def _scale(M, row_factors, col_factors):
    if sp.issparse(M):
        return sp.csr_array(sp.diags_array(row_factors) @ M @ sp.diags_array(col_factors))
    return row_factors[:, None] * M * col_factors[None, :]


def _safe_ratio(target, denom, zero):
    out = np.zeros_like(target)
    live = ~zero
    with np.errstate(divide="ignore", invalid="ignore"):
        out[live] = target[live] / denom[live]
    return out


def rc_scale(
    M,
    targets: MarginalTargets,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    check_flow: bool = False,
    blocks: BlockPartition | None = None,
) -> ScalingResult:
    """Alternate column and row normalization until the marginals match.

    Each sweep is a column step followed by a residual test; the row step
    runs only if the test fails, so the returned limit always ends on a
    column step (columns exact, rows carry the residual).

    With ``blocks`` (a partition that the support of ``M`` respects) the
    test runs per block, on the residual divided by the block's mass, and a
    block's factors freeze once it passes.  Each block then stops exactly
    where scaling it on its own, with renormalized targets, would stop.
    """
    r, c = targets.col_targets, targets.row_targets
    if M.shape != (len(c), len(r)):
        raise ValueError(f"matrix shape {M.shape} does not match targets ({len(c)}, {len(r)})")
    if check_flow:
        feasible, _ = flow_condition_check(M, targets)
        if not feasible:
            raise InfeasibleTargets("flow condition fails for this support and targets")
    MT = M.T
    r_zero = r < TARGET_ZERO
    c_zero = c < TARGET_ZERO
    B = np.where(c_zero, 0.0, 1.0)
    if blocks is not None:
        labels = np.asarray(blocks.labels)
        if len(labels) != len(r) or len(r) != len(c):
            raise ValueError("block labels must cover a square matrix")
        nb = int(labels.max(initial=-1)) + 1
        mass = np.maximum(np.bincount(labels, weights=r, minlength=nb),
                          np.bincount(labels, weights=c, minlength=nb))
        inv_mass = np.where(mass > TARGET_ZERO, 1.0 / np.where(mass > TARGET_ZERO, mass, 1.0), 0.0)
        frozen = np.zeros(nb, dtype=bool)
    residual = np.inf
    for it in range(1, max_iter + 1):
        col_sums = MT @ B
        if np.any((col_sums <= 0) & ~r_zero):
            raise NonConvergence(it, np.inf)
        A = _safe_ratio(r, col_sums, r_zero)
        row_base = M @ A
        row_err = np.abs(B * row_base - c)
        col_err = np.abs(A * col_sums - np.where(r_zero, 0.0, r))
        residual = max(float(row_err.max(initial=0.0)), float(col_err.max(initial=0.0)))
        if blocks is None:
            if residual <= tol:
                return ScalingResult(_scale(M, B, A), A, B, it, residual)
            live_rows = np.ones(len(c), dtype=bool)
        else:
            err = np.zeros(nb)
            np.maximum.at(err, labels, np.maximum(row_err, col_err))
            frozen |= err * inv_mass <= tol
            if frozen.all():
                return ScalingResult(_scale(M, B, A), A, B, it, residual)
            live_rows = ~frozen[labels]
        if np.any((row_base <= 0) & ~c_zero & live_rows):
            raise NonConvergence(it, np.inf)
        B = np.where(live_rows, _safe_ratio(c, row_base, c_zero), B)
    raise NonConvergence(max_iter, residual)


def flow_condition_check(support, targets: MarginalTargets):
    """Decide by max-flow whether some nonnegative matrix on ``support`` has the targets.

    Returns ``(feasible, witness)``; the witness is the flow matrix (entry
    ``[j, i]`` carries mass from source column ``i`` to destination row
    ``j``) or ``None``.
    """
    r, c = targets.col_targets, targets.row_targets
    S = sp.coo_array(support) if sp.issparse(support) else sp.coo_array(np.asarray(support) != 0)
    G = nx.DiGraph()
    for i, ri in enumerate(r):
        G.add_edge("s", ("col", i), capacity=float(ri))
    for j, cj in enumerate(c):
        G.add_edge(("row", j), "t", capacity=float(cj))
    for j, i, v in zip(S.row, S.col, S.data):
        if v:
            G.add_edge(("col", int(i)), ("row", int(j)))  # uncapacitated
    value, flow = nx.maximum_flow(G, "s", "t")
    if value < 1.0 - FLOW_SLACK:
        return False, None
    W = np.zeros((len(c), len(r)))
    for i in range(len(r)):
        for node, f in flow.get(("col", i), {}).items():
            W[node[1], i] = f
    return True, W


def _support_fill(columns, mask, weights):
    """COO triples filling each listed column with ``weights`` on that column's support."""
    sub = sp.csc_array(sp.csc_array(mask)[:, columns])
    sub.sort_indices()
    counts = np.diff(sub.indptr)
    rows = sub.indices.astype(np.int64)
    cols = np.repeat(np.asarray(columns, dtype=np.int64), counts)
    w = weights[rows]
    totals = np.add.reduceat(w, sub.indptr[:-1][counts > 0]) if len(w) else np.empty(0)
    col_total = np.zeros(len(counts))
    col_total[counts > 0] = totals
    t = np.repeat(col_total, counts)
    n = np.repeat(counts, counts)
    vals = np.where(t > TARGET_ZERO, w / np.where(t > TARGET_ZERO, t, 1.0), 1.0 / np.maximum(n, 1))
    return rows, cols, vals


def column_stochasticize(limit, source_probs: np.ndarray, blocks: BlockPartition | None = None,
                         support=None):
    """Normalize every column of ``limit`` to sum 1.

    Columns whose source probability is at most ``TARGET_ZERO`` are
    unreachable.  They are filled with the limit's destination marginal
    restricted to the column's support in ``support`` when that is given,
    otherwise to the column's block; uniform on that set if the marginal
    vanishes there.
    """
    if blocks is None and support is None:
        raise ValueError("need a block partition or a support mask for degenerate columns")
    source_probs = np.asarray(source_probs, dtype=float)
    n = len(source_probs)
    degenerate = source_probs <= TARGET_ZERO
    col_sums = np.asarray(limit.sum(axis=0)).ravel()
    inv = np.zeros(n)
    inv[~degenerate] = 1.0 / col_sums[~degenerate]
    dest = np.asarray(limit.sum(axis=1)).ravel()
    if support is not None:
        rows, cols, vals = _support_fill(np.flatnonzero(degenerate), support, dest)
    else:
        rows, cols, vals = block_fill(np.flatnonzero(degenerate), blocks, dest)
    if sp.issparse(limit):
        S = sp.csc_array(limit @ sp.diags_array(inv))
        fill = sp.csc_array((vals, (rows, cols)), shape=limit.shape)
        S = sp.csc_array(S + fill)
        S.eliminate_zeros()
        sums = np.asarray(S.sum(axis=0)).ravel()
        return sp.csc_array(S @ sp.diags_array(1.0 / sums))
    S = np.asarray(limit) * inv[None, :]
    S[rows, cols] = vals
    return S / S.sum(axis=0, keepdims=True)
