"""Minimal blocks of a unitary's support: the unit of locality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

DEFAULT_ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """Disjoint, exhaustive index sets; ``labels[i]`` names the block of ``i``.

    Labels are numbered in order of each block's smallest member.
    """

    labels: np.ndarray

    @property
    def n_blocks(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def blocks(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        sizes = np.bincount(self.labels, minlength=self.n_blocks)
        return np.split(order, np.cumsum(sizes)[:-1])

    def as_sets(self) -> list[frozenset]:
        return [frozenset(int(i) for i in b) for b in self.blocks]

    def __eq__(self, other):
        return isinstance(other, BlockPartition) and np.array_equal(self.labels, other.labels)


def support(U, zero_tol: float = DEFAULT_ZERO_TOL):
    """Boolean (sparse if U is sparse) mask of entries with |U_ij| > zero_tol."""
    if sp.issparse(U):
        S = sp.csr_array(U, copy=True)
        S.data = (np.abs(S.data) > zero_tol).astype(np.int8)
        S.eliminate_zeros()
        return S
    return np.abs(np.asarray(U)) > zero_tol


def minimal_blocks(U, zero_tol: float = DEFAULT_ZERO_TOL) -> BlockPartition:
    """Connected components of the support graph of ``U``.

    For unitary ``U`` a set closed under outgoing couplings is also closed
    under incoming ones, so these components are exactly the minimal blocks.
    """
    S = support(U, zero_tol)
    graph = S if sp.issparse(S) else sp.csr_array(S.astype(np.int8))
    _, raw = connected_components(graph, directed=True, connection="weak")
    # relabel by first occurrence so labels are canonical
    _, first = np.unique(raw, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return BlockPartition(rank[raw])


def partition_from_sets(sets, n: int) -> BlockPartition:
    labels = np.full(n, -1, dtype=np.int64)
    for k, s in enumerate(sets):
        for i in s:
            if labels[i] != -1:
                raise ValueError(f"index {i} appears in two blocks")
            labels[i] = k
    if (labels < 0).any():
        raise ValueError("blocks do not cover every index")
    return BlockPartition(labels)


def block_fill(columns: np.ndarray, blocks: BlockPartition, weights: np.ndarray):
    """COO triples filling each listed column with ``weights`` restricted to its block.

    The restricted weights are normalized to sum 1; where they vanish on the
    block the column is uniform over the block.
    """
    labels = blocks.labels
    columns = np.asarray(columns, dtype=np.int64)
    nb = blocks.n_blocks
    order = np.argsort(labels, kind="stable")
    sizes = np.bincount(labels, minlength=nb)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    mass = np.bincount(labels, weights=weights, minlength=nb)

    col_labels = labels[columns]
    per_col = sizes[col_labels]
    cols = np.repeat(columns, per_col)
    offsets = np.arange(per_col.sum()) - np.repeat(np.cumsum(per_col) - per_col, per_col)
    rows = order[np.repeat(starts[col_labels], per_col) + offsets]

    lab = labels[rows]
    m = mass[lab]
    positive = m > DEFAULT_ZERO_TOL
    vals = np.where(positive, weights[rows] / np.where(positive, m, 1.0), 1.0 / sizes[lab])
    return rows, cols, vals
