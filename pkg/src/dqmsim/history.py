"""Markov sampling of hidden-variable histories.

The register starts in |0...0>, so the time-0 value is ``v0 = 0``; a
history is ``(v1, ..., vT)`` with ``vk`` the value right after circuit ``k``.
Step ``k`` draws ``vk`` from column ``v(k-1)`` of the transition matrix
that the chosen dynamics assigns to ``(rho_(k-1), U_k)``.

Shot ``s`` of a batch draws its T uniforms from
``default_rng(SeedSequence([seed, s]))``, so a batch is a pure function of
``(sequence, model, shots, seed)`` whatever the thread schedule.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp

from .dynamics import DynamicsKind, DynamicsParams, transition_from_marginals
from .state import DEFAULT_MAX_QUBITS, Circuit, compile_sparse, normalize_probabilities


@dataclass(frozen=True)
class CircuitSequence:
    n_qubits: int
    circuits: tuple

    def __init__(self, n_qubits: int, circuits):
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "circuits", tuple(circuits))
        if not self.circuits:
            raise ValueError("a circuit sequence needs at least one circuit")
        for c in self.circuits:
            if c.n_qubits != self.n_qubits:
                raise ValueError(f"circuit on {c.n_qubits} qubits in a {self.n_qubits}-qubit sequence")

    def __len__(self):
        return len(self.circuits)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


@dataclass(frozen=True)
class History:
    values: tuple

    def __len__(self):
        return len(self.values)


class _Kernel:
    """Inverse-CDF sampler over the columns of one step's transition matrix."""

    def __init__(self, S=None, column=None):
        if column is not None:
            self.column = np.cumsum(column)
            self.last = int(np.flatnonzero(np.asarray(column) > 0)[-1])
            self.S = None
            return
        self.column = None
        S = sp.csc_array(S)
        S.eliminate_zeros()
        S.sort_indices()
        self.S = S
        counts = np.diff(S.indptr)
        cs = np.cumsum(S.data)
        base = np.concatenate([[0.0], cs])[S.indptr[:-1]]
        within = cs - np.repeat(base, counts)
        cols = np.repeat(np.arange(S.shape[1]), counts)
        # gap of 2 between columns keeps the keys sorted despite round-off
        self.keys = 2.0 * cols + within

    def draw(self, prev: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.column is not None:
            pos = np.searchsorted(self.column, u, side="right")
            return np.minimum(pos, self.last)
        S = self.S
        pos = np.searchsorted(self.keys, 2.0 * prev + u, side="right")
        pos = np.clip(pos, S.indptr[prev], S.indptr[prev + 1] - 1)
        return S.indices[pos]


@dataclass(frozen=True, eq=False)
class CompiledSequence:
    """Per-step unitaries, Born marginals and transition matrices.

    ``born[k]`` is the distribution of the value after step ``k`` (``born[0]``
    is the initial state).  ``transitions[k]`` is sparse, or ``None`` under
    PD, whose columns all equal ``born[k + 1]``.
    """

    sequence: CircuitSequence
    kind: DynamicsKind
    unitaries: list
    born: list
    transitions: list
    kernels: list = field(repr=False)

    def dense_transition(self, k: int) -> np.ndarray:
        S = self.transitions[k]
        if S is None:
            n = len(self.born[k + 1])
            return np.tile(self.born[k + 1][:, None], (1, n))
        return S.toarray()


def compile_sequence(seq: CircuitSequence, kind, params: DynamicsParams = DynamicsParams(),
                     max_qubits: int = DEFAULT_MAX_QUBITS) -> CompiledSequence:
    kind = DynamicsKind.parse(kind)
    psi = np.zeros(seq.dim, dtype=complex)
    psi[0] = 1.0
    born = [normalize_probabilities(np.abs(psi) ** 2)]
    unitaries, transitions, kernels = [], [], []
    for c in seq.circuits:
        U = compile_sparse(c, max_qubits)
        psi = U @ psi
        p, q = born[-1], normalize_probabilities(np.abs(psi) ** 2)
        if kind is DynamicsKind.PD:
            S, kernel = None, _Kernel(column=q)
        else:
            S = transition_from_marginals(kind, U, p, q, params)
            kernel = _Kernel(S)
        unitaries.append(U)
        born.append(q)
        transitions.append(S)
        kernels.append(kernel)
    return CompiledSequence(seq, kind, unitaries, born, transitions, kernels)


def shot_uniforms(seed: int, shots: np.ndarray, T: int) -> np.ndarray:
    return np.stack([
        np.random.default_rng(np.random.SeedSequence([int(seed), int(s)])).random(T) for s in shots
    ]) if len(shots) else np.empty((0, T))


def _run(compiled: CompiledSequence, u: np.ndarray) -> np.ndarray:
    shots, T = u.shape
    out = np.empty((shots, T), dtype=np.int64)
    prev = np.zeros(shots, dtype=np.int64)
    for k, kernel in enumerate(compiled.kernels):
        prev = kernel.draw(prev, u[:, k])
        out[:, k] = prev
    return out


def sample_history(seq, kind, rng, params: DynamicsParams = DynamicsParams(),
                   compiled: CompiledSequence | None = None) -> History:
    compiled = compiled or compile_sequence(seq, kind, params)
    u = rng.random(len(compiled.kernels))[None, :]
    return History(tuple(int(v) for v in _run(compiled, u)[0]))


@dataclass(frozen=True, eq=False)
class HistoryBatch:
    values: np.ndarray  # (shots, T)
    seed: int
    model: DynamicsKind
    marginals: list  # empirical distribution of v_k, k = 1..T

    @property
    def histories(self) -> list[History]:
        return [History(tuple(int(v) for v in row)) for row in self.values]

    @property
    def shots(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        return (isinstance(other, HistoryBatch) and self.seed == other.seed
                and self.model == other.model and np.array_equal(self.values, other.values))


def sample_batch(seq, kind, shots: int, seed: int, params: DynamicsParams = DynamicsParams(),
                 threads: int = 1, compiled: CompiledSequence | None = None,
                 max_qubits: int = DEFAULT_MAX_QUBITS) -> HistoryBatch:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    compiled = compiled or compile_sequence(seq, kind, params, max_qubits)
    T = len(compiled.kernels)

    def chunk(idx):
        return _run(compiled, shot_uniforms(seed, idx, T))

    parts = np.array_split(np.arange(shots), max(1, min(threads, shots)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = np.concatenate(list(pool.map(chunk, parts)))
    else:
        values = np.concatenate([chunk(p) for p in parts])
    N = compiled.sequence.dim
    marginals = [np.bincount(values[:, k], minlength=N) / shots for k in range(T)]
    return HistoryBatch(values, int(seed), compiled.kind, marginals)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def marginal_deviation(batch: HistoryBatch, seq_or_compiled) -> list[float]:
    """Per-step TV distance between empirical marginals and the Born rule."""
    compiled = seq_or_compiled if isinstance(seq_or_compiled, CompiledSequence) else \
        compile_sequence(seq_or_compiled, DynamicsKind.PD)
    return [total_variation(m, b) for m, b in zip(batch.marginals, compiled.born[1:])]


def exact_history_law(compiled: CompiledSequence) -> np.ndarray:
    """Probability of every history, shape (N,)*T, from products of transition columns."""
    T = len(compiled.kernels)
    joint = compiled.dense_transition(0)[:, 0]
    for k in range(1, T):
        joint = joint[..., None] * compiled.dense_transition(k).T
    return joint


def enumerate_history_law(compiled: CompiledSequence) -> dict:
    """Brute-force oracle: loop over all N**T histories one at a time."""
    N = compiled.sequence.dim
    mats = [compiled.dense_transition(k) for k in range(len(compiled.kernels))]
    law = {}
    for hist in product(range(N), repeat=len(mats)):
        prob, prev = 1.0, 0
        for S, v in zip(mats, hist):
            prob *= S[v, prev]
            prev = v
        law[hist] = prob
    return law


def empirical_history_law(batch: HistoryBatch, N: int) -> np.ndarray:
    T = batch.values.shape[1]
    flat = np.ravel_multi_index(batch.values.T, (N,) * T)
    return (np.bincount(flat, minlength=N**T) / batch.shots).reshape((N,) * T)


@dataclass(frozen=True)
class MarkovCheck:
    max_conditional_gap: float
    joint_tv: float
    cells_used: int
    cells_excluded: int


def markov_property_check(seq, kind, shots: int, seed: int, min_cell: int = 100,
                          params: DynamicsParams = DynamicsParams()) -> MarkovCheck:
    """Empirical conditional-independence gaps plus the exact-law comparison.

    For each interior step k the conditional law of v_k given its neighbours
    is compared with the law given the neighbours and one further value v_l;
    cells with fewer than ``min_cell`` samples are skipped.
    """
    compiled = compile_sequence(seq, kind, params)
    T = len(seq)
    if T < 3:
        raise ValueError("the Markov check needs at least three steps")
    N = seq.dim
    batch = sample_batch(seq, kind, shots, seed, params, compiled=compiled)
    v = np.concatenate([np.zeros((shots, 1), dtype=np.int64), batch.values], axis=1)
    gap, used, excluded = 0.0, 0, 0
    for k in range(1, T):
        nb = (v[:, k - 1] * N + v[:, k + 1])
        base = np.zeros((N * N, N))
        np.add.at(base, (nb, v[:, k]), 1)
        for l in range(T + 1):
            if l in (k - 1, k, k + 1):
                continue
            cell = nb * N + v[:, l]
            counts = np.zeros((N ** 3, N))
            np.add.at(counts, (cell, v[:, k]), 1)
            totals = counts.sum(axis=1)
            for c in np.flatnonzero(totals):
                if totals[c] < min_cell:
                    excluded += 1
                    continue
                used += 1
                ref = base[c // N]
                gap = max(gap, float(np.abs(counts[c] / totals[c] - ref / ref.sum()).max()))
    joint_tv = total_variation(empirical_history_law(batch, N), exact_history_law(compiled))
    return MarkovCheck(gap, joint_tv, used, excluded)
