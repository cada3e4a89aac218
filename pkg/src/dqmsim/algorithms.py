"""History-based algorithms: collision / statistical-difference and marked-item search.

Collision register layout (little-endian qubit numbers)::

    qubit 0            control bit i
    qubits 1..n        input X
    next ybits         output register Y (ybits = bits needed by the tables)
    next hash bits     hash register, when a hash schedule is used

The work word ``a = i o X`` is the basis index of qubits ``0..n``, i.e.
``a = i + 2 X``.

The search construction's juggling stage is this package's own design:
each round computes a random one-bit hash of the work register into an
ancilla, applies a Hadamard layer to the work register and then undoes it,
and finally uncomputes the hash.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsKind, DynamicsParams
from .history import CircuitSequence, History, compile_sequence, sample_batch, sample_history
from .state import Circuit, CircuitError, DEFAULT_MAX_QUBITS, HadamardLayer, XorOracle, grover_circuit


def _stream(*keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


# --------------------------------------------------------------------------
# statistical difference


@dataclass(frozen=True)
class DistributionPair:
    n: int
    p0: tuple
    p1: tuple
    eps: float = 0.1

    def __init__(self, n, p0, p1, eps=0.1):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p0", tuple(int(v) for v in p0))
        object.__setattr__(self, "p1", tuple(int(v) for v in p1))
        object.__setattr__(self, "eps", float(eps))
        size = 2**self.n
        for name in ("p0", "p1"):
            tab = getattr(self, name)
            if len(tab) != size:
                raise ValueError(f"{name} has {len(tab)} entries, expected {size}")
            if min(tab) < 0 or max(tab) >= 2 ** (self.n + 1):
                raise ValueError(f"{name} outputs must lie in [0, 2^(n+1))")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2)")

    @property
    def injective(self) -> bool:
        return len(set(self.p0)) == len(self.p0) and len(set(self.p1)) == len(self.p1)

    @property
    def y_bits(self) -> int:
        return max(1, max(max(self.p0), max(self.p1)).bit_length())

    def satisfies_promise(self) -> bool:
        d = statistical_difference(self)
        return d < self.eps or d > 1 - self.eps


def statistical_difference(pair: DistributionPair) -> float:
    size = 2 ** (pair.n + 1)
    h0 = np.bincount(pair.p0, minlength=size) / 2**pair.n
    h1 = np.bincount(pair.p1, minlength=size) / 2**pair.n
    return 0.5 * float(np.abs(h0 - h1).sum())


def generate_pair(kind: str, n: int, seed: int = 0, eps: float = 0.1) -> DistributionPair:
    """Test instances: identical, disjoint, two-to-one, two-to-one-disjoint.

    Inputs are shuffled by a seeded permutation so tables are not trivially ordered.
    """
    size = 2**n
    rng = _stream(seed, n, 7)
    x = np.arange(size)
    perm0, perm1 = rng.permutation(size), rng.permutation(size)
    if kind == "identical":
        p0, p1 = perm0[x], perm1[x]
    elif kind == "disjoint":
        p0, p1 = perm0[x], perm1[x] + size
    elif kind == "two-to-one":
        p0, p1 = perm0[x] >> 1, perm1[x] >> 1
    elif kind == "two-to-one-disjoint":
        p0, p1 = perm0[x] >> 1, (perm1[x] >> 1) + size // 2
    else:
        raise ValueError(f"unknown generator {kind!r}")
    return DistributionPair(n, p0, p1, eps)


# --------------------------------------------------------------------------
# hashing and the collision circuits


@dataclass(frozen=True)
class HashFunction:
    """Lookup table from work words to ``{1, ..., K}``."""

    table: tuple
    K: int

    def __init__(self, table, K):
        object.__setattr__(self, "table", tuple(int(v) for v in table))
        object.__setattr__(self, "K", int(K))
        if self.table and (min(self.table) < 1 or max(self.table) > self.K):
            raise ValueError("hash outputs must lie in [1, K]")

    @property
    def bits(self) -> int:
        return (self.K - 1).bit_length()

    def register_values(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64) - 1


def random_hash(n: int, K: int, rng) -> HashFunction:
    return HashFunction(rng.integers(1, K + 1, size=2 ** (n + 1)), K)


@dataclass(frozen=True)
class CollisionLayout:
    n: int
    y_bits: int
    hash_bits: int

    @property
    def control(self) -> int:
        return 0

    @property
    def work(self) -> list[int]:
        return list(range(self.n + 1))

    @property
    def y(self) -> list[int]:
        return list(range(self.n + 1, self.n + 1 + self.y_bits))

    @property
    def hash(self) -> list[int]:
        start = self.n + 1 + self.y_bits
        return list(range(start, start + self.hash_bits))

    @property
    def n_qubits(self) -> int:
        return self.n + 1 + self.y_bits + self.hash_bits


def _output_table(pair: DistributionPair) -> np.ndarray:
    a = np.arange(2 ** (pair.n + 1))
    i, X = a & 1, a >> 1
    return np.where(i == 0, np.asarray(pair.p0)[X], np.asarray(pair.p1)[X])


def _check_budget(layout: CollisionLayout, max_qubits: int):
    if layout.n_qubits > max_qubits:
        raise CircuitError(f"collision circuits need {layout.n_qubits} qubits, cap is {max_qubits}")


def _prepare(pair, layout) -> list:
    return [HadamardLayer(layout.work), XorOracle(_output_table(pair), layout.work, layout.y)]


def build_collision_sequence(pair: DistributionPair, h: HashFunction | None = None, rounds: int = 1,
                             max_qubits: int = DEFAULT_MAX_QUBITS) -> CircuitSequence:
    """U1, then ``rounds`` repetitions of (U2, U3); U2 = U3 = H layer on the work word."""
    layout = CollisionLayout(pair.n, pair.y_bits, h.bits if h else 0)
    _check_budget(layout, max_qubits)
    gates = _prepare(pair, layout)
    if h is not None and layout.hash_bits:
        gates.append(XorOracle(h.register_values(), layout.work, layout.hash))
    nq = layout.n_qubits
    fourier = Circuit(nq, [HadamardLayer(layout.work)])
    return CircuitSequence(nq, [Circuit(nq, gates)] + [fourier, fourier] * rounds)


def build_schedule_sequence(pair: DistributionPair, hashes, max_qubits: int = DEFAULT_MAX_QUBITS):
    """One history over a whole hash schedule.

    Round r contributes three circuits: a hash (re)computation, U2 and U3.
    Round 0's first circuit also prepares the superposition; later rounds
    replace h_(r-1) by h_r with a single xor of the two tables.
    """
    hashes = list(hashes)
    layout = CollisionLayout(pair.n, pair.y_bits, max(h.bits for h in hashes))
    _check_budget(layout, max_qubits)
    nq = layout.n_qubits
    fourier = Circuit(nq, [HadamardLayer(layout.work)])
    circuits = []
    prev = np.zeros(2 ** (pair.n + 1), dtype=np.int64)
    for r, h in enumerate(hashes):
        gates = _prepare(pair, layout) if r == 0 else []
        delta = prev ^ h.register_values()
        if layout.hash_bits and delta.any():
            gates.append(XorOracle(delta, layout.work, layout.hash))
        prev = h.register_values()
        circuits += [Circuit(nq, gates), fourier, fourier]
    return CircuitSequence(nq, circuits), layout


@dataclass(frozen=True)
class CollisionVerdict:
    verdict: str  # "close" or "far"
    rounds_used: int
    flip_evidence: list
    repetitions: int
    flip_counts: tuple  # flips seen in each repetition
    path: str

    @property
    def flip_fraction(self) -> float:
        """Fraction of repetitions that saw at least one control-bit flip."""
        return float(np.mean(np.asarray(self.flip_counts) > 0))


def collision_decide(pair: DistributionPair, kind, repetitions: int, seed: int,
                     params: DynamicsParams = DynamicsParams(), path: str | None = None,
                     threads: int = 1, max_qubits: int = DEFAULT_MAX_QUBITS) -> CollisionVerdict:
    """Close iff some sampled history flips the control bit across a U2, U3 pair.

    ``path`` is ``"one-to-one"`` (three circuits, one history per repetition)
    or ``"hashed"`` (K = 1, 2, 4, ..., 2^n within one history per
    repetition, fresh hashes each time); by default injective pairs take
    the one-to-one path.
    """
    kind = DynamicsKind.parse(kind)
    path = path or ("one-to-one" if pair.injective else "hashed")
    evidence, counts = [], []
    if path == "one-to-one":
        seq = build_collision_sequence(pair, max_qubits=max_qubits)
        batch = sample_batch(seq, kind, repetitions, seed, params, threads=threads,
                             max_qubits=max_qubits)
        v = batch.values
        flips = (v[:, 0] & 1) != (v[:, 2] & 1)
        for s in np.flatnonzero(flips):
            evidence.append((int(s), 0, tuple(int(x) for x in v[s])))
        counts = [int(f) for f in flips]
        rounds_used = 1
    elif path == "hashed":
        rounds_used = pair.n + 1
        for rep in range(repetitions):
            hrng = _stream(seed, rep, 1)
            hashes = [random_hash(pair.n, 2**r, hrng) for r in range(rounds_used)]
            seq, _ = build_schedule_sequence(pair, hashes, max_qubits)
            compiled = compile_sequence(seq, kind, params, max_qubits)
            hist = sample_history(seq, kind, _stream(seed, rep, 2), params, compiled=compiled).values
            n_flips = 0
            for r in range(rounds_used):
                before, after = hist[3 * r], hist[3 * r + 2]
                if (before & 1) != (after & 1):
                    n_flips += 1
                    evidence.append((rep, r, (before, after)))
            counts.append(n_flips)
    else:
        raise ValueError(f"unknown path {path!r}")
    verdict = "close" if evidence else "far"
    return CollisionVerdict(verdict, rounds_used, evidence, repetitions, tuple(counts), path)


def event_e_probability(n0: int, n1: int, K: int) -> float:
    """(1 - 1/K)^(n0 + n1) * n1 / K.

    The exact chance, for a uniformly random hash, that a word has exactly
    one colliding counterpart and no colliding same-side word is
    (n1 / K)(1 - 1/K)^(n0 + n1 - 2); this expression drops two factors of
    (1 - 1/K).
    """
    if n0 < 1 or n1 < 1 or K < 1:
        raise ValueError("n0, n1 and K must be at least 1")
    return (1.0 - 1.0 / K) ** (n0 + n1) * n1 / K


# --------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class SearchSetup:
    sequence: CircuitSequence
    n_work: int
    marked: int
    grover_iters: int
    juggle_rounds: int

    @property
    def queries(self) -> int:
        return self.grover_iters


def default_grover_iters(N: int, c: float = 1.0) -> int:
    return max(1, math.ceil(c * N ** (1 / 3) - 1e-9))


def build_search_sequence(n_qubits: int, marked: int, grover_iters: int | None = None,
                          juggle_rounds: int = 0, seed: int = 0,
                          max_qubits: int = DEFAULT_MAX_QUBITS) -> SearchSetup:
    """One Grover circuit, then ``juggle_rounds`` rounds of four circuits each.

    Only the Grover circuit calls the marked-item oracle.
    """
    N = 2**n_qubits
    if grover_iters is None:
        grover_iters = default_grover_iters(N)
    total = n_qubits + (1 if juggle_rounds else 0)
    if total > max_qubits:
        raise CircuitError(f"search needs {total} qubits, cap is {max_qubits}")
    circuits = [grover_circuit(n_qubits, marked, grover_iters).embed(total)]
    work = list(range(n_qubits))
    rng = _stream(seed, n_qubits, 3)
    for _ in range(juggle_rounds):
        h = XorOracle(rng.integers(0, 2, size=N), work, [n_qubits])
        fourier = Circuit(total, [HadamardLayer(work)])
        circuits += [Circuit(total, [h]), fourier, fourier, Circuit(total, [h])]
    return SearchSetup(CircuitSequence(total, circuits), n_qubits, marked, grover_iters, juggle_rounds)


@dataclass(frozen=True)
class SearchResult:
    found: int | None
    queries_used: int
    history: History


@dataclass(frozen=True)
class SearchStats:
    success_fraction: float
    stderr: float
    shots: int
    results: list = field(repr=False)


def search_decide(setup: SearchSetup, kind, shots: int, seed: int,
                  params: DynamicsParams = DynamicsParams(), threads: int = 1,
                  max_qubits: int = DEFAULT_MAX_QUBITS) -> SearchStats:
    """A shot succeeds iff the marked item shows up in the work bits of its history."""
    batch = sample_batch(setup.sequence, kind, shots, seed, params, threads=threads,
                         max_qubits=max_qubits)
    hits = (batch.values & (2**setup.n_work - 1)) == setup.marked
    success = hits.any(axis=1)
    results = [
        SearchResult(setup.marked if ok else None, setup.queries, h)
        for ok, h in zip(success, batch.histories)
    ]
    frac = float(success.mean())
    return SearchStats(frac, math.sqrt(frac * (1 - frac) / shots), shots, results)


def search_scaling_bench(Ns, kind, shots: int, seed: int, c: float = 1.0, juggle_factor: int = 2,
                         params: DynamicsParams = DynamicsParams(), threads: int = 1,
                         fractions=(1.0, 0.5), max_qubits: int = DEFAULT_MAX_QUBITS) -> list[dict]:
    """Success fraction at the full budget ceil(c N^(1/3)) and at reduced budgets.

    A budget B means B Grover iterations and ``juggle_factor * B`` juggle rounds.
    """
    rows = []
    for N in Ns:
        n = int(N).bit_length() - 1
        if 2**n != N:
            raise ValueError(f"N = {N} is not a power of two")
        full = default_grover_iters(N, c)
        marked = int(_stream(seed, N, 5).integers(N))
        for frac in fractions:
            budget = max(1, math.ceil(full * frac - 1e-9))
            setup = build_search_sequence(n, marked, budget, juggle_factor * budget, seed,
                                          max_qubits=max_qubits)
            stats = search_decide(setup, kind, shots, seed, params, threads, max_qubits)
            rows.append({
                "N": N, "queries": setup.queries, "juggle_rounds": setup.juggle_rounds,
                "shots": shots, "success": stats.success_fraction, "stderr": stats.stderr,
            })
    return rows
