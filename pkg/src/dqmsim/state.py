"""Dense statevector / density-matrix engine and circuit compilation.

Basis indices are little-endian: qubit ``q`` contributes ``2**q`` to the
index of a computational basis state.  Every multi-qubit gate that takes an
ordered list of qubits (``targets``, ``inputs``, ``outputs``) reads its local
index the same way, with the first listed qubit as the least significant bit.

Circuits compile to ``scipy.sparse`` matrices internally; ``circuit_unitary``
returns the dense N x N array.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

DEFAULT_MAX_QUBITS = 12
_SQRT2_INV = 1.0 / np.sqrt(2.0)
_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _SQRT2_INV


class CircuitError(ValueError):
    """Malformed gate, bad qubit index, or dimension cap exceeded."""


# --------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Hadamard:
    target: int


@dataclass(frozen=True)
class HadamardLayer:
    """Bitwise Fourier transform: a Hadamard on every listed qubit."""

    targets: tuple[int, ...]

    def __init__(self, targets):
        object.__setattr__(self, "targets", tuple(int(t) for t in targets))


@dataclass(frozen=True)
class XorOracle:
    """|X>|r> -> |X>|r xor f(X)> with ``f`` given as a lookup table."""

    table: tuple[int, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __init__(self, table, inputs, outputs):
        object.__setattr__(self, "table", tuple(int(v) for v in table))
        object.__setattr__(self, "inputs", tuple(int(q) for q in inputs))
        object.__setattr__(self, "outputs", tuple(int(q) for q in outputs))


@dataclass(frozen=True)
class PhaseFlip:
    """Multiply the amplitude of one basis state by -1."""

    index: int


@dataclass(frozen=True)
class Permutation:
    """|x> -> |table[x]> on the full register."""

    table: tuple[int, ...]

    def __init__(self, table):
        object.__setattr__(self, "table", tuple(int(v) for v in table))


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    targets: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __init__(self, targets, matrix):
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "targets", tuple(int(t) for t in targets))
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        return (
            isinstance(other, DenseUnitary)
            and self.targets == other.targets
            and self.matrix.shape == other.matrix.shape
            and bool(np.array_equal(self.matrix, other.matrix))
        )

    def __hash__(self):
        return hash((self.targets, self.matrix.tobytes()))


GateOp = Union[Hadamard, HadamardLayer, XorOracle, PhaseFlip, Permutation, DenseUnitary]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple = ()

    def __init__(self, n_qubits: int, gates: Sequence[GateOp] = ()):
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "gates", tuple(gates))
        for g in self.gates:
            _validate_gate(g, self.n_qubits)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def then(self, other: "Circuit") -> "Circuit":
        """The circuit that runs ``self`` first and ``other`` second."""
        if other.n_qubits != self.n_qubits:
            raise CircuitError("cannot concatenate circuits on different registers")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [_inverse_gate(g) for g in reversed(self.gates)])

    def embed(self, n_total: int) -> "Circuit":
        """Extend to ``n_total`` qubits, acting as identity on the new high qubits."""
        if n_total < self.n_qubits:
            raise CircuitError("embedding must not shrink the register")
        extra = 2 ** (n_total - self.n_qubits)
        old = self.dim
        gates = []
        for g in self.gates:
            if isinstance(g, PhaseFlip):
                gates.extend(PhaseFlip(g.index + k * old) for k in range(extra))
            elif isinstance(g, Permutation):
                tab = np.asarray(g.table)
                gates.append(Permutation(np.concatenate([tab + k * old for k in range(extra)])))
            else:
                gates.append(g)
        return Circuit(n_total, gates)


def _check_qubits(qs, n, what):
    if len(set(qs)) != len(qs):
        raise CircuitError(f"{what}: repeated qubit in {list(qs)}")
    for q in qs:
        if not 0 <= q < n:
            raise CircuitError(f"{what}: qubit {q} outside [0, {n})")


def _validate_gate(g, n: int) -> None:
    dim = 2**n
    if isinstance(g, Hadamard):
        _check_qubits([g.target], n, "h")
    elif isinstance(g, HadamardLayer):
        _check_qubits(g.targets, n, "hlayer")
    elif isinstance(g, XorOracle):
        _check_qubits(g.inputs + g.outputs, n, "xor_oracle")
        if len(g.table) != 2 ** len(g.inputs):
            raise CircuitError(
                f"xor_oracle: table has {len(g.table)} entries, expected {2 ** len(g.inputs)}"
            )
        if g.table and (min(g.table) < 0 or max(g.table) >= 2 ** len(g.outputs)):
            raise CircuitError("xor_oracle: table value does not fit the output register")
    elif isinstance(g, PhaseFlip):
        if not 0 <= g.index < dim:
            raise CircuitError(f"phase_flip: index {g.index} outside [0, {dim})")
    elif isinstance(g, Permutation):
        if sorted(g.table) != list(range(dim)):
            raise CircuitError("perm: table is not a bijection on the register")
    elif isinstance(g, DenseUnitary):
        _check_qubits(g.targets, n, "u")
        k = 2 ** len(g.targets)
        if g.matrix.shape != (k, k):
            raise CircuitError(f"u: matrix shape {g.matrix.shape}, expected {(k, k)}")
        if np.abs(g.matrix.conj().T @ g.matrix - np.eye(k)).max() > 1e-10:
            raise CircuitError("u: matrix is not unitary within 1e-10")
    else:
        raise CircuitError(f"unknown gate {g!r}")


def _inverse_gate(g):
    if isinstance(g, DenseUnitary):
        return DenseUnitary(g.targets, g.matrix.conj().T)
    if isinstance(g, Permutation):
        inv = np.empty(len(g.table), dtype=np.int64)
        inv[np.asarray(g.table)] = np.arange(len(g.table))
        return Permutation(inv)
    return g  # H, H layers, xor oracles and phase flips are involutions


# --------------------------------------------------------------------------
# compilation


def _local_index(idx: np.ndarray, qubits) -> np.ndarray:
    out = np.zeros_like(idx)
    for k, q in enumerate(qubits):
        out |= ((idx >> q) & 1) << k
    return out


def _spread(local: np.ndarray, qubits) -> np.ndarray:
    out = np.zeros_like(local)
    for k, q in enumerate(qubits):
        out |= ((local >> k) & 1) << q
    return out


def _perm_matrix(dest: np.ndarray) -> sp.csr_array:
    n = len(dest)
    return sp.csr_array((np.ones(n, dtype=complex), (dest, np.arange(n))), shape=(n, n))


def _local_unitary(matrix: np.ndarray, targets, n: int) -> sp.csr_array:
    dim = 2**n
    k = 2 ** len(targets)
    idx = np.arange(dim, dtype=np.int64)
    col_local = _local_index(idx, targets)
    mask = _spread(np.array([k - 1], dtype=np.int64), targets)[0]
    base = idx & ~mask
    row_local = np.arange(k, dtype=np.int64)
    rows = (base[:, None] | _spread(row_local, targets)[None, :]).ravel()
    cols = np.repeat(idx, k)
    vals = matrix[row_local[None, :], col_local[:, None]].ravel()
    keep = vals != 0
    return sp.csr_array((vals[keep], (rows[keep], cols[keep])), shape=(dim, dim))


def gate_matrices(g, n: int):
    """Sparse elementary factors of one gate, in application order."""
    dim = 2**n
    idx = np.arange(dim, dtype=np.int64)
    if isinstance(g, Hadamard):
        return [_local_unitary(_H, [g.target], n)]
    if isinstance(g, HadamardLayer):
        return [_local_unitary(_H, [t], n) for t in g.targets]
    if isinstance(g, XorOracle):
        f = np.asarray(g.table, dtype=np.int64)[_local_index(idx, g.inputs)]
        return [_perm_matrix(idx ^ _spread(f, g.outputs))]
    if isinstance(g, PhaseFlip):
        d = np.ones(dim, dtype=complex)
        d[g.index] = -1.0
        return [sp.diags_array(d, format="csr")]
    if isinstance(g, Permutation):
        return [_perm_matrix(np.asarray(g.table, dtype=np.int64))]
    if isinstance(g, DenseUnitary):
        return [_local_unitary(g.matrix, g.targets, n)]
    raise CircuitError(f"unknown gate {g!r}")


def compile_sparse(c: Circuit, max_qubits: int = DEFAULT_MAX_QUBITS) -> sp.csr_array:
    """Sparse unitary of ``c``: the ordered product (last gate leftmost)."""
    if c.n_qubits > max_qubits:
        raise CircuitError(f"{c.n_qubits} qubits exceeds the cap of {max_qubits}")
    acc = sp.eye_array(c.dim, dtype=complex, format="csr")
    for g in c.gates:
        for m in gate_matrices(g, c.n_qubits):
            acc = m @ acc
    acc = sp.csr_array(acc)
    acc.eliminate_zeros()
    return acc


def circuit_unitary(c: Circuit, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    return compile_sparse(c, max_qubits).toarray()


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or len(a) != 2**self.n_qubits:
            raise ValueError(f"{len(a)} amplitudes do not match {self.n_qubits} qubits")
        if abs(np.vdot(a, a).real - 1.0) > 1e-12:
            raise ValueError("state is not normalized within 1e-12")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        a = np.zeros(2**n_qubits, dtype=complex)
        a[0] = 1.0
        return cls(a, n_qubits)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def probabilities(self) -> np.ndarray:
        return normalize_probabilities(np.abs(self.amplitudes) ** 2)


def validate_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise ValueError("density matrix is not Hermitian within 1e-12")
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        raise ValueError("density matrix trace differs from 1 by more than 1e-12")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has an eigenvalue below -1e-10")
    return rho


def basis_density(n_qubits: int, index: int = 0) -> np.ndarray:
    rho = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    rho[index, index] = 1.0
    return rho


def evolve(rho: np.ndarray, U) -> np.ndarray:
    """U rho U^dagger for dense or sparse U."""
    if rho.shape[0] != U.shape[0] or U.shape[0] != U.shape[1]:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, U {U.shape}")
    if sp.issparse(U):
        # U (U rho^+)^+ = U rho U^+, keeping the sparse factor on the left
        return np.asarray(U @ np.asarray(U @ rho.conj().T).conj().T)
    return U @ rho @ U.conj().T


def normalize_probabilities(p: np.ndarray) -> np.ndarray:
    """Clamp round-off negatives to zero and renormalize to sum exactly 1."""
    p = np.asarray(p, dtype=float).copy()
    if p.min(initial=0.0) < -1e-10:
        raise ValueError(f"probability {p.min()} below -1e-10")
    p[p < 0] = 0.0
    total = p.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {total}, not 1 within 1e-10")
    return p / total


def born_distribution(rho: np.ndarray) -> np.ndarray:
    return normalize_probabilities(np.real(np.diagonal(rho)))


# --------------------------------------------------------------------------
# Grover


def grover_circuit(n_qubits: int, marked_index: int, iterations: int) -> Circuit:
    """Uniform superposition followed by ``iterations`` Grover iterations.

    The diffusion step is H^n . PhaseFlip(0) . H^n, which is I - 2|s><s|; it
    differs from the textbook 2|s><s| - I by a global phase only.
    """
    if not 0 <= marked_index < 2**n_qubits:
        raise CircuitError(f"marked index {marked_index} outside [0, {2 ** n_qubits})")
    if iterations < 0:
        raise CircuitError("iterations must be non-negative")
    layer = HadamardLayer(range(n_qubits))
    gates: list = [layer]
    for _ in range(iterations):
        gates += [PhaseFlip(marked_index), layer, PhaseFlip(0), layer]
    return Circuit(n_qubits, gates)


def grover_success_probability(n_qubits: int, iterations: int) -> float:
    theta = np.arcsin(2.0 ** (-n_qubits / 2))
    return float(np.sin((2 * iterations + 1) * theta) ** 2)
