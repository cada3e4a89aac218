"""Built-in instances shared by the property suite, the CLI and the tests."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .history import CircuitSequence
from .state import Circuit, DenseUnitary, Hadamard, circuit_unitary


def haar_unitary(N: int, rng) -> np.ndarray:
    return unitary_group.rvs(N, random_state=rng) if N > 1 else np.exp(2j * np.pi * rng.random((1, 1)))


def random_pure_density(n_qubits: int, rng) -> np.ndarray:
    g = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    g /= np.linalg.norm(g)
    return np.outer(g, g.conj())


def random_circuit(n_qubits: int, depth: int, rng) -> Circuit:
    """Layers of random two-qubit unitaries (or single-qubit ones on one qubit) and Hadamards."""
    gates = []
    for _ in range(depth):
        if n_qubits >= 2 and rng.random() < 0.7:
            pair = rng.choice(n_qubits, size=2, replace=False)
            gates.append(DenseUnitary(pair, haar_unitary(4, rng)))
        elif rng.random() < 0.5:
            gates.append(Hadamard(int(rng.integers(n_qubits))))
        else:
            gates.append(DenseUnitary([int(rng.integers(n_qubits))], haar_unitary(2, rng)))
    return Circuit(n_qubits, gates)


def hadamard_matrix() -> np.ndarray:
    return circuit_unitary(Circuit(1, [Hadamard(0)]))


def h_plus_identity() -> np.ndarray:
    """H on basis states {0, 1}, identity on {2, 3}: blocks {0,1}, {2}, {3}."""
    U = np.eye(4, dtype=complex)
    U[:2, :2] = hadamard_matrix()
    return U


def block_diagonal_unitary(sizes, rng, shuffle: bool = True) -> np.ndarray:
    N = sum(sizes)
    U = np.zeros((N, N), dtype=complex)
    at = 0
    for s in sizes:
        U[at:at + s, at:at + s] = haar_unitary(s, rng)
        at += s
    if shuffle:
        perm = rng.permutation(N)
        P = np.eye(N)[perm]
        U = P @ U @ P.T
    return U


def mixing_state_for_h_plus_identity() -> np.ndarray:
    psi = np.array([1.0, 0.0, 1.0, 0.0]) / np.sqrt(2)
    return np.outer(psi, psi).astype(complex)


def product_state(rng, dims=(2, 2)) -> np.ndarray:
    vecs = []
    for d in dims:
        g = rng.normal(size=d) + 1j * rng.normal(size=d)
        vecs.append(g / np.linalg.norm(g))
    psi = vecs[0]
    for v in vecs[1:]:
        psi = np.kron(psi, v)
    return np.outer(psi, psi.conj())


def bell_state() -> np.ndarray:
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    return np.outer(psi, psi).astype(complex)


def random_instances(count: int, rng, qubits=(2, 3, 4), depth: int = 6):
    """(name, rho, U) triples: random pure state, random circuit."""
    out = []
    for k in range(count):
        n = int(qubits[k % len(qubits)])
        out.append((f"random-{n}q-{k}", random_pure_density(n, rng),
                    circuit_unitary(random_circuit(n, depth, rng))))
    return out


def small_sequences(seed: int = 0) -> dict[str, CircuitSequence]:
    """1-2 qubit sequences with at most three steps."""
    rng = np.random.default_rng(seed)
    H = Circuit(1, [Hadamard(0)])
    seqs = {
        "h": CircuitSequence(1, [H]),
        "h,h": CircuitSequence(1, [H, H]),
        "hh-joint": CircuitSequence(1, [H.then(H)]),
        "h,h,h": CircuitSequence(1, [H, H, H]),
        "u1,u1,u1": CircuitSequence(1, [Circuit(1, [DenseUnitary([0], haar_unitary(2, rng))])
                                        for _ in range(3)]),
        "h1,h0": CircuitSequence(2, [Circuit(2, [Hadamard(1)]), Circuit(2, [Hadamard(0)])]),
        "bell,h0,h1": CircuitSequence(2, [
            Circuit(2, [Hadamard(0), DenseUnitary([0, 1], _cnot())]),
            Circuit(2, [Hadamard(0)]),
            Circuit(2, [Hadamard(1)]),
        ]),
    }
    for k in range(3):
        seqs[f"random-2q-{k}"] = CircuitSequence(2, [random_circuit(2, 3, rng) for _ in range(3)])
    return seqs


def random_structured_unitary(N: int, rng) -> np.ndarray:
    """A unitary from one of several families, most with a sparse support."""
    n = N.bit_length() - 1
    family = rng.integers(4)
    if family == 0:
        return haar_unitary(N, rng)
    if family == 1:
        sizes, left = [], N
        while left:
            s = int(rng.integers(1, left + 1))
            sizes.append(s)
            left -= s
        return block_diagonal_unitary(sizes, rng)
    if family == 2:
        return circuit_unitary(random_circuit(n, int(rng.integers(1, 4)), rng))
    P = np.eye(N)[rng.permutation(N)]
    Q = np.eye(N)[rng.permutation(N)]
    hs = [Hadamard(int(q)) for q in np.flatnonzero(rng.random(n) < 0.5)]
    return Q @ circuit_unitary(Circuit(n, hs)) @ P


def random_sparse_pure_density(n_qubits: int, rng) -> np.ndarray:
    """Random pure state supported on a random nonempty subset of the basis."""
    N = 2**n_qubits
    g = rng.normal(size=N) + 1j * rng.normal(size=N)
    keep = rng.random(N) < rng.random()
    keep[rng.integers(N)] = True
    g = np.where(keep, g, 0)
    g /= np.linalg.norm(g)
    return np.outer(g, g.conj())


def _cnot() -> np.ndarray:
    # control qubit 0 (local bit 0), target qubit 1 (local bit 1)
    M = np.eye(4, dtype=complex)
    M[[1, 3]] = M[[3, 1]]
    return M


__all__ = [
    "bell_state",
    "block_diagonal_unitary",
    "h_plus_identity",
    "hadamard_matrix",
    "haar_unitary",
    "mixing_state_for_h_plus_identity",
    "product_state",
    "random_circuit",
    "random_instances",
    "random_pure_density",
    "random_sparse_pure_density",
    "random_structured_unitary",
    "small_sequences",
]
