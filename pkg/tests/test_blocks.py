import numpy as np
import scipy.sparse as sp

from dqmsim import corpus
from dqmsim.blocks import minimal_blocks, partition_from_sets
from dqmsim.state import Circuit, Hadamard, circuit_unitary, compile_sparse


def test_identity_gives_singletons():
    assert minimal_blocks(np.eye(4)).as_sets() == [{0}, {1}, {2}, {3}]


def test_hadamard_on_high_qubit():
    U = circuit_unitary(Circuit(2, [Hadamard(1)]))
    assert sorted(map(sorted, minimal_blocks(U).as_sets())) == [[0, 2], [1, 3]]


def test_full_support_is_one_block(rng):
    assert minimal_blocks(corpus.haar_unitary(8, rng)).n_blocks == 1


def test_sparse_and_dense_agree(rng):
    c = Circuit(3, [Hadamard(0), Hadamard(2)])
    assert minimal_blocks(compile_sparse(c)) == minimal_blocks(circuit_unitary(c))


def test_zero_tol_drops_tiny_couplings():
    U = np.eye(2, dtype=complex)
    U[0, 1] = U[1, 0] = 1e-13
    assert minimal_blocks(U).n_blocks == 2
    assert minimal_blocks(U, zero_tol=1e-14).n_blocks == 1


def test_shuffled_block_diagonal_recovers_sizes(rng):
    U = corpus.block_diagonal_unitary([3, 1, 4], rng)
    sizes = sorted(len(b) for b in minimal_blocks(U).blocks)
    assert sizes == [1, 3, 4]


def test_blocks_are_closed_under_support(rng):
    for _ in range(20):
        U = corpus.random_structured_unitary(8, rng)
        part = minimal_blocks(U)
        lab = part.labels
        nz = np.argwhere(np.abs(U) > 1e-12)
        assert np.all(lab[nz[:, 0]] == lab[nz[:, 1]])


def test_partition_from_sets_round_trip():
    part = partition_from_sets([{0, 3}, {1}, {2}], 4)
    assert part.as_sets() == [{0, 3}, {1}, {2}]
    assert sp.issparse(sp.csr_array(np.eye(2))) and part.n_blocks == 3
