import numpy as np
import pytest

from dqmsim import corpus
from dqmsim.history import (
    CircuitSequence,
    compile_sequence,
    empirical_history_law,
    enumerate_history_law,
    exact_history_law,
    marginal_deviation,
    markov_property_check,
    sample_batch,
    sample_history,
    total_variation,
)
from dqmsim.dynamics import transition
from dqmsim.state import Circuit, Hadamard, basis_density, circuit_unitary, evolve

H1 = Circuit(1, [Hadamard(0)])


def test_sequence_validation():
    with pytest.raises(ValueError):
        CircuitSequence(1, [])
    with pytest.raises(ValueError):
        CircuitSequence(1, [Circuit(2, [])])


def test_separate_hadamards_under_sd():
    seq = CircuitSequence(1, [H1, H1])
    batch = sample_batch(seq, "sd", 2000, seed=3)
    assert np.all(batch.values[:, 1] == 0)
    assert 0.45 < batch.marginals[0][1] < 0.55


def test_exact_law_separate_hadamards_by_hand():
    law = exact_history_law(compile_sequence(CircuitSequence(1, [H1, H1]), "sd"))
    np.testing.assert_allclose(law, [[0.5, 0], [0.5, 0]], atol=1e-12)


def test_exact_law_pd_is_product_of_born():
    seq = corpus.small_sequences(1)["random-2q-0"]
    comp = compile_sequence(seq, "pd")
    law = exact_history_law(comp)
    b = comp.born[1:]
    np.testing.assert_allclose(law, np.einsum("i,j,k->ijk", *b), atol=1e-14)


@pytest.mark.parametrize("kind", ["pd", "dd", "sd"])
def test_compiled_transitions_match_dense_dynamics(kind):
    # independent route: evolve dense density matrices step by step
    seq = corpus.small_sequences(2)["bell,h0,h1"]
    comp = compile_sequence(seq, kind)
    rho = basis_density(2)
    for k, c in enumerate(seq.circuits):
        U = circuit_unitary(c)
        np.testing.assert_allclose(comp.dense_transition(k), np.asarray(transition(kind, rho, U)), atol=1e-9)
        rho = evolve(rho, U)


def test_vectorized_law_matches_enumeration():
    comp = compile_sequence(corpus.small_sequences(0)["random-2q-1"], "sd")
    law = exact_history_law(comp)
    for hist, p in enumerate_history_law(comp).items():
        assert abs(law[hist] - p) < 1e-14
    assert law.sum() == pytest.approx(1, abs=1e-12)


def test_threads_do_not_change_results():
    seq = corpus.small_sequences(0)["h,h,h"]
    a = sample_batch(seq, "sd", 1003, seed=11, threads=1)
    b = sample_batch(seq, "sd", 1003, seed=11, threads=4)
    assert a == b
    assert a != sample_batch(seq, "sd", 1003, seed=12)


def test_prefix_stability():
    # shot s depends on (seed, s) only
    seq = corpus.small_sequences(0)["u1,u1,u1"]
    a = sample_batch(seq, "dd", 50, seed=5)
    b = sample_batch(seq, "dd", 20, seed=5)
    np.testing.assert_array_equal(a.values[:20], b.values)


def test_shots_must_be_positive():
    with pytest.raises(ValueError):
        sample_batch(CircuitSequence(1, [H1]), "sd", 0, seed=0)


def test_sample_history_single():
    h = sample_history(CircuitSequence(1, [H1, H1]), "sd", np.random.default_rng(0))
    assert len(h) == 2 and h.values[1] == 0


def test_marginals_follow_born():
    seq = corpus.small_sequences(0)["random-2q-2"]
    comp = compile_sequence(seq, "sd")
    batch = sample_batch(seq, "sd", 20000, seed=1, compiled=comp)
    assert max(marginal_deviation(batch, comp)) < 0.02
    assert max(marginal_deviation(batch, seq)) < 0.02


def test_empirical_law_and_tv():
    seq = CircuitSequence(1, [H1])
    batch = sample_batch(seq, "pd", 4000, seed=2)
    emp = empirical_history_law(batch, 2)
    assert total_variation(emp, [0.5, 0.5]) < 0.03
    assert total_variation([1, 0], [0, 1]) == 1


def test_markov_property():
    seq = corpus.small_sequences(0)["h,h,h"]
    res = markov_property_check(seq, "sd", 20000, seed=4)
    assert res.cells_used > 0
    assert res.max_conditional_gap < 0.05
    assert res.joint_tv < 0.02
    with pytest.raises(ValueError):
        markov_property_check(CircuitSequence(1, [H1]), "sd", 10, seed=0)
