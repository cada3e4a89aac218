import numpy as np

from dqmsim import corpus
from dqmsim.suite import CheckRow, flow_randomized, run_property_suite


def test_row_status():
    assert CheckRow("p", "sd", "i", 0.1, 1.0, "pass").status == "pass"
    assert CheckRow("p", "sd", "i", 2.0, 1.0, "pass").status == "FAIL"
    assert CheckRow("p", "pd", "i", 2.0, 1.0, "fail").status == "expected-fail: pass"
    assert CheckRow("p", "pd", "i", 0.5, 1.0, "fail").status == "expected-fail: FAIL"
    assert CheckRow("p", "sd", "i", 9.0, 0.0, "report").ok


def test_sd_suite_is_green():
    rows = run_property_suite(["sd"], seed=1, flow_instances=20)
    bad = [r for r in rows if not r.ok]
    assert bad == []


def test_dd_same_relabeling_rows_pass():
    rows = run_property_suite(["dd"], seed=0, flow_instances=5)
    same = [r for r in rows if r.property == "symmetry-same-perm"]
    assert same and all(r.ok for r in same)


def test_flow_randomized_small():
    assert flow_randomized(30, np.random.default_rng(0)) == 0


def test_structured_unitaries_are_unitary():
    rng = np.random.default_rng(1)
    for N in (4, 8, 16):
        for _ in range(10):
            U = corpus.random_structured_unitary(N, rng)
            np.testing.assert_allclose(U.conj().T @ U, np.eye(N), atol=1e-10)


def test_corpus_sequences_are_small():
    for name, seq in corpus.small_sequences(0).items():
        assert seq.n_qubits <= 2 and 1 <= len(seq) <= 3, name
