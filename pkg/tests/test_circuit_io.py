import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqmsim import circuit_io, corpus
from dqmsim.circuit_io import DocumentError
from dqmsim.history import CircuitSequence
from dqmsim.state import Circuit, HadamardLayer, Permutation, PhaseFlip, XorOracle


def _doc(*circuits, qubits=1):
    return json.dumps({"qubits": qubits, "sequence": list(circuits)})


def test_parse_minimal():
    seq = circuit_io.loads(_doc([{"g": "h", "t": 0}], [{"g": "h", "t": 0}]))
    assert len(seq) == 2 and seq.n_qubits == 1


def test_every_gate_kind_round_trips(rng):
    c = Circuit(3, [
        HadamardLayer([0, 2]),
        XorOracle([1, 0], [0], [1]),
        PhaseFlip(5),
        Permutation(rng.permutation(8)),
    ]).then(corpus.random_circuit(3, 3, rng))
    seq = CircuitSequence(3, [c, c.inverse()])
    again = circuit_io.loads(circuit_io.dumps(seq))
    assert again == seq
    assert circuit_io.dumps(again) == circuit_io.dumps(seq)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_round_trip_property(n, T, seed):
    rng = np.random.default_rng(seed)
    seq = CircuitSequence(n, [corpus.random_circuit(n, 3, rng) for _ in range(T)])
    assert circuit_io.parse_document(circuit_io.to_document(seq)) == seq


@pytest.mark.parametrize("text,fragment", [
    (_doc([{"g": "hx", "t": 0}]), "sequence[0][0].g"),
    (_doc([{"g": "h"}]), "sequence[0][0].t"),
    (_doc([{"g": "h", "t": 0, "x": 1}]), "unexpected fields"),
    (_doc([{"g": "h", "t": "0"}]), "expected an integer"),
    (_doc([{"g": "h", "t": 3}]), "sequence[0]"),
    (_doc([{"g": "u", "targets": [0], "matrix": [[1, 0], [0, 1]]}]), "matrix"),
    (json.dumps({"qubits": 1, "sequence": []}), "non-empty"),
    (json.dumps({"sequence": [[]]}), "qubits"),
    (json.dumps([1, 2]), "document must be an object"),
])
def test_error_diagnostics(text, fragment):
    with pytest.raises(DocumentError) as info:
        circuit_io.loads(text)
    assert fragment in str(info.value)


def test_syntax_error_reports_line_and_column():
    with pytest.raises(DocumentError, match=r"line 2, column \d+"):
        circuit_io.loads('{"qubits": 1,\n "sequence": [[{"g": "h", "t": 0]]}')


def test_load_from_file(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(_doc([{"g": "h", "t": 0}]))
    assert circuit_io.load(f).n_qubits == 1
