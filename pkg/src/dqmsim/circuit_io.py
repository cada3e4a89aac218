"""JSON circuit documents.

Grammar::

    {"qubits": n,
     "sequence": [[gate, ...], ...]}      # one list of gates per circuit

    gate := {"g": "h", "t": q}
          | {"g": "hlayer", "ts": [q, ...]}
          | {"g": "xor_oracle", "table": [v, ...], "in": [q, ...], "out": [q, ...]}
          | {"g": "phase_flip", "index": j}
          | {"g": "perm", "table": [x, ...]}
          | {"g": "u", "targets": [q, ...], "matrix": [[[re, im], ...], ...]}
"""
from __future__ import annotations

import json

import numpy as np

from .history import CircuitSequence
from .state import (
    Circuit,
    CircuitError,
    DenseUnitary,
    Hadamard,
    HadamardLayer,
    Permutation,
    PhaseFlip,
    XorOracle,
)

_FIELDS = {
    "h": ("t",),
    "hlayer": ("ts",),
    "xor_oracle": ("table", "in", "out"),
    "phase_flip": ("index",),
    "perm": ("table",),
    "u": ("targets", "matrix"),
}


class DocumentError(ValueError):
    pass


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, int):
        raise DocumentError(f"{where}: expected an integer, got {v!r}")
    return v


def _ints(v, where):
    if not isinstance(v, list):
        raise DocumentError(f"{where}: expected a list of integers")
    return [_int(x, f"{where}[{k}]") for k, x in enumerate(v)]


def _matrix(v, where):
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise DocumentError(f"{where}: expected rows of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise DocumentError(f"{where}: expected a square matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_gate(rec, where: str):
    if not isinstance(rec, dict):
        raise DocumentError(f"{where}: gate record must be an object")
    name = rec.get("g")
    if name not in _FIELDS:
        raise DocumentError(f"{where}.g: unknown gate {name!r}")
    for f in _FIELDS[name]:
        if f not in rec:
            raise DocumentError(f"{where}.{f}: missing field for gate {name!r}")
    extra = set(rec) - set(_FIELDS[name]) - {"g"}
    if extra:
        raise DocumentError(f"{where}: unexpected fields {sorted(extra)}")
    if name == "h":
        return Hadamard(_int(rec["t"], f"{where}.t"))
    if name == "hlayer":
        return HadamardLayer(_ints(rec["ts"], f"{where}.ts"))
    if name == "xor_oracle":
        return XorOracle(_ints(rec["table"], f"{where}.table"), _ints(rec["in"], f"{where}.in"),
                         _ints(rec["out"], f"{where}.out"))
    if name == "phase_flip":
        return PhaseFlip(_int(rec["index"], f"{where}.index"))
    if name == "perm":
        return Permutation(_ints(rec["table"], f"{where}.table"))
    return DenseUnitary(_ints(rec["targets"], f"{where}.targets"), _matrix(rec["matrix"], f"{where}.matrix"))


def parse_document(doc) -> CircuitSequence:
    if not isinstance(doc, dict):
        raise DocumentError("document must be an object with 'qubits' and 'sequence'")
    for f in ("qubits", "sequence"):
        if f not in doc:
            raise DocumentError(f"{f}: missing field")
    n = _int(doc["qubits"], "qubits")
    if n < 1:
        raise DocumentError("qubits: must be at least 1")
    seq = doc["sequence"]
    if not isinstance(seq, list) or not seq:
        raise DocumentError("sequence: expected a non-empty list of circuits")
    circuits = []
    for k, gates in enumerate(seq):
        if not isinstance(gates, list):
            raise DocumentError(f"sequence[{k}]: expected a list of gate records")
        ops = [parse_gate(rec, f"sequence[{k}][{m}]") for m, rec in enumerate(gates)]
        try:
            circuits.append(Circuit(n, ops))
        except CircuitError as err:
            raise DocumentError(f"sequence[{k}]: {err}") from None
    return CircuitSequence(n, circuits)


def loads(text: str) -> CircuitSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentError(f"line {err.lineno}, column {err.colno}: {err.msg}") from None
    return parse_document(doc)


def load(path) -> CircuitSequence:
    with open(path) as fh:
        return loads(fh.read())


def gate_record(g) -> dict:
    if isinstance(g, Hadamard):
        return {"g": "h", "t": g.target}
    if isinstance(g, HadamardLayer):
        return {"g": "hlayer", "ts": list(g.targets)}
    if isinstance(g, XorOracle):
        return {"g": "xor_oracle", "table": list(g.table), "in": list(g.inputs), "out": list(g.outputs)}
    if isinstance(g, PhaseFlip):
        return {"g": "phase_flip", "index": g.index}
    if isinstance(g, Permutation):
        return {"g": "perm", "table": list(g.table)}
    if isinstance(g, DenseUnitary):
        m = g.matrix
        return {"g": "u", "targets": list(g.targets),
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
    raise CircuitError(f"cannot serialize {g!r}")


def to_document(seq: CircuitSequence) -> dict:
    return {"qubits": seq.n_qubits, "sequence": [[gate_record(g) for g in c.gates] for c in seq.circuits]}


def dumps(seq: CircuitSequence) -> str:
    return json.dumps(to_document(seq), indent=1)
