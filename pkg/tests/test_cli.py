import csv
import io
import json

import numpy as np
import pytest

from dqmsim.cli import main, parse_state, RunConfig, InputError


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


H = {"g": "h", "t": 0}


@pytest.fixture
def h_file(tmp_path):
    return _write(tmp_path, "h.json", {"qubits": 1, "sequence": [[H]]})


@pytest.fixture
def hh_file(tmp_path):
    return _write(tmp_path, "hh.json", {"qubits": 1, "sequence": [[H], [H]]})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _matrix(text):
    return np.array([[float(x) for x in line.split()] for line in text.splitlines()
                     if line and not line.startswith("#") and not line[0].isalpha()])


def test_dynamics_hadamard_sd(capsys, h_file):
    code, out, _ = run(capsys, "dynamics", h_file, "--model", "sd")
    assert code == 0
    S = _matrix(out)
    np.testing.assert_allclose(S[:, 0], [0.5, 0.5], atol=1e-12)
    assert "S[j][i] = Pr(j after U | i before U)" in out
    assert "marginalization" in out and "symmetry" in out and "locality" in out


def test_dynamics_identity(capsys, tmp_path):
    f = _write(tmp_path, "i.json", {"qubits": 1, "sequence": [[]]})
    code, out, _ = run(capsys, "dynamics", f, "--state", "plus")
    assert code == 0
    np.testing.assert_array_equal(_matrix(out), np.eye(2))


def test_dynamics_malformed_gate_exit_2(capsys, tmp_path):
    f = _write(tmp_path, "bad.json", {"qubits": 1, "sequence": [[{"g": "h", "q": 0}]]})
    code, _, err = run(capsys, "dynamics", f)
    assert code == 2 and "sequence[0][0]" in err


def test_dynamics_nonconvergence_exit_3(capsys, tmp_path):
    rng = np.random.default_rng(0)
    from dqmsim.corpus import haar_unitary
    U = haar_unitary(4, rng)
    m = [[[float(z.real), float(z.imag)] for z in row] for row in U]
    f = _write(tmp_path, "u.json", {"qubits": 2, "sequence": [[{"g": "u", "targets": [0, 1], "matrix": m}]]})
    code, _, err = run(capsys, "dynamics", f, "--state", "random:1", "--tol", "1e-15", "--max-iter", "2")
    assert code == 3 and "converge" in err


def test_dynamics_requires_single_circuit(capsys, hh_file):
    assert run(capsys, "dynamics", hh_file)[0] == 2


def test_sample_records(capsys, hh_file):
    code, out, _ = run(capsys, "sample", hh_file, "--shots", "50", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    header = json.loads(lines[0])
    assert header["config"]["shots"] == 50 and header["steps"] == 2
    assert header["born"] == [[1, 0], [0.5, 0.5], [1, 0]]
    recs = [json.loads(x) for x in lines[1:]]
    assert [r["shot"] for r in recs] == list(range(50))
    assert all(r["history"][1] == 0 for r in recs)


def test_sample_deterministic_and_thread_independent(capsys, hh_file):
    a = run(capsys, "sample", hh_file, "--shots", "30", "--seed", "1")[1]
    b = run(capsys, "sample", hh_file, "--shots", "30", "--seed", "1")[1]
    c = run(capsys, "sample", hh_file, "--shots", "30", "--seed", "1", "--threads", "4")[1]
    assert a == b == c


def test_sample_empty_sequence_exit_2(capsys, tmp_path):
    f = _write(tmp_path, "e.json", {"qubits": 1, "sequence": []})
    assert run(capsys, "sample", f)[0] == 2


def test_missing_file_exit_2(capsys, tmp_path):
    assert run(capsys, "sample", str(tmp_path / "nope.json"))[0] == 2


def test_bad_config_exit_2(capsys, h_file):
    assert run(capsys, "sample", h_file, "--shots", "0")[0] == 2
    assert run(capsys, "sample", h_file, "--model", "xd")[0] == 2


def test_out_file_and_output_dir(capsys, hh_file, tmp_path, monkeypatch):
    target = tmp_path / "o.jsonl"
    assert run(capsys, "sample", hh_file, "--shots", "3", "--out", str(target))[0] == 0
    assert len(target.read_text().splitlines()) == 4
    monkeypatch.setenv("DQMSIM_OUTPUT_DIR", str(tmp_path / "outdir"))
    assert run(capsys, "sample", hh_file, "--shots", "3", "--out", "rel.jsonl")[0] == 0
    assert (tmp_path / "outdir" / "rel.jsonl").read_text() == target.read_text()


def test_check_sd_only(capsys):
    code, out, _ = run(capsys, "check", "--models", "sd", "--flow-instances", "30")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert {r["property"] for r in rows} >= {"marginalization", "symmetry", "locality", "robustness",
                                               "commutativity", "flow-condition"}
    assert all(r["status"] in ("pass", "report") for r in rows)


def test_check_expected_failure_rows(capsys):
    _, out, _ = run(capsys, "check", "--models", "pd,dd", "--flow-instances", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    pd_loc = [r for r in rows if r["property"] == "locality" and r["model"] == "pd" and r["instance"] == "h+i"]
    dd_rob = [r for r in rows if r["property"] == "robustness" and r["model"] == "dd"]
    assert pd_loc[0]["status"] == "expected-fail: pass"
    assert dd_rob[0]["status"] == "expected-fail: pass"


@pytest.mark.parametrize("gen,verdict", [("identical", "close"), ("disjoint", "far")])
def test_collision_demo(capsys, gen, verdict):
    code, out, _ = run(capsys, "collision-demo", "--gen", gen, "--n", "3", "--shots", "300")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and row["verdict"] == verdict and "flip_rate" in row


def test_collision_demo_two_to_one(capsys):
    code, out, _ = run(capsys, "collision-demo", "--gen", "two-to-one", "--n", "3", "--shots", "10")
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["verdict"] == "close" and row["path"] == "hashed" and float(row["flip_rate"]) > 0


def test_collision_demo_pair_file(capsys, tmp_path):
    f = _write(tmp_path, "pair.json", {"n": 1, "p0": [0, 1], "p1": [2, 3]})
    code, out, _ = run(capsys, "collision-demo", "--pair", f, "--shots", "100")
    assert code == 0 and next(csv.DictReader(io.StringIO(out)))["verdict"] == "far"
    assert run(capsys, "collision-demo", "--shots", "5")[0] == 2


def test_search_demo_n4(capsys):
    code, out, _ = run(capsys, "search-demo", "--N", "4", "--grover-iters", "1", "--shots", "200")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "N,queries,juggle_rounds,shots,success,stderr"
    assert lines[1] == "4,1,0,200,1,0"
    assert run(capsys, "search-demo", "--N", "6")[0] == 2


def test_bench_search_header_and_determinism(capsys):
    args = ("bench-search", "--Ns", "4,16", "--shots", "100", "--seed", "2")
    a = run(capsys, *args)[1]
    assert a.splitlines()[0] == "N,queries,juggle_rounds,shots,success,stderr"
    assert len(a.splitlines()) == 5
    assert a == run(capsys, *args, "--threads", "3")[1]


def test_parse_state():
    assert parse_state("basis:2", 2)[2, 2] == 1
    assert np.trace(parse_state("random:4", 2)) == pytest.approx(1)
    np.testing.assert_allclose(parse_state("mixed", 1), np.eye(2) / 2)
    for bad in ("basis:9", "basis:x", "what"):
        with pytest.raises(InputError):
            parse_state(bad, 2)


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig(shots=0)
    with pytest.raises(InputError):
        RunConfig(tol=0)
    assert RunConfig().params.tol == 1e-10
