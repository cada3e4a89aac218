"""Command-line harness: ``dqmsim {dynamics,sample,check,collision-demo,search-demo,bench-search}``.

Exit codes: 0 success, 1 property-suite failure, 2 invalid input, 3 numerical
non-convergence.  Floats are written with 17 significant digits so that a
fixed seed gives byte-identical output.  If ``DQMSIM_OUTPUT_DIR`` is set,
relative ``--out`` paths are resolved against it.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import algorithms, circuit_io, suite
from .blocks import DEFAULT_ZERO_TOL
from .checks import check_locality, check_symmetry, random_permutation
from .dynamics import DynamicsKind, DynamicsParams, check_marginalization, transition
from .history import compile_sequence, sample_batch
from .scaling import DEFAULT_MAX_ITER, DEFAULT_TOL, NonConvergence
from .state import DEFAULT_MAX_QUBITS, CircuitError, basis_density, circuit_unitary, validate_density

EXIT_OK, EXIT_SUITE, EXIT_INPUT, EXIT_NONCONVERGENCE = 0, 1, 2, 3
OUTPUT_DIR_ENV = "DQMSIM_OUTPUT_DIR"


class InputError(ValueError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    model: DynamicsKind = DynamicsKind.SD
    seed: int = 0
    shots: int = 1000
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    zero_tol: float = DEFAULT_ZERO_TOL
    max_qubits: int = DEFAULT_MAX_QUBITS
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise InputError("--shots must be at least 1")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.max_iter < 1 or self.threads < 1 or self.max_qubits < 1:
            raise InputError("--max-iter, --threads and --max-qubits must be positive")

    @property
    def params(self) -> DynamicsParams:
        return DynamicsParams(self.tol, self.max_iter, self.zero_tol)

    def echo(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        del d["out"], d["threads"]  # not part of the result
        return d

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        try:
            model = DynamicsKind.parse(args.model)
        except ValueError:
            raise InputError(f"unknown model {args.model!r}") from None
        return cls(model, args.seed, args.shots, args.tol, args.max_iter, args.zero_tol,
                   args.max_qubits, args.threads, args.out)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
        return
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, path)
    with open(path, "w", newline="") as fh:
        yield fh


def parse_state(spec: str, n_qubits: int) -> np.ndarray:
    """``zero``, ``basis:K``, ``plus`` (uniform superposition), ``mixed`` or ``random:SEED``."""
    N = 2**n_qubits
    name, _, arg = spec.partition(":")
    try:
        if name == "zero":
            return basis_density(n_qubits, 0)
        if name == "basis":
            k = int(arg)
            if not 0 <= k < N:
                raise InputError(f"basis index {k} out of range for {n_qubits} qubits")
            return basis_density(n_qubits, k)
        if name == "plus":
            return np.full((N, N), 1.0 / N, dtype=complex)
        if name == "mixed":
            return np.eye(N, dtype=complex) / N
        if name == "random":
            rng = np.random.default_rng(int(arg))
            g = rng.normal(size=N) + 1j * rng.normal(size=N)
            g /= np.linalg.norm(g)
            return validate_density(np.outer(g, g.conj()))
    except ValueError as err:
        if isinstance(err, InputError):
            raise
        raise InputError(f"bad state spec {spec!r}: {err}") from None
    raise InputError(f"unknown state spec {spec!r}")


def _load_sequence(path):
    if path == "-":
        return circuit_io.loads(sys.stdin.read())
    try:
        return circuit_io.load(path)
    except OSError as err:
        raise InputError(f"{path}: {err.strerror}") from None


def cmd_dynamics(args, cfg: RunConfig, out) -> int:
    seq = _load_sequence(args.circuit)
    if len(seq) != 1:
        raise InputError(f"dynamics needs a single-circuit document, got {len(seq)} circuits")
    U = circuit_unitary(seq.circuits[0], cfg.max_qubits)
    rho = parse_state(args.state, seq.n_qubits)
    S = transition(cfg.model, rho, U, cfg.params)
    N = U.shape[0]
    rng = np.random.default_rng(cfg.seed)
    P, Q = random_permutation(N, rng), random_permutation(N, rng)
    out.write(f"# model {cfg.model.value}; state {args.state}; N {N}\n")
    out.write("# S[j][i] = Pr(j after U | i before U); row j, column i; columns sum to 1\n")
    for row in np.asarray(S):
        out.write(" ".join(fmt(x) for x in row) + "\n")
    out.write(f"marginalization {fmt(check_marginalization(S, rho, U))}\n")
    out.write(f"symmetry {fmt(check_symmetry(cfg.model, rho, U, P, Q, cfg.params))}\n")
    out.write(f"locality {fmt(check_locality(cfg.model, rho, U, cfg.zero_tol, cfg.params))}\n")
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig, out) -> int:
    seq = _load_sequence(args.circuit)
    compiled = compile_sequence(seq, cfg.model, cfg.params, cfg.max_qubits)
    batch = sample_batch(seq, cfg.model, cfg.shots, cfg.seed, cfg.params, threads=cfg.threads,
                         compiled=compiled)
    header = {"config": cfg.echo(), "qubits": seq.n_qubits, "steps": len(seq)}
    # born[k] is the distribution after step k; born[0] is the initial state
    born = ",".join("[" + ",".join(fmt(x) for x in b) + "]" for b in compiled.born)
    out.write(json.dumps(header, separators=(",", ":"))[:-1] + f',"born":[{born}]}}\n')
    for s, row in enumerate(batch.values):
        out.write(json.dumps({"shot": s, "history": [int(v) for v in row]}, separators=(",", ":")) + "\n")
    return EXIT_OK


def _csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_check(args, cfg: RunConfig, out) -> int:
    models = [DynamicsKind.parse(m) for m in args.models.split(",")] if args.models else list(DynamicsKind)
    rows = suite.run_property_suite(models, cfg.seed, cfg.params, flow_instances=args.flow_instances)
    _csv(out, ["property", "model", "instance", "residual", "threshold", "expect", "status"],
         [[r.property, r.model, r.instance, fmt(r.residual), fmt(r.threshold), r.expect, r.status]
          for r in rows])
    return EXIT_OK if all(r.ok for r in rows) else EXIT_SUITE


def _load_pair(path) -> algorithms.DistributionPair:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        return algorithms.DistributionPair(doc["n"], doc["p0"], doc["p1"], doc.get("eps", 0.1))
    except OSError as err:
        raise InputError(f"{path}: {err.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as err:
        raise InputError(f"{path}: bad pair document ({err})") from None


def cmd_collision_demo(args, cfg: RunConfig, out) -> int:
    if (args.gen is None) == (args.pair is None):
        raise InputError("give exactly one of --gen or --pair")
    if args.pair is not None:
        pair, source = _load_pair(args.pair), args.pair
    else:
        pair, source = algorithms.generate_pair(args.gen, args.n, cfg.seed), args.gen
    reps = args.repetitions if args.repetitions is not None else cfg.shots
    v = algorithms.collision_decide(pair, cfg.model, reps, cfg.seed, cfg.params, path=args.path,
                                    threads=cfg.threads, max_qubits=cfg.max_qubits)
    _csv(out, ["instance", "n", "model", "path", "repetitions", "flips", "flip_rate",
               "statistical_difference", "verdict"],
         [[source, pair.n, cfg.model.value, v.path, v.repetitions, sum(v.flip_counts),
           fmt(v.flip_fraction), fmt(algorithms.statistical_difference(pair)), v.verdict]])
    return EXIT_OK


BENCH_HEADER = ["N", "queries", "juggle_rounds", "shots", "success", "stderr"]


def _bench_rows(rows):
    return [[r["N"], r["queries"], r["juggle_rounds"], r["shots"], fmt(r["success"]), fmt(r["stderr"])]
            for r in rows]


def cmd_search_demo(args, cfg: RunConfig, out) -> int:
    n = args.N.bit_length() - 1
    if args.N < 2 or 2**n != args.N:
        raise InputError(f"N = {args.N} is not a power of two >= 2")
    marked = args.marked if args.marked is not None else int(np.random.default_rng(cfg.seed).integers(args.N))
    if not 0 <= marked < args.N:
        raise InputError(f"marked item {marked} out of range")
    setup = algorithms.build_search_sequence(n, marked, args.grover_iters, args.juggle_rounds, cfg.seed,
                                             max_qubits=cfg.max_qubits)
    stats = algorithms.search_decide(setup, cfg.model, cfg.shots, cfg.seed, cfg.params, cfg.threads,
                                     cfg.max_qubits)
    _csv(out, BENCH_HEADER, _bench_rows([{
        "N": args.N, "queries": setup.queries, "juggle_rounds": setup.juggle_rounds,
        "shots": cfg.shots, "success": stats.success_fraction, "stderr": stats.stderr}]))
    return EXIT_OK


def cmd_bench_search(args, cfg: RunConfig, out) -> int:
    try:
        Ns = [int(x) for x in args.Ns.split(",")]
        fractions = [float(x) for x in args.fractions.split(",")]
    except ValueError:
        raise InputError("--Ns and --fractions take comma-separated numbers") from None
    rows = algorithms.search_scaling_bench(Ns, cfg.model, cfg.shots, cfg.seed, args.c, args.juggle_factor,
                                           cfg.params, cfg.threads, fractions, cfg.max_qubits)
    _csv(out, BENCH_HEADER, _bench_rows(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="sd", help="pd, dd or sd")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--shots", type=int, default=1000)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    common.add_argument("--zero-tol", type=float, default=DEFAULT_ZERO_TOL)
    common.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="dqmsim", description="Hidden-variable dynamics simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dynamics", parents=[common], help="print one transition matrix")
    d.add_argument("circuit", help="circuit document (JSON), or - for stdin")
    d.add_argument("--state", default="zero", help="zero, basis:K, plus, mixed or random:SEED")
    d.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("sample", parents=[common], help="sample histories as JSONL")
    s.add_argument("circuit")
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("check", parents=[common], help="run the property suite")
    c.add_argument("--models", default=None, help="comma-separated subset of pd,dd,sd")
    c.add_argument("--flow-instances", type=int, default=200)
    c.set_defaults(func=cmd_check)

    col = sub.add_parser("collision-demo", parents=[common], help="decide close/far for a pair")
    col.add_argument("--gen", choices=["identical", "disjoint", "two-to-one", "two-to-one-disjoint"])
    col.add_argument("--pair", help='JSON file {"n": .., "p0": [..], "p1": [..], "eps": ..}')
    col.add_argument("--n", type=int, default=3)
    col.add_argument("--repetitions", type=int, default=None, help="default: --shots")
    col.add_argument("--path", choices=["one-to-one", "hashed"], default=None)
    col.set_defaults(func=cmd_collision_demo)

    sd = sub.add_parser("search-demo", parents=[common], help="one search configuration")
    sd.add_argument("--N", type=int, default=64)
    sd.add_argument("--marked", type=int, default=None)
    sd.add_argument("--grover-iters", type=int, default=None)
    sd.add_argument("--juggle-rounds", type=int, default=0)
    sd.set_defaults(func=cmd_search_demo)

    b = sub.add_parser("bench-search", parents=[common], help="success fraction against budget")
    b.add_argument("--Ns", default="4,16,64,256")
    b.add_argument("--c", type=float, default=1.0)
    b.add_argument("--juggle-factor", type=int, default=2)
    b.add_argument("--fractions", default="1.0,0.5")
    b.set_defaults(func=cmd_bench_search)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        buf = io.StringIO()
        code = args.func(args, cfg, buf)
        with _output(cfg.out) as out:
            out.write(buf.getvalue())
        return code
    except NonConvergence as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (InputError, circuit_io.DocumentError, CircuitError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
