"""Command-line driver: compile, simulate, random, bench, score."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ir import emit_qasm


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_compile(a) -> dict:
    from .compiler import compile_circuit
    from .pack import BiasWeights
    from .validation import check_circuit

    c = check_circuit(Path(a.input))
    bias = BiasWeights(a.bias_alpha, a.bias_beta, a.bias_gamma, a.bias_delta)
    res = compile_circuit(c, patches=a.patches, density=a.density, passes=a.passes, bias=bias)
    report = {**res.report(), "input": a.input, "passes": a.passes, "seed": a.seed}
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "physical.json").write_text(res.physical.to_json(indent=1))
    (out / "physical.qasm").write_text(res.physical.to_text())
    (out / "report.json").write_text(json.dumps(report, indent=2))
    print(json.dumps(report["resources"]))
    return report


def cmd_simulate(a) -> dict:
    from .sim.metrics import simulate
    from .sim.noise import NoiseModel
    from .translate import PhysicalCircuit

    path = Path(a.circuit)
    if path.is_dir():
        path = path / "physical.json"
    p = PhysicalCircuit.from_dict(json.loads(path.read_text()))
    kw = {k: v for k, v in dict(p1=a.p1, p2=a.p2, pm=a.pm, T1=a.t1, T2=a.t2, alpha=a.alpha,
                                c_move=a.cmove).items() if v is not None}
    rep = simulate(p, NoiseModel(**kw), a.shots, a.seed).to_dict()
    _write(a.out, json.dumps(rep, indent=2, sort_keys=True) + "\n")
    return rep


def cmd_random(a) -> str:
    from .bench import random_circuit

    text = emit_qasm(random_circuit(a.qubits, a.gates_per_qubit, a.seed))
    _write(a.out, text)
    return text


def cmd_bench(a) -> dict:
    from .bench import BenchSpec, run_bench, to_csv

    spec = BenchSpec.from_json(Path(a.spec).read_text())
    rows, summary = run_bench(spec)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{spec.experiment}.csv").write_text(to_csv(rows))
    (out / f"{spec.experiment}.json").write_text(json.dumps(summary, indent=2, default=float))
    print(json.dumps({k: v for k, v in summary.items() if k not in ("points", "rows")},
                     default=float))
    return summary


def cmd_score(a) -> str:
    from .compiler import preprocess
    from .pack import score_matrix
    from .validation import check_circuit

    c = preprocess(check_circuit(Path(a.input)))
    text = score_matrix(c).to_csv()
    _write(a.out, text)
    return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="icepack", description="Iceberg-code compiler and simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a QASM circuit onto Iceberg patches")
    c.add_argument("--input", required=True)
    g = c.add_mutually_exclusive_group()
    g.add_argument("--patches", type=int)
    g.add_argument("--density", type=float, help="program qubits per patch, 1.0 to 2.0")
    c.add_argument("--passes", default="cancel,hcommute,merge,pack,grid",
                   help="comma-separated subset; empty string for the naive baseline")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--bias-alpha", type=float, default=1.0)
    c.add_argument("--bias-beta", type=float, default=1.0)
    c.add_argument("--bias-gamma", type=float, default=0.2)
    c.add_argument("--bias-delta", type=float, default=-0.1)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="noisy sampling of a compiled circuit")
    s.add_argument("--circuit", required=True, help="physical.json or its directory")
    s.add_argument("--shots", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    for name in ("p1", "p2", "pm", "t1", "t2", "alpha", "cmove"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("random", help="random benchmark circuit as QASM")
    r.add_argument("--qubits", type=int, required=True)
    r.add_argument("--gates-per-qubit", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_random)

    b = sub.add_parser("bench", help="run a benchmark sweep from a JSON spec")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", default="bench_out")
    b.set_defaults(func=cmd_bench)

    sc = sub.add_parser("score", help="write the pair score matrix as CSV")
    sc.add_argument("--input", required=True)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_score)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        a.func(a)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
