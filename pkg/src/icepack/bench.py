"""Random circuits, baselines and the benchmark sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .compiler import ALL_PASSES, compile_circuit, naive_baseline
from .ir import Gate, GateKind, LogicalCircuit, SELF_INVERSE
from .pack import naive_packing, patches_for_density
from .sim.metrics import simulate, tune_alpha
from .sim.noise import NoiseModel
from .translate import resource_report

RANDOM_KINDS = (GateKind.X, GateKind.Z, GateKind.H, GateKind.S,
                GateKind.RZ, GateKind.RX, GateKind.CX, GateKind.CZ)
WORKERS_ENV = "ICEPACK_WORKERS"


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Deterministic map over independent tasks, parallel when workers > 1."""
    items = list(items)
    w = min(workers(), len(items))
    if w <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(w) as ex:
        return list(ex.map(fn, items))


def random_circuit(n: int, gates_per_qubit: int, seed=None, kinds=RANDOM_KINDS) -> LogicalCircuit:
    """Uniform gate kind, uniform any-to-any operands, no immediate cancellations."""
    rng = np.random.default_rng(seed)
    kinds = tuple(k for k in kinds if n >= 2 or not k.is_two_qubit)
    last: dict[int, int] = {}
    gates: list[Gate] = []
    while len(gates) < n * gates_per_qubit:
        k = kinds[rng.integers(len(kinds))]
        if k.is_two_qubit:
            qs = tuple(int(q) for q in rng.choice(n, 2, replace=False))
        else:
            qs = (int(rng.integers(n)),)
        angle = float(rng.uniform(0, 2 * math.pi)) if k.is_rotation else None
        g = Gate(k, qs, angle)
        prev = {last.get(q) for q in qs}
        if k in SELF_INVERSE and len(prev) == 1:
            p = prev.pop()
            if p is not None and gates[p].same_action(g):
                continue
        for q in qs:
            last[q] = len(gates)
        gates.append(g)
    return LogicalCircuit(n, tuple(gates))


def improvement(base: float, new: float) -> float:
    """Relative reduction of ``new`` against ``base`` (0.25 = 25% fewer)."""
    return 0.0 if base == 0 else (base - new) / base


# --- density sweep ---------------------------------------------------------------

@dataclass
class DensityPoint:
    density: float
    patches: int
    ours_2q: float
    random_2q: float
    ours_1q: float
    random_1q: float
    ours_depth: float
    random_depth: float

    @property
    def improvement_2q(self) -> float:
        return improvement(self.random_2q, self.ours_2q)

    @property
    def improvement_1q(self) -> float:
        return improvement(self.random_1q, self.ours_1q)

    @property
    def improvement_depth(self) -> float:
        return improvement(self.random_depth, self.ours_depth)

    def row(self) -> dict:
        return {**asdict(self), "improvement_2q": self.improvement_2q,
                "improvement_1q": self.improvement_1q,
                "improvement_depth": self.improvement_depth}


def distinct_permutations(n: int, k: int, rng) -> list[np.ndarray]:
    """k qubit orders drawn without replacement (all of them if k >= n!)."""
    k = min(k, math.factorial(n)) if n <= 12 else k
    seen, out = set(), []
    while len(out) < k:
        p = rng.permutation(n)
        key = tuple(int(v) for v in p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _density_task(args):
    c, density, perms, seed, passes = args
    n = c.num_qubits
    N = patches_for_density(n, density)
    ours = resource_report(compile_circuit(c, patches=N, passes=passes).physical)
    rng = np.random.default_rng(seed)
    base_passes = tuple(p for p in passes if p != "pack")
    rand = [resource_report(compile_circuit(c, passes=base_passes,
                                            packing=naive_packing(n, N, order)).physical)
            for order in distinct_permutations(n, perms, rng)]
    return (N, ours.n2q, np.mean([r.n2q for r in rand]), ours.n1q, np.mean([r.n1q for r in rand]),
            ours.depth, np.mean([r.depth for r in rand]))


def density_sweep(n: int = 20, gates_per_qubit: int = 10, circuits: int = 20, perms: int = 40,
                  densities=(2.0, 1.75, 1.5, 1.25, 1.0), seed: int = 0,
                  passes=("merge", "pack")) -> list[DensityPoint]:
    """Our packing against the mean of random permutations, per density.

    Both sides run the same passes; only the permutation differs.
    """
    ss = np.random.SeedSequence(seed)
    cseeds = ss.spawn(circuits)
    circs = [random_circuit(n, gates_per_qubit, s) for s in cseeds]
    tasks = []
    for d in densities:
        for k, c in enumerate(circs):
            tasks.append((c, d, perms, [seed, k, int(round(d * 1000))], tuple(passes)))
    res = pmap(_density_task, tasks)
    out = []
    for a, d in enumerate(densities):
        chunk = np.array(res[a * circuits:(a + 1) * circuits], dtype=float)
        m = chunk.mean(axis=0)
        out.append(DensityPoint(d, int(chunk[0, 0]), *map(float, m[1:])))
    return out


# --- ablation ----------------------------------------------------------------------

def ablation(c: LogicalCircuit, density: float = 2.0) -> dict:
    """Per-technique and full-pipeline gate-count improvements over the baseline."""
    N = patches_for_density(c.num_qubits, density)
    base = resource_report(compile_circuit(c, patches=N, passes=()).physical)
    out = {"density": density, "baseline": base.to_dict(), "single": {}}
    for p in ALL_PASSES:
        r = resource_report(compile_circuit(c, patches=N, passes=(p,)).physical)
        out["single"][p] = {"n1q": improvement(base.n1q, r.n1q), "n2q": improvement(base.n2q, r.n2q),
                            "depth": improvement(base.depth, r.depth)}
    full = resource_report(compile_circuit(c, patches=N).physical)
    out["full"] = {"n1q": improvement(base.n1q, full.n1q), "n2q": improvement(base.n2q, full.n2q),
                   "depth": improvement(base.depth, full.depth)}
    for key in ("n1q", "n2q"):
        s = sum(v[key] for v in out["single"].values())
        out[f"additivity_gap_{key}"] = s - out["full"][key]
    return out


# --- aggregate comparison -------------------------------------------------------------

REFERENCE_HEADLINE = {"depth": 0.34, "n1q": 0.31, "n2q": 0.17, "lsr": 0.86, "tvd_factor": 1.75}


@dataclass
class AggregateRow:
    circuit: int
    base: dict
    ours: dict
    alpha: float | None = None
    base_lsr: float | None = None
    ours_lsr: float | None = None
    base_tvd: float | None = None
    ours_tvd: float | None = None

    def reductions(self) -> dict:
        return {k: improvement(self.base[k], self.ours[k]) for k in ("depth", "n1q", "n2q")}


def _aggregate_task(args):
    c, shots, seed, simulate_ = args
    base = naive_baseline(c).physical
    ours = compile_circuit(c).physical
    row = AggregateRow(0, resource_report(base).to_dict(), resource_report(ours).to_dict())
    if simulate_:
        nm = NoiseModel()
        alpha = tune_alpha(base, nm, shots=max(1000, shots // 5), seed=seed)
        nm = nm.scaled(alpha)
        rb = simulate(base, nm, shots, seed)
        ro = simulate(ours, nm, shots, seed)
        row.alpha, row.base_lsr, row.ours_lsr = alpha, rb.lsr, ro.lsr
        row.base_tvd, row.ours_tvd = rb.tvd, ro.tvd
    return row


def aggregate(n: int = 50, gates_per_qubit: int = 10, circuits: int = 20, shots: int = 20_000,
              seed: int = 0, simulate_: bool = True) -> list[AggregateRow]:
    ss = np.random.SeedSequence(seed).spawn(circuits)
    tasks = [(random_circuit(n, gates_per_qubit, s), shots, seed + k, simulate_)
             for k, s in enumerate(ss)]
    rows = pmap(_aggregate_task, tasks)
    for k, r in enumerate(rows):
        r.circuit = k
    return rows


def summarize_aggregate(rows: list[AggregateRow]) -> dict:
    red = {k: float(np.mean([r.reductions()[k] for r in rows])) for k in ("depth", "n1q", "n2q")}
    out = {"mean_reduction": red, "reference": REFERENCE_HEADLINE}
    sims = [r for r in rows if r.base_lsr is not None]
    if sims:
        out["mean_base_lsr"] = float(np.mean([r.base_lsr for r in sims]))
        out["mean_ours_lsr"] = float(np.mean([r.ours_lsr for r in sims]))
        out["mean_lsr_improvement"] = float(np.mean(
            [(r.ours_lsr - r.base_lsr) / r.base_lsr for r in sims if r.base_lsr > 0]))
        pairs = [(r.base_tvd, r.ours_tvd) for r in sims
                 if r.base_tvd is not None and r.ours_tvd]
        if pairs:
            out["mean_tvd_factor"] = float(np.mean([b / o for b, o in pairs]))
    return out


# --- LSR / TVD correlation ---------------------------------------------------------------

def correlation(n: int = 5, gates_per_qubit: int = 10, perms: int = 20, patches: int | None = None,
                alpha: float | None = None, shots: int = 20_000, seed: int = 0,
                lsr_range=(0.1, 0.5)) -> dict:
    """Pearson r between LSR and TVD over random permutations of one circuit.

    Without ``alpha`` the noise scale is tuned so the naive baseline sits at
    the middle of ``lsr_range``.
    """
    c = random_circuit(n, gates_per_qubit, seed)
    N = patches if patches is not None else math.ceil(n / 2)
    nm = NoiseModel()
    base = naive_baseline(c).physical
    if alpha is None:
        alpha = tune_alpha(base, nm, target=float(np.mean(lsr_range)), shots=shots // 4, seed=seed)
    nm = nm.scaled(alpha)
    base_lsr = simulate(base, nm, shots, seed).lsr
    rng = np.random.default_rng([seed, 1])
    lsr, tv = [], []
    for k, order in enumerate(distinct_permutations(n, perms, rng)):
        p = compile_circuit(c, passes=(), packing=naive_packing(n, N, order)).physical
        r = simulate(p, nm, shots, seed + k + 1)
        lsr.append(r.lsr)
        tv.append(r.tvd if r.tvd is not None else 1.0)
    r = float(np.corrcoef(lsr, tv)[0, 1]) if np.std(lsr) > 0 and np.std(tv) > 0 else 0.0
    return {"n": n, "patches": N, "alpha": alpha, "base_lsr": base_lsr, "pearson": r,
            "lsr": lsr, "tvd": tv}


def correlation_sweep(param: str, values, **kw) -> list[dict]:
    """Sweep of one parameter (n, patches, perms or alpha)."""
    rows = []
    for v in values:
        args = dict(kw)
        args[param] = v
        out = correlation(**args)
        rows.append({"param": param, "value": v, "pearson": out["pearson"],
                     "alpha": out["alpha"], "base_lsr": out["base_lsr"]})
    return rows


# --- two-qubit variant noise heatmap ---------------------------------------------------------

def variant_heatmap(idle_scales=(0.5, 1.0, 2.0, 4.0), distances=(1, 2, 3, 4), shots: int = 20_000,
                    seed: int = 0) -> list[dict]:
    """LSR of a pair of CX gates run intra-patch vs transversally.

    Idle noise is scaled through T1/T2, distance noise through the grid
    distance between the two patches.
    """
    from .pack import Packing

    c = LogicalCircuit(4, (Gate(GateKind.H, (0,)), Gate(GateKind.H, (1,)),
                           Gate(GateKind.CX, (0, 2)), Gate(GateKind.CX, (1, 3))))
    rows = []
    for s in idle_scales:
        nm = NoiseModel(T1=100.0 / s, T2=80.0 / s)
        for d in distances:
            grid = [(0, 0), (0, d)]
            intra = compile_circuit(c, passes=("cancel",), packing=Packing([(0, 2), (1, 3)], grid))
            trans = compile_circuit(c, passes=("cancel", "merge"),
                                    packing=Packing([(0, 1), (2, 3)], grid))
            li = simulate(intra.physical, nm, shots, seed).lsr
            lt = simulate(trans.physical, nm, shots, seed).lsr
            rows.append({"idle_scale": s, "distance": d, "intra_lsr": li,
                         "transversal_lsr": lt, "transversal_minus_intra": lt - li})
    return rows


# --- spec files --------------------------------------------------------------------------

@dataclass
class BenchSpec:
    experiment: str = "density"
    qubits: int = 20
    gates_per_qubit: int = 10
    circuits: int = 20
    perms: int = 40
    densities: list = field(default_factory=lambda: [2.0, 1.75, 1.5, 1.25, 1.0])
    shots: int = 20_000
    seed: int = 0
    files: list = field(default_factory=list)
    param: str = "alpha"
    values: list = field(default_factory=list)

    @classmethod
    def from_json(cls, text: str) -> "BenchSpec":
        d = json.loads(text)
        known = set(cls.__dataclass_fields__)
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown bench spec keys {sorted(bad)}")
        return cls(**d)


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]))
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def run_bench(spec: BenchSpec) -> tuple[list[dict], dict]:
    """Rows for a CSV table and a JSON summary."""
    from .validation import check_circuit

    if spec.experiment == "density":
        pts = density_sweep(spec.qubits, spec.gates_per_qubit, spec.circuits, spec.perms,
                            tuple(spec.densities), spec.seed)
        rows = [p.row() for p in pts]
        return rows, {"experiment": "density", "points": rows}
    if spec.experiment == "ablation":
        circs = ([check_circuit(f) for f in spec.files] if spec.files else
                 [random_circuit(spec.qubits, spec.gates_per_qubit, [spec.seed, k])
                  for k in range(spec.circuits)])
        rows = []
        for k, c in enumerate(circs):
            for d in spec.densities:
                a = ablation(c, d)
                row = {"circuit": k, "density": d}
                for p, v in a["single"].items():
                    row.update({f"{p}_{m}": v[m] for m in v})
                row.update({f"full_{m}": v for m, v in a["full"].items()})
                row["additivity_gap_n2q"] = a["additivity_gap_n2q"]
                rows.append(row)
        return rows, {"experiment": "ablation", "rows": rows}
    if spec.experiment == "aggregate":
        res = aggregate(spec.qubits, spec.gates_per_qubit, spec.circuits, spec.shots, spec.seed)
        rows = [{"circuit": r.circuit, **{f"base_{k}": v for k, v in r.base.items()},
                 **{f"ours_{k}": v for k, v in r.ours.items()}, "alpha": r.alpha,
                 "base_lsr": r.base_lsr, "ours_lsr": r.ours_lsr,
                 "base_tvd": r.base_tvd, "ours_tvd": r.ours_tvd} for r in res]
        return rows, {"experiment": "aggregate", **summarize_aggregate(res)}
    if spec.experiment == "correlation":
        values = spec.values or [None]
        if spec.values:
            rows = correlation_sweep(spec.param, values, n=spec.qubits,
                                     gates_per_qubit=spec.gates_per_qubit, perms=spec.perms,
                                     shots=spec.shots, seed=spec.seed)
        else:
            out = correlation(spec.qubits, spec.gates_per_qubit, spec.perms, shots=spec.shots,
                              seed=spec.seed)
            rows = [{"k": k, "lsr": a, "tvd": b} for k, (a, b) in enumerate(zip(out["lsr"], out["tvd"]))]
            return rows, {"experiment": "correlation", "pearson": out["pearson"],
                          "alpha": out["alpha"], "base_lsr": out["base_lsr"]}
        return rows, {"experiment": "correlation", "rows": rows}
    if spec.experiment == "heatmap":
        rows = variant_heatmap(shots=spec.shots, seed=spec.seed)
        return rows, {"experiment": "heatmap", "rows": rows}
    raise ValueError(f"unknown experiment {spec.experiment!r}")
