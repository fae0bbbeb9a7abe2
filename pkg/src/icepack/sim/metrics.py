"""Post-selection, distributions, TVD and the simulate driver."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from ..ir import Gate, GateKind, LogicalCircuit
from .frame import ShotBatch, measurement_record, sample
from .noise import (Instruction, NoiseModel, NoisyCircuit, ProbabilityOverflow,
                    apply_noise_channels)
from .statevector import MAX_QUBITS, Statevector

LSR_TARGET = 0.2


class EmptyKeptSet(ValueError):
    pass


def cliffordize(c: LogicalCircuit) -> LogicalCircuit:
    """Clifford proxy: every rotation becomes the matching quarter-turn gate."""
    sub = {GateKind.RZ: GateKind.S, GateKind.RX: GateKind.SX}
    return c.with_gates(Gate(sub[g.kind], g.qubits) if g.kind in sub else g for g in c.gates)


def _is_clifford_angle(a: float) -> bool:
    k = a / (math.pi / 2)
    return abs(k - round(k)) < 1e-9


def clifford_proxy(p):
    """Physical-level proxy: every rotation runs at a quarter turn.

    Rotation templates keep their gates, so costs are unchanged, and the
    logical action becomes that of ``cliffordize`` applied to the source.
    """
    from dataclasses import replace

    from ..code import PhysOp

    ops = [PhysOp(o.name, o.qubits, math.pi / 2) if o.name in ("RZ", "RX") else o for o in p.ops]
    src = cliffordize(p.source) if p.source is not None else None
    return replace(p, ops=ops, source=src)


def needs_proxy(p) -> bool:
    return any(o.name in ("RZ", "RX") and not _is_clifford_angle(o.angle) for o in p.ops)


def _bits(row) -> str:
    return "".join("1" if b else "0" for b in row)


def counts(b: ShotBatch, accepted_only: bool = True) -> Counter:
    rows = b.logical[b.accept] if accepted_only else b.logical
    if rows.shape[1] == 0:
        return Counter({"": rows.shape[0]}) if rows.shape[0] else Counter()
    keys, n = np.unique(rows, axis=0, return_counts=True)
    return Counter({_bits(k): int(v) for k, v in zip(keys, n)})


def postselect(b: ShotBatch) -> tuple[dict[str, float], float]:
    kept = int(b.accept.sum())
    lsr = kept / b.shots if b.shots else 0.0
    if kept == 0:
        raise EmptyKeptSet("no shot passed post-selection")
    return {k: v / kept for k, v in sorted(counts(b).items())}, lsr


def tvd(p: dict, q: dict) -> float:
    keys = sorted(set(p) | set(q))
    return min(1.0, 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys))


def _dist_from_probs(probs: np.ndarray, n: int, tol: float = 1e-12) -> dict[str, float]:
    idx = np.nonzero(probs > tol)[0]
    return {format(int(i), f"0{n}b") if n else "": float(probs[i]) for i in idx}


def _lower(g: Gate) -> list[tuple[str, tuple[int, ...], float | None]]:
    """A logical gate as physical-style gate tuples."""
    k = g.kind
    if k is GateKind.XCX:
        a, b = g.qubits
        return [("H", (a,), None), ("CX", (a, b), None), ("H", (a,), None)]
    if k is GateKind.SWAP:
        a, b = g.qubits
        return [("CX", (a, b), None), ("CX", (b, a), None), ("CX", (a, b), None)]
    return [(k.name, g.qubits, g.angle)]


def ideal_distribution(c: LogicalCircuit, shots: int = 100_000, seed: int = 0) -> dict[str, float]:
    """Exact output distribution when small enough, else a noiseless sample."""
    n = c.num_qubits
    ops = [o for g in c.gates for part in g.parts() for o in _lower(part)]
    if n <= MAX_QUBITS:
        sv = Statevector(n).apply(ops)
        return _dist_from_probs(sv.probabilities(), n)
    ins = [Instruction(name, qs, () if a is None else (a,)) for name, qs, a in ops]
    ins += [Instruction("M", (q,)) for q in range(n)]
    rec, _ = measurement_record(NoisyCircuit(n, ins, [], []), shots, seed)
    keys, cnt = np.unique(rec, axis=0, return_counts=True)
    return {_bits(k): v / shots for k, v in zip(keys, cnt)}


def exact_logical_distribution(p) -> tuple[dict[str, float], float]:
    """Noiseless post-selected logical distribution and acceptance probability.

    Ancillas are idle until decoding, so only data qubits are simulated and
    the syndrome measurement is replaced by the code-space projector.
    """
    from ..translate import DECODE

    P = p.n_patches
    nd = 4 * P
    if nd > MAX_QUBITS:
        from .statevector import TooLarge
        raise TooLarge(f"{nd} data qubits exceed the dense limit")
    remap = {6 * q + k: 4 * q + k for q in range(P) for k in range(4)}
    ops = [(o.name, tuple(remap[q] for q in o.qubits), o.angle)
           for o, org in zip(p.ops, p.origin) if o.is_gate and org != DECODE]
    psi = Statevector(nd).apply(ops).vector().reshape((2,) * nd)
    for q in range(P):
        axes = tuple(range(4 * q, 4 * q + 4))
        psi = (psi + np.flip(psi, axis=axes)) / 2
    probs = np.abs(psi.reshape(-1)) ** 2
    parity = np.zeros(len(probs), dtype=np.uint8)
    bits = (np.arange(len(probs))[:, None] >> np.arange(nd - 1, -1, -1)) & 1
    for q in range(P):
        parity |= (bits[:, 4 * q:4 * q + 4].sum(axis=1) % 2).astype(np.uint8)
    probs = np.where(parity == 0, probs, 0.0)
    acc = float(probs.sum())
    out: Counter = Counter()
    n = len(p.readout)
    for i in np.nonzero(probs > 1e-14)[0]:
        b = bits[i]
        key = []
        for pt, s in p.readout:
            d = b[4 * pt:4 * pt + 4]
            key.append(str(int(d[0] ^ (d[2] if s == 0 else d[1]))))
        out["".join(key) if n else ""] += probs[i] / acc
    return dict(sorted(out.items())), acc


@dataclass
class SimReport:
    shots: int
    kept: int
    lsr: float
    distribution: dict[str, float]
    tvd: float | None
    noise: dict = field(default_factory=dict)
    resources: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def simulate(p, noise: NoiseModel | None = None, shots: int = 10_000, seed: int = 0,
             ideal: dict | None = None, compare: bool = True) -> SimReport:
    """Sample a compiled circuit and score it against the ideal distribution."""
    from ..translate import resource_report

    noise = noise or NoiseModel()
    if needs_proxy(p):
        p = clifford_proxy(p)
    nc = apply_noise_channels(p, noise)
    b = sample(nc, shots, seed)
    kept = int(b.accept.sum())
    dist: dict[str, float] = {}
    t = None
    if kept:
        dist, _ = postselect(b)
        if compare and p.source is not None:
            if ideal is None:
                ideal = ideal_distribution(p.source, shots, seed + 1)
            t = tvd(dist, ideal)
    return SimReport(shots, kept, kept / shots if shots else 0.0, dist, t,
                     noise.to_dict(), resource_report(p).to_dict(), seed)


def estimate_lsr(p, noise: NoiseModel, shots: int, seed: int) -> float:
    if needs_proxy(p):
        p = clifford_proxy(p)
    try:
        nc = apply_noise_channels(p, noise)
    except ProbabilityOverflow:
        return 0.0
    b = sample(nc, shots, seed)
    return float(b.accept.mean())


def tune_alpha(p, noise: NoiseModel | None = None, target: float = LSR_TARGET,
               shots: int = 4000, seed: int = 0, iters: int = 14,
               lo: float = 1e-3, hi: float = 64.0) -> float:
    """Noise scale at which the circuit's LSR is closest to ``target`` (bisection)."""
    noise = noise or NoiseModel()
    limit = min(1 / max(noise.p1, noise.p2, noise.pm, noise.c_move, 1e-12), hi)
    hi = min(hi, limit)
    if estimate_lsr(p, noise.scaled(hi), shots, seed) > target:
        return hi
    if estimate_lsr(p, noise.scaled(lo), shots, seed) < target:
        return lo
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if estimate_lsr(p, noise.scaled(mid), shots, seed) > target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
