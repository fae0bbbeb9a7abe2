"""Logical-to-physical translation onto Iceberg patches."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .code import (QUBITS_PER_PATCH, CodeParams, MeasurementPlan, Patch, PhysOp,
                   decoding_circuit, template, zero_state_preparation)
from .ir import (PATCH_MACROS, GateKind, LogicalCircuit, Variant,
                 gate_moments)

ENCODE = "encode"
DECODE = "decode"
_SELF_INVERSE = frozenset({"H", "X", "Y", "Z", "CX", "CZ"})


class UnpackedQubit(ValueError):
    pass


class UnsupportedKind(ValueError):
    pass


class TransversalIneligible(ValueError):
    pass


class PositionTracker:
    """Program qubit <-> (patch, slot) bijection, updated on relabels."""

    def __init__(self, packing):
        self.slots: list[list[int | None]] = [list(p) for p in packing.patches]
        self.where: dict[int, tuple[int, int]] = {}
        for p, pair in enumerate(self.slots):
            for s, q in enumerate(pair):
                if q is not None:
                    self.where[q] = (p, s)
        self.events: list[tuple] = []

    def locate(self, q: int) -> tuple[int, int]:
        try:
            return self.where[q]
        except KeyError:
            raise UnpackedQubit(f"program qubit {q} is not packed") from None

    def is_solo(self, patch: int) -> bool:
        return None in self.slots[patch]

    def swap_slots(self, patch: int, reason: str = "relabel"):
        pair = self.slots[patch]
        pair.reverse()
        for s, q in enumerate(pair):
            if q is not None:
                self.where[q] = (patch, s)
        self.events.append((reason, patch))

    def swap_qubits(self, a: int, b: int):
        """A logical SWAP: the two program qubits trade locations."""
        (pa, sa), (pb, sb) = self.locate(a), self.locate(b)
        self.slots[pa][sa], self.slots[pb][sb] = b, a
        self.where[a], self.where[b] = (pb, sb), (pa, sa)
        self.events.append(("swap", a, b))


def select_variant(g, tracker: PositionTracker) -> Variant:
    k = g.kind
    if k in PATCH_MACROS:
        return Variant.PATCHWISE
    if g.is_transversal:
        a0, a1, b0, b1 = g.qubits
        (pa, sa), (pb, sb) = tracker.locate(a0), tracker.locate(a1)
        (qa, ta), (qb, tb) = tracker.locate(b0), tracker.locate(b1)
        if pa != qa or pb != qb or pa == pb or sa == ta or sb == tb:
            raise TransversalIneligible(f"{g} cannot run transversally at "
                                        f"{[(pa, sa), (pb, sb), (qa, ta), (qb, tb)]}")
        return Variant.TRANSVERSAL
    if len(g.qubits) == 1:
        p, _ = tracker.locate(g.qubits[0])
        # a solo qubit's H may run patch-wise: the gauge slot is never read out
        if k is GateKind.H and tracker.is_solo(p):
            return Variant.PATCHWISE
        return Variant.TARGETED
    (pa, _), (pb, _) = tracker.locate(g.qubits[0]), tracker.locate(g.qubits[1])
    return Variant.INTRA if pa == pb else Variant.INTER


@dataclass
class PhysicalCircuit:
    num_qubits: int
    ops: list[PhysOp]
    origin: list = field(default_factory=list)      # logical gate index, ENCODE or DECODE
    distance: list[int] = field(default_factory=list)
    plans: list[MeasurementPlan] = field(default_factory=list)
    readout: list[tuple[int, int]] = field(default_factory=list)  # program qubit -> (patch, slot)
    grid: list | None = None
    source: LogicalCircuit | None = None
    events: list = field(default_factory=list)

    @property
    def n_patches(self) -> int:
        return len(self.plans)

    def gate_indices(self, body_only: bool = False) -> list[int]:
        return [i for i, o in enumerate(self.ops) if o.is_gate
                and (not body_only or self.origin[i] not in (ENCODE, DECODE))]

    def moments(self) -> list[list[int]]:
        m = gate_moments(self.ops)
        out: list[list[int]] = [[] for _ in range(max(m) + 1 if m else 0)]
        for i, t in enumerate(m):
            out[t].append(i)
        return out

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "n_patches": self.n_patches,
            "grid": [list(g) for g in self.grid] if self.grid else None,
            "ops": [{"name": o.name, "qubits": list(o.qubits), "angle": o.angle,
                     "origin": self.origin[i], "distance": self.distance[i]}
                    for i, o in enumerate(self.ops)],
            "plans": [list(p.qubits) for p in self.plans],
            "readout": [list(r) for r in self.readout],
            "moments": self.moments(),
            "events": [list(e) for e in self.events],
            "source": None if self.source is None else {
                "num_qubits": self.source.num_qubits,
                "gates": [[g.kind.value, list(g.qubits), g.angle] for g in self.source.gates]},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalCircuit":
        from .ir import Gate

        ops = [PhysOp(o["name"], tuple(o["qubits"]), o["angle"]) for o in d["ops"]]
        src = None
        if d.get("source"):
            s = d["source"]
            src = LogicalCircuit(s["num_qubits"], tuple(
                Gate(GateKind(k), tuple(q), a) for k, q, a in s["gates"]))
        return cls(d["num_qubits"], ops, [o["origin"] for o in d["ops"]],
                   [o["distance"] for o in d["ops"]],
                   [MeasurementPlan(tuple(p)) for p in d["plans"]],
                   [tuple(r) for r in d["readout"]],
                   [tuple(g) for g in d["grid"]] if d.get("grid") else None, src,
                   [tuple(e) for e in d.get("events", [])])

    def to_text(self) -> str:
        lines = ["// icepack physical circuit: patch registers hold d0..d3, ax, az"]
        for p in range(self.n_patches):
            lines.append(f"qreg p{p}[{QUBITS_PER_PATCH}];")
        lines.append(f"creg m[{self.num_qubits}];")
        for i, o in enumerate(self.ops):
            args = ",".join(f"p{q // QUBITS_PER_PATCH}[{q % QUBITS_PER_PATCH}]" for q in o.qubits)
            name = {"R": "reset", "M": "measure"}.get(o.name, o.name.lower())
            par = f"({o.angle!r})" if o.angle is not None else ""
            note = f" // {self.origin[i]}" + (f" d={self.distance[i]}" if self.distance[i] else "")
            if o.name == "M":
                lines.append(f"measure {args} -> m[{o.qubits[0]}];{note}")
            else:
                lines.append(f"{name}{par} {args};{note}")
        return "\n".join(lines) + "\n"


def _data_map(*patches: int) -> dict[int, int]:
    m = {}
    for k, p in enumerate(patches):
        for d in range(4):
            m[4 * k + d] = QUBITS_PER_PATCH * p + d
    return m


def cancel_physical(records: list[tuple[PhysOp, object, int]]) -> list[tuple[PhysOp, object, int]]:
    """Remove adjacent identical self-inverse physical gates within a body."""
    alive = [True] * len(records)
    stacks: dict[int, list[int]] = {}
    for i, (o, _, _) in enumerate(records):
        if o.name in _SELF_INVERSE:
            tops = {stacks[q][-1] if stacks.get(q) else None for q in o.qubits}
            if len(tops) == 1:
                j = tops.pop()
                if j is not None:
                    pj = records[j][0]
                    if pj.name == o.name and (pj.qubits == o.qubits or (
                            o.name == "CZ" and set(pj.qubits) == set(o.qubits))):
                        alive[i] = alive[j] = False
                        for q in o.qubits:
                            stacks[q].pop()
                        continue
        for q in o.qubits:
            stacks.setdefault(q, []).append(i)
    return [r for r, a in zip(records, alive) if a]


def translate(c: LogicalCircuit, packing, code: CodeParams | None = None, *,
              cancel: bool = True, source: LogicalCircuit | None = None) -> PhysicalCircuit:
    code = code or CodeParams()
    tracker = PositionTracker(packing)
    missing = set(range(c.num_qubits)) - set(tracker.where)
    if missing:
        raise UnpackedQubit(f"program qubits {sorted(missing)} are not packed")
    P = len(tracker.slots)
    patches = [Patch(p) for p in range(P)]

    prologue = []
    for pt in patches:
        prologue.extend((o, ENCODE, 0) for o in zero_state_preparation(pt))

    body: list[tuple[PhysOp, object, int]] = []
    for gi, g in enumerate(c.gates):
        k = g.kind
        if k is GateKind.SWAP and not g.is_transversal:
            tracker.swap_qubits(*g.qubits)
            continue
        if k.is_macro and len(g.qubits) > 2:
            raise UnsupportedKind(str(g))
        var = select_variant(g, tracker)
        dist = 0
        if var is Variant.TARGETED:
            p, s = tracker.locate(g.qubits[0])
            t = template(k, var, (s,))
            qmap = _data_map(p)
        elif var is Variant.PATCHWISE:
            locs = [tracker.locate(q) for q in g.qubits]
            p = locs[0][0]
            if any(loc[0] != p for loc in locs):
                raise UnsupportedKind(f"{g} spans several patches")
            macro = k if k in PATCH_MACROS else {GateKind.H: GateKind.HH}[k]
            t = template(macro, var)
            qmap = _data_map(p)
        elif var is Variant.INTRA:
            (p, sa), (_, sb) = tracker.locate(g.qubits[0]), tracker.locate(g.qubits[1])
            t = template(k, var, (sa, sb))
            qmap = _data_map(p)
        elif var is Variant.INTER:
            (pa, sa), (pb, sb) = tracker.locate(g.qubits[0]), tracker.locate(g.qubits[1])
            t = template(k, var, (sa, sb))
            qmap = _data_map(pa, pb)
            dist = packing.distance(pa, pb)
        else:
            (pa, sa), (pb, sb) = tracker.locate(g.qubits[0]), tracker.locate(g.qubits[1])
            t = template(k, var, (sa, sb))
            qmap = _data_map(pa, pb)
            dist = packing.distance(pa, pb)
        for o in t.instantiate(qmap, g.angle):
            d = dist if (len(o.qubits) == 2 and o.qubits[0] // QUBITS_PER_PATCH
                         != o.qubits[1] // QUBITS_PER_PATCH) else 0
            body.append((o, gi, d))
        for local in t.relabel:
            patch = qmap[4 * local] // QUBITS_PER_PATCH
            tracker.swap_slots(patch, f"{k.name.lower()} relabel")
            patches[patch].relabel(f"g{gi}")

    if cancel:
        body = cancel_physical(body)

    epilogue = []
    plans = []
    for pt in patches:
        ops, plan = decoding_circuit(pt)
        epilogue.extend((o, DECODE, 0) for o in ops)
        plans.append(plan)

    recs = prologue + body + epilogue
    readout = [tracker.locate(q) for q in range(c.num_qubits)]
    return PhysicalCircuit(QUBITS_PER_PATCH * P, [r[0] for r in recs], [r[1] for r in recs],
                           [r[2] for r in recs], plans, readout,
                           list(packing.grid) if packing.grid else None,
                           source if source is not None else c, list(tracker.events))


@dataclass(frozen=True)
class ResourceReport:
    n1q: int
    n2q: int
    depth: int
    logical_depth: int
    patch_count: int

    def to_dict(self) -> dict:
        return dict(n1q=self.n1q, n2q=self.n2q, depth=self.depth,
                    logical_depth=self.logical_depth, patch_count=self.patch_count)


def resource_report(p: PhysicalCircuit) -> ResourceReport:
    gates = [p.ops[i] for i in p.gate_indices()]
    body = [p.ops[i] for i in p.gate_indices(body_only=True)]
    n1 = sum(len(o.qubits) == 1 for o in gates)

    def dep(ops):
        m = gate_moments(ops)
        return max(m) + 1 if m else 0

    return ResourceReport(n1, len(gates) - n1, dep(gates), dep(body), p.n_patches)
