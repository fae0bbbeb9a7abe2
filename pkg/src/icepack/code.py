"""The [[4,2,2]] Iceberg code and its library of encoded gate templates.

Conventions (data qubits d0..d3 of a patch):

    stabilizers   XXXX, ZZZZ
    slot 0        X = X0 X1,  Z = Z0 Z2
    slot 1        X = X0 X2,  Z = Z0 Z1

Exchanging d1 and d2 exchanges the two slots, so every slot-1 template is the
slot-0 one with those two qubits relabelled.  Logical |b0 b1> (slot 0, slot 1)
is the cat state over x = (0, b1, b0, b0^b1) and its complement, and the
readout is b0 = m0^m2, b1 = m0^m1.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ir import GateKind, Variant, gate_moments
from .sim.statevector import Statevector, equal_up_to_phase, gate_matrix

DATA_PER_PATCH = 4
QUBITS_PER_PATCH = 6
ONE_Q = frozenset({"H", "X", "Y", "Z", "S", "SDG", "SX", "SXDG", "SY", "SYDG", "RX", "RZ"})
TWO_Q = frozenset({"CX", "CZ"})

X_SUPPORT = ((0, 1), (0, 2))
Z_SUPPORT = ((0, 2), (0, 1))


class InvalidVariant(ValueError):
    pass


@dataclass(frozen=True)
class CodeParams:
    n_code: int = 4
    k: int = 2
    d: int = 2

    def __post_init__(self):
        if (self.n_code, self.k, self.d) != (4, 2, 2):
            raise ValueError("only the [[4,2,2]] member is supported")

    @property
    def rate(self) -> float:
        return self.k / self.n_code


@dataclass(frozen=True)
class PhysOp:
    """One physical instruction.  Names: 1q gates, CX, CZ, R (reset), M."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    @property
    def is_gate(self) -> bool:
        return self.name in ONE_Q or self.name in TWO_Q

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Cost:
    n1q: int
    n2q: int
    depth: int

    def as_tuple(self):
        return (self.n1q, self.n2q, self.depth)


def op_cost(ops) -> Cost:
    gates = [o for o in ops if o.is_gate]
    n1 = sum(len(o.qubits) == 1 for o in gates)
    m = gate_moments(gates)
    return Cost(n1, len(gates) - n1, max(m) + 1 if m else 0)


# --- reference costs -------------------------------------------------------------------

REFERENCE_COSTS = {
    (GateKind.X, Variant.TARGETED): Cost(2, 0, 1),
    (GateKind.XX, Variant.PATCHWISE): Cost(2, 0, 1),
    (GateKind.Z, Variant.TARGETED): Cost(2, 0, 1),
    (GateKind.ZZ, Variant.PATCHWISE): Cost(2, 0, 1),
    (GateKind.S, Variant.TARGETED): Cost(2, 1, 3),
    (GateKind.RZ, Variant.TARGETED): Cost(1, 2, 3),
    (GateKind.RX, Variant.TARGETED): Cost(1, 2, 3),
    (GateKind.SX, Variant.TARGETED): Cost(4, 1, 4),
    (GateKind.H, Variant.TARGETED): Cost(7, 4, 8),
    (GateKind.HH, Variant.PATCHWISE): Cost(4, 0, 1),
    (GateKind.CX, Variant.INTRA): Cost(0, 4, 4),
    (GateKind.CX, Variant.INTER): Cost(0, 4, 3),
    (GateKind.CX, Variant.TRANSVERSAL): Cost(0, 4, 1),
    (GateKind.CZ, Variant.INTRA): Cost(1, 3, 3),
    (GateKind.CZ, Variant.INTER): Cost(1, 4, 3),
    (GateKind.CZ, Variant.TRANSVERSAL): Cost(0, 4, 1),
    (GateKind.XCX, Variant.INTRA): Cost(5, 3, 5),
    (GateKind.XCX, Variant.INTER): Cost(8, 4, 5),
    (GateKind.XCX, Variant.TRANSVERSAL): Cost(8, 4, 3),
}


# --- templates -----------------------------------------------------------------

@dataclass(frozen=True)
class GateTemplate:
    """A physical realization of one logical gate on local data qubits.

    Local qubits 0..3 belong to the first patch and 4..7 to the second.  A
    rotation angle is written into every op whose ``angle`` is ``nan``.
    ``relabel`` lists local patches (0 or 1) whose two logical slots trade
    places as a side effect.
    """

    kind: GateKind
    variant: Variant
    positions: tuple[int, ...]
    ops: tuple[PhysOp, ...]
    relabel: tuple[int, ...] = ()

    @property
    def n_patches(self) -> int:
        return 2 if self.variant in (Variant.INTER, Variant.TRANSVERSAL) else 1

    @property
    def cost(self) -> Cost:
        return op_cost(self.ops)

    def instantiate(self, qubit_map, angle: float | None = None) -> list[PhysOp]:
        out = []
        for o in self.ops:
            a = o.angle
            if a is not None and np.isnan(a):
                a = angle
            out.append(PhysOp(o.name, tuple(qubit_map[q] for q in o.qubits), a))
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.name, "variant": self.variant.value,
            "positions": list(self.positions), "cost": list(self.cost.as_tuple()),
            "relabel": list(self.relabel),
            "ops": [[o.name, list(o.qubits)] + (["theta"] if o.angle is not None else [])
                    for o in self.ops],
        }


THETA = float("nan")


def _ops(*spec) -> tuple[PhysOp, ...]:
    out = []
    for item in spec:
        name, *qs = item
        angle = None
        if qs and qs[-1] == "t":
            qs = qs[:-1]
            angle = THETA
        out.append(PhysOp(name, tuple(qs), angle))
    return tuple(out)


def _swap12(ops, offset=0):
    """Relabel d1 <-> d2 inside the patch starting at ``offset``."""
    m = {offset + 1: offset + 2, offset + 2: offset + 1}
    return tuple(PhysOp(o.name, tuple(m.get(q, q) for q in o.qubits), o.angle) for o in ops)


def _with_slot(ops, slot, offset=0):
    return _swap12(ops, offset) if slot == 1 else tuple(ops)


# slot-0 targeted gates
_TARGETED = {
    GateKind.X: _ops(("X", 0), ("X", 1)),
    GateKind.Z: _ops(("Z", 0), ("Z", 2)),
    GateKind.S: _ops(("S", 0), ("CZ", 0, 2), ("S", 2)),
    GateKind.RZ: _ops(("CX", 0, 2), ("RZ", 2, "t"), ("CX", 0, 2)),
    GateKind.RX: _ops(("CX", 1, 0), ("RX", 1, "t"), ("CX", 1, 0)),
    GateKind.SX: _ops(("H", 0), ("CX", 0, 1), ("H", 0), ("SX", 0), ("SX", 1)),
    GateKind.H: _ops(("H", 1), ("CX", 1, 0), ("CX", 2, 0), ("S", 2), ("SY", 1), ("H", 2),
                     ("CX", 0, 1), ("CX", 0, 2), ("H", 0), ("H", 2), ("SDG", 2)),
}

_PATCHWISE = {
    GateKind.HH: (_ops(("H", 0), ("H", 1), ("H", 2), ("H", 3)), (0,)),
    GateKind.XX: (_ops(("X", 1), ("X", 2)), ()),
    GateKind.ZZ: (_ops(("Z", 1), ("Z", 2)), ()),
}

# intra-patch gates with the first operand in slot 0 and the second in slot 1
_INTRA = {
    GateKind.CX: _ops(("CX", 2, 3), ("CX", 2, 1), ("CX", 0, 1), ("CX", 0, 3)),
    GateKind.CZ: _ops(("CZ", 0, 1), ("CZ", 0, 2), ("CZ", 1, 2), ("Z", 0)),
    GateKind.XCX: _ops(("H", 0), ("H", 2), ("CZ", 0, 2), ("Z", 0), ("CX", 2, 1),
                       ("CX", 0, 1), ("H", 0), ("H", 2)),
}


def _inter(kind: GateKind, sa: int, sb: int) -> tuple[PhysOp, ...]:
    """Two-patch gate between slot ``sa`` of patch A and slot ``sb`` of patch B."""
    if kind is GateKind.CX:
        ctl = Z_SUPPORT[sa]
        tgt = tuple(4 + q for q in X_SUPPORT[sb])
        return _bipartite("CX", ctl, tgt)
    if kind is GateKind.CZ:
        return _bipartite("CZ", Z_SUPPORT[sa], tuple(4 + q for q in Z_SUPPORT[sb]))
    if kind is GateKind.XCX:
        # patch-wise H on A turns XCX(A_sa, B_sb) into CX(A_{1-sa} -> B_sb)
        hs = tuple(PhysOp("H", (q,)) for q in range(4))
        return hs + _inter(GateKind.CX, 1 - sa, sb) + hs
    raise InvalidVariant(f"no inter-patch {kind.name}")


def _bipartite(name, left, right):
    (a0, a1), (b0, b1) = left, right
    return tuple(PhysOp(name, p) for p in ((a0, b0), (a1, b0), (a0, b1), (a1, b1)))


def _transversal(kind: GateKind, sa: int, sb: int) -> tuple[PhysOp, ...]:
    """kind(A_sa, B_sb) together with kind(A_{1-sa}, B_{1-sb})."""
    if kind is GateKind.CX:
        # physical CX(Ak -> Bk) acts as CX(A_s -> B_s) for both slots
        straight = sa == sb
        perm = (0, 1, 2, 3) if straight else (0, 2, 1, 3)
        return tuple(PhysOp("CX", (k, 4 + perm[k])) for k in range(4))
    if kind is GateKind.CZ:
        # physical CZ(Ak, Bk) acts as CZ(A_s, B_{1-s}) for both slots
        perm = (0, 1, 2, 3) if sa != sb else (0, 2, 1, 3)
        return tuple(PhysOp("CZ", (k, 4 + perm[k])) for k in range(4))
    if kind is GateKind.XCX:
        hs = tuple(PhysOp("H", (q,)) for q in range(4))
        return hs + _transversal(GateKind.CX, 1 - sa, sb) + hs
    raise InvalidVariant(f"no transversal {kind.name}")


@lru_cache(maxsize=None)
def template(kind: GateKind, variant: Variant, positions: tuple[int, ...] = ()) -> GateTemplate:
    kind = GateKind(kind)
    variant = Variant(variant)
    positions = tuple(positions)
    if any(p not in (0, 1) for p in positions):
        raise InvalidVariant(f"slot positions must be 0/1, got {positions}")
    if variant is Variant.TARGETED:
        if kind not in _TARGETED or len(positions) != 1:
            raise InvalidVariant(f"targeted {kind.name} at {positions}")
        return GateTemplate(kind, variant, positions, _with_slot(_TARGETED[kind], positions[0]))
    if variant is Variant.PATCHWISE:
        if kind not in _PATCHWISE or positions:
            raise InvalidVariant(f"patch-wise {kind.name} at {positions}")
        ops, rel = _PATCHWISE[kind]
        return GateTemplate(kind, variant, (), ops, rel)
    if len(positions) != 2:
        raise InvalidVariant(f"{variant.value} {kind.name} needs two slot positions")
    sa, sb = positions
    if variant is Variant.INTRA:
        if kind not in _INTRA or sa == sb:
            raise InvalidVariant(f"intra {kind.name} at {positions}")
        return GateTemplate(kind, variant, positions, _with_slot(_INTRA[kind], sa))
    if variant is Variant.INTER:
        return GateTemplate(kind, variant, positions, _inter(kind, sa, sb))
    return GateTemplate(kind, variant, positions, _transversal(kind, sa, sb))


def table_templates():
    """One representative template per reference-cost row, keyed like ``REFERENCE_COSTS``."""
    out = {}
    for kind, variant in REFERENCE_COSTS:
        if variant is Variant.TARGETED:
            pos = (0,)
        elif variant is Variant.PATCHWISE:
            pos = ()
        elif variant is Variant.INTRA:
            pos = (0, 1)
        else:
            pos = (0, 0)
        out[(kind, variant)] = template(kind, variant, pos)
    return out


def all_templates():
    """Every (kind, variant, positions) combination the translator may request."""
    out = []
    for kind, variant in REFERENCE_COSTS:
        if variant is Variant.TARGETED:
            combos = [(0,), (1,)]
        elif variant is Variant.PATCHWISE:
            combos = [()]
        elif variant is Variant.INTRA:
            combos = [(0, 1), (1, 0)]
        else:
            combos = list(itertools.product((0, 1), repeat=2))
        out.extend(template(kind, variant, p) for p in combos)
    return out


def library_json(indent=2) -> str:
    return json.dumps([t.to_dict() for t in all_templates()], indent=indent)


# --- patches, encoding and decoding ------------------------------------------------

@dataclass
class Patch:
    index: int
    slots: list = field(default_factory=lambda: [None, None])
    history: list = field(default_factory=list)

    @property
    def base(self) -> int:
        return QUBITS_PER_PATCH * self.index

    @property
    def data(self) -> tuple[int, ...]:
        return tuple(self.base + k for k in range(DATA_PER_PATCH))

    @property
    def ancillas(self) -> tuple[int, int]:
        return (self.base + 4, self.base + 5)

    def relabel(self, reason: str = "relabel"):
        self.slots.reverse()
        self.history.append(reason)

    def slot_of(self, q) -> int:
        return self.slots.index(q)


def encoding_circuit(patch: Patch, sources=None) -> list[PhysOp]:
    """Encode the 2-qubit state held on (d2, d1) as (slot 0, slot 1).

    ``sources`` defaults to those two data qubits; d0 and d3 must start in |0>.
    """
    d = patch.data
    if sources is None:
        sources = (d[2], d[1])
    if tuple(sources) != (d[2], d[1]):
        raise ValueError("sources must be the patch's (d2, d1) data qubits")
    return [PhysOp("CX", (d[1], d[3])), PhysOp("CX", (d[2], d[3])),
            *zero_state_preparation(patch)]


def zero_state_preparation(patch: Patch) -> list[PhysOp]:
    """Prepare logical |00> from |0000>."""
    d = patch.data
    return [PhysOp("H", (d[0],)), PhysOp("CX", (d[0], d[1])),
            PhysOp("CX", (d[0], d[2])), PhysOp("CX", (d[0], d[3]))]


@dataclass(frozen=True)
class MeasurementPlan:
    """Order of measured qubits: d0..d3, then X-syndrome and Z-syndrome ancillas."""

    qubits: tuple[int, ...]

    @staticmethod
    def readout(data_bits) -> tuple[int, int]:
        m0, m1, m2, _ = (int(b) for b in data_bits)
        return (m0 ^ m2, m0 ^ m1)

    @staticmethod
    def accept(data_bits, syndromes) -> bool:
        return sum(int(b) for b in data_bits) % 2 == 0 and not any(int(s) for s in syndromes)


def decoding_circuit(patch: Patch) -> tuple[list[PhysOp], MeasurementPlan]:
    d = patch.data
    ax, az = patch.ancillas
    ops = [PhysOp("R", (ax,)), PhysOp("R", (az,)), PhysOp("H", (ax,))]
    ops += [PhysOp("CX", (ax, q)) for q in d]
    ops.append(PhysOp("H", (ax,)))
    ops += [PhysOp("CX", (q, az)) for q in d]
    plan = MeasurementPlan(tuple(d) + (ax, az))
    ops += [PhysOp("M", (q,)) for q in plan.qubits]
    return ops, plan


# --- verification ------------------------------------------------------------------

def codeword(b0: int, b1: int) -> np.ndarray:
    v = np.zeros(16, dtype=complex)
    x = (0, b1, b0, b0 ^ b1)
    i = int("".join(map(str, x)), 2)
    v[i] = v[15 - i] = 1 / np.sqrt(2)
    return v


def _code_basis(n_patches: int) -> np.ndarray:
    """Columns: encoded logical basis states, logical order (A0, A1, B0, B1)."""
    one = np.array([codeword(b0, b1) for b0 in (0, 1) for b1 in (0, 1)]).T
    out = one
    for _ in range(n_patches - 1):
        out = np.kron(out, one)
    return out


def _logical_matrix(ops, n_logical):
    from .sim.statevector import unitary
    return unitary(ops, n_logical)


def intended_logical(t: GateTemplate, angle: float | None = None) -> np.ndarray:
    kind, var = t.kind, t.variant
    if var is Variant.TARGETED:
        return _logical_matrix([(kind.name, (t.positions[0],), angle)], 2)
    if var is Variant.PATCHWISE:
        base = {GateKind.HH: "H", GateKind.XX: "X", GateKind.ZZ: "Z"}[kind]
        ops = [(base, (0,)), (base, (1,))]
        if t.relabel:
            ops.append(("SWAP", (0, 1)))
        return _logical_matrix(ops, 2)
    sa, sb = t.positions
    if var is Variant.INTRA:
        return _logical_matrix([(kind.name, (sa, sb))], 2)
    if var is Variant.INTER:
        return _logical_matrix([(kind.name, (sa, 2 + sb))], 4)
    return _logical_matrix([(kind.name, (sa, 2 + sb)), (kind.name, (1 - sa, 3 - sb))], 4)


@dataclass
class TemplateReport:
    kind: GateKind
    variant: Variant
    positions: tuple
    cost: Cost
    expected_cost: Cost | None
    leakage: float
    logical_ok: bool

    @property
    def cost_ok(self) -> bool:
        return self.expected_cost is None or self.cost == self.expected_cost

    @property
    def passed(self) -> bool:
        return self.logical_ok and self.cost_ok

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.kind.name:4s} {self.variant.value:12s} {self.positions} "
                f"cost={self.cost.as_tuple()} expected={self.expected_cost and self.expected_cost.as_tuple()} "
                f"logical={'ok' if self.logical_ok else 'WRONG'}")


def verify_template(t: GateTemplate, angle: float = 0.37, atol: float = 1e-10) -> TemplateReport:
    """Check codespace action and cost of a template against its contract."""
    n = 4 * t.n_patches
    basis = _code_basis(t.n_patches)
    images = []
    for col in basis.T:
        sv = Statevector(n, col.copy())
        sv.apply((o.name, o.qubits, angle if (o.angle is not None) else None) for o in t.ops)
        images.append(sv.vector())
    images = np.array(images).T
    m = basis.conj().T @ images
    leakage = float(np.max(np.abs(1 - np.sum(np.abs(m) ** 2, axis=0)))) if m.size else 0.0
    target = intended_logical(t, angle)
    ok = leakage < atol and equal_up_to_phase(m, target, atol=atol)
    return TemplateReport(t.kind, t.variant, t.positions, t.cost,
                          REFERENCE_COSTS.get((t.kind, t.variant)), leakage, ok)


def logical_of_matrix(name: str, angle=None) -> np.ndarray:
    return gate_matrix(name, angle)
