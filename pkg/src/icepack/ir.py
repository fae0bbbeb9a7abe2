"""Logical circuit IR, an OpenQASM 2.0 subset parser, scheduling and cancellation."""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass
from enum import Enum


class QasmError(ValueError):
    """Base class for parse failures."""


class UnsupportedGate(QasmError):
    pass


class MalformedSyntax(QasmError):
    pass


class MultipleRegisters(QasmError):
    pass


class GateKind(str, Enum):
    H = "h"
    X = "x"
    Z = "z"
    S = "s"
    SX = "sx"
    RX = "rx"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    XCX = "xcx"
    SWAP = "swap"
    # compiled macros, produced only by the merge pass
    HH = "hh"
    XX = "xx"
    ZZ = "zz"

    @property
    def is_rotation(self) -> bool:
        return self in (GateKind.RX, GateKind.RZ)

    @property
    def is_two_qubit(self) -> bool:
        return self in TWO_QUBIT_KINDS

    @property
    def is_macro(self) -> bool:
        return self in PATCH_MACROS


ONE_QUBIT_KINDS = frozenset({GateKind.H, GateKind.X, GateKind.Z, GateKind.S,
                             GateKind.SX, GateKind.RX, GateKind.RZ})
TWO_QUBIT_KINDS = frozenset({GateKind.CX, GateKind.CZ, GateKind.XCX, GateKind.SWAP})
PATCH_MACROS = frozenset({GateKind.HH, GateKind.XX, GateKind.ZZ})
SELF_INVERSE = frozenset({GateKind.H, GateKind.X, GateKind.Z, GateKind.CX,
                          GateKind.CZ, GateKind.XCX, GateKind.SWAP})
SYMMETRIC = frozenset({GateKind.CZ, GateKind.XCX, GateKind.SWAP})

MACRO_OF = {GateKind.H: GateKind.HH, GateKind.X: GateKind.XX, GateKind.Z: GateKind.ZZ}
BASE_OF_MACRO = {v: k for k, v in MACRO_OF.items()}


class Variant(str, Enum):
    TARGETED = "targeted"
    PATCHWISE = "patch-wise"
    INTRA = "intra"
    INTER = "inter"
    TRANSVERSAL = "transversal"


@dataclass(frozen=True)
class Gate:
    """A logical gate.

    For CX the operands are (control, target).  Transversal macros carry four
    operands ``(a0, a1, b0, b1)``: the two merged gates ``kind(a0, a1)`` and
    ``kind(b0, b1)``.  Patch macros (HH/XX/ZZ) carry the program qubits of a
    patch, one or two of them.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    variant: Variant | None = None

    def __post_init__(self):
        q = tuple(int(x) for x in self.qubits)
        object.__setattr__(self, "qubits", q)
        if len(set(q)) != len(q):
            raise ValueError(f"repeated operand in {self.kind.name}{q}")
        k = self.kind
        if k in ONE_QUBIT_KINDS:
            arity = (1,)
        elif k in PATCH_MACROS:
            arity = (1, 2)
        elif self.variant is Variant.TRANSVERSAL:
            arity = (4,)
        else:
            arity = (2,)
        if len(q) not in arity:
            raise ValueError(f"{k.name} expects {arity} operands, got {len(q)}")
        if k.is_rotation:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{k.name} needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{k.name} takes no angle")

    @property
    def is_transversal(self) -> bool:
        return self.variant is Variant.TRANSVERSAL

    def parts(self) -> tuple["Gate", ...]:
        """Expand a macro into its constituent plain gates."""
        if self.kind in PATCH_MACROS:
            base = BASE_OF_MACRO[self.kind]
            return tuple(Gate(base, (q,)) for q in self.qubits)
        if self.is_transversal:
            a0, a1, b0, b1 = self.qubits
            return (Gate(self.kind, (a0, a1)), Gate(self.kind, (b0, b1)))
        return (self,)

    def same_action(self, other: "Gate") -> bool:
        if self.kind != other.kind or self.angle != other.angle or self.variant != other.variant:
            return False
        if self.kind in SYMMETRIC and len(self.qubits) == 2:
            return set(self.qubits) == set(other.qubits)
        return self.qubits == other.qubits

    def __str__(self):
        arg = f"({self.angle!r})" if self.angle is not None else ""
        tag = f"[{self.variant.value}]" if self.variant else ""
        return f"{self.kind.name}{arg}{tag}{self.qubits}"


@dataclass(frozen=True)
class LogicalCircuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    measured: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 0:
            raise ValueError("negative qubit count")
        for g in self.gates:
            if any(q >= self.num_qubits or q < 0 for q in g.qubits):
                raise ValueError(f"{g} out of range for {self.num_qubits} qubits")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates) -> "LogicalCircuit":
        return LogicalCircuit(self.num_qubits, tuple(gates), self.measured)

    def count(self, kind: GateKind) -> int:
        return sum(g.kind is kind for g in self.gates)


# --- parsing -------------------------------------------------------------

_PARSED = {
    "h": GateKind.H, "x": GateKind.X, "z": GateKind.Z, "s": GateKind.S,
    "sx": GateKind.SX, "rx": GateKind.RX, "rz": GateKind.RZ,
    "cx": GateKind.CX, "cz": GateKind.CZ, "swap": GateKind.SWAP,
}
_ARITY = {"sdg": 1, **{k: (2 if v in TWO_QUBIT_KINDS else 1) for k, v in _PARSED.items()}}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_angle(expr: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise MalformedSyntax(f"bad angle expression {expr!r}")

    try:
        val = ev(ast.parse(expr.strip(), mode="eval"))
    except SyntaxError as exc:
        raise MalformedSyntax(f"bad angle expression {expr!r}") from exc
    if not math.isfinite(val):
        raise MalformedSyntax(f"non-finite angle {expr!r}")
    return val


_STMT = re.compile(r"^([a-zA-Z_][a-zA-Z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.S)
_ARG = re.compile(r"^([a-zA-Z_][a-zA-Z0-9_]*)\s*(?:\[\s*(\d+)\s*\])?$")


def _strip_comments(text: str) -> str:
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    return re.sub(r"//[^\n]*", "", text)


def parse_qasm(text: str) -> LogicalCircuit:
    """Parse an OpenQASM 2.0 program restricted to one quantum register."""
    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    gates: list[Gate] = []
    measured: set[int] = set()

    def operand(arg: str) -> list[int]:
        m = _ARG.match(arg.strip())
        if not m:
            raise MalformedSyntax(f"bad operand {arg!r}")
        if qreg is None:
            raise MalformedSyntax("gate before qreg declaration")
        if m.group(1) != qreg[0]:
            raise MalformedSyntax(f"unknown register {m.group(1)!r}")
        if m.group(2) is None:
            return list(range(qreg[1]))
        idx = int(m.group(2))
        if idx >= qreg[1]:
            raise MalformedSyntax(f"index {idx} out of range")
        return [idx]

    for raw in _strip_comments(text).split(";"):
        stmt = " ".join(raw.split())
        if not stmt:
            continue
        head = stmt.split(" ", 1)[0]
        if head == "OPENQASM" or head == "include":
            continue
        if head in ("qreg", "creg"):
            m = re.match(r"^(qreg|creg)\s+([a-zA-Z_]\w*)\s*\[\s*(\d+)\s*\]$", stmt)
            if not m:
                raise MalformedSyntax(f"bad register declaration {stmt!r}")
            decl = (m.group(2), int(m.group(3)))
            if head == "qreg":
                if qreg is not None:
                    raise MultipleRegisters("only one qreg is supported")
                qreg = decl
            else:
                if creg is not None:
                    raise MultipleRegisters("only one creg is supported")
                creg = decl
            continue
        if head == "barrier":
            continue
        if head == "measure":
            m = re.match(r"^measure\s+(.+?)\s*->\s*(.+)$", stmt)
            if not m:
                raise MalformedSyntax(f"bad measure {stmt!r}")
            measured.update(operand(m.group(1)))
            continue
        if head in ("gate", "opaque", "if", "reset"):
            raise UnsupportedGate(f"unsupported statement {head!r}")
        m = _STMT.match(stmt)
        if not m:
            raise MalformedSyntax(f"cannot parse {stmt!r}")
        name, params, args = m.group(1), m.group(2), m.group(3)
        if name not in _ARITY:
            raise UnsupportedGate(f"gate {name!r} is outside the supported subset")
        if measured:
            raise MalformedSyntax("gates after measurement are not supported")
        ops = [operand(a) for a in args.split(",")] if args.strip() else []
        if len(ops) != _ARITY[name]:
            raise MalformedSyntax(f"{name} expects {_ARITY[name]} operands")
        kind = _PARSED.get(name)
        angle = None
        if kind is not None and kind.is_rotation:
            if params is None:
                raise MalformedSyntax(f"{name} needs an angle")
            angle = _eval_angle(params)
        elif params is not None:
            raise MalformedSyntax(f"{name} takes no parameters")
        if len(ops) == 1:
            for q in ops[0]:
                if name == "sdg":
                    gates.extend(Gate(GateKind.S, (q,)) for _ in range(3))
                else:
                    gates.append(Gate(kind, (q,), angle))
        else:
            a, b = ops
            if len(a) != 1 or len(b) != 1:
                raise MalformedSyntax("register broadcast is not supported for two-qubit gates")
            try:
                gates.append(Gate(kind, (a[0], b[0])))
            except ValueError as exc:
                raise MalformedSyntax(str(exc)) from exc

    if qreg is None:
        raise MalformedSyntax("no qreg declared")
    if measured and measured != set(range(qreg[1])):
        raise MalformedSyntax("only full-register terminal measurement is supported")
    return LogicalCircuit(qreg[1], tuple(gates), bool(measured))


def emit_qasm(c: LogicalCircuit) -> str:
    """Write a plain (macro-free) circuit back to the parsed subset."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    if c.measured:
        lines.append(f"creg c[{c.num_qubits}];")
    for g in c.gates:
        if g.kind in PATCH_MACROS or g.variant is not None or g.kind is GateKind.XCX:
            raise ValueError(f"{g} has no QASM spelling")
        arg = f"({g.angle!r})" if g.angle is not None else ""
        ops = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{g.kind.value}{arg} {ops};")
    if c.measured:
        lines.append("measure q -> c;")
    return "\n".join(lines) + "\n"


# --- scheduling ------------------------------------------------------------

def gate_moments(gates, num_qubits: int | None = None) -> list[int]:
    """ASAP moment index of each gate (0-based)."""
    last: dict[int, int] = {}
    out = []
    for g in gates:
        qs = g.qubits
        t = max((last.get(q, -1) for q in qs), default=-1) + 1
        for q in qs:
            last[q] = t
        out.append(t)
    return out


def moments(c: LogicalCircuit) -> list[set[int]]:
    idx = gate_moments(c.gates)
    out: list[set[int]] = [set() for _ in range(max(idx) + 1 if idx else 0)]
    for i, t in enumerate(idx):
        out[t].add(i)
    return out


def depth(c: LogicalCircuit) -> int:
    idx = gate_moments(c.gates)
    return max(idx) + 1 if idx else 0


# --- cancellation ------------------------------------------------------------

def _push_swaps_right(gates):
    """Move every SWAP to the end by relabelling the gates that follow it."""
    body: list[Gate] = []
    swaps: list[Gate] = []
    # wire[q]: the label, in front of all swaps seen so far, of current qubit q
    wire: dict[int, int] = {}
    for g in gates:
        if g.kind is GateKind.SWAP and not g.is_transversal:
            a, b = g.qubits
            wa, wb = wire.get(a, a), wire.get(b, b)
            wire[a], wire[b] = wb, wa
            swaps.append(g)
        else:
            qs = tuple(wire.get(q, q) for q in g.qubits)
            body.append(Gate(g.kind, qs, g.angle, g.variant))
    return body, swaps


def push_swaps_right(c: LogicalCircuit) -> LogicalCircuit:
    """Equivalent circuit with every SWAP moved to the end."""
    body, swaps = _push_swaps_right(c.gates)
    return c.with_gates(body + swaps)


def cancel_gates(gates, protect=frozenset()) -> list[Gate]:
    """Stack-based removal of adjacent identical self-inverse gates.

    ``protect`` holds indices that never cancel (used to fence off blocks).
    """
    gates = list(gates)
    alive = [True] * len(gates)
    stacks: dict[int, list[int]] = {}
    for i, g in enumerate(gates):
        qs = g.qubits
        if i not in protect and g.kind in SELF_INVERSE:
            tops = {stacks[q][-1] if stacks.get(q) else None for q in qs}
            if len(tops) == 1:
                j = tops.pop()
                if j is not None and j not in protect and gates[j].same_action(g):
                    alive[j] = alive[i] = False
                    for q in qs:
                        stacks[q].pop()
                    continue
        for q in qs:
            stacks.setdefault(q, []).append(i)
    return [g for g, a in zip(gates, alive) if a]


def cancel_adjacent(c: LogicalCircuit) -> LogicalCircuit:
    body, swaps = _push_swaps_right(c.gates)
    body = cancel_gates(body)
    swaps = cancel_gates(swaps)
    return c.with_gates(body + swaps)
