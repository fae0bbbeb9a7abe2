"""Push every logical Hadamard to the end of the circuit."""

from __future__ import annotations

from .ir import Gate, GateKind, LogicalCircuit

_ONE_Q_SWAP = {
    GateKind.X: GateKind.Z, GateKind.Z: GateKind.X,
    GateKind.S: GateKind.SX, GateKind.SX: GateKind.S,
    GateKind.RX: GateKind.RZ, GateKind.RZ: GateKind.RX,
}


class NotAnOperand(ValueError):
    pass


def conjugate_by_h(g: Gate, q: int) -> Gate:
    """Return H_q g H_q written in the logical gate set."""
    if q not in g.qubits:
        raise NotAnOperand(f"qubit {q} is not an operand of {g}")
    k = g.kind
    if k in _ONE_Q_SWAP:
        return Gate(_ONE_Q_SWAP[k], g.qubits, g.angle)
    if k is GateKind.SWAP:
        return g
    a, b = g.qubits
    other = b if q == a else a
    if k is GateKind.CX:
        return Gate(GateKind.XCX, g.qubits) if q == a else Gate(GateKind.CZ, g.qubits)
    if k is GateKind.CZ:
        return Gate(GateKind.CX, (other, q))
    if k is GateKind.XCX:
        return Gate(GateKind.CX, (q, other))
    raise ValueError(f"cannot conjugate {g} by H")


def commute_hadamards(c: LogicalCircuit) -> LogicalCircuit:
    frame = [False] * c.num_qubits
    out: list[Gate] = []
    for g in c.gates:
        if g.kind is GateKind.H:
            frame[g.qubits[0]] ^= True
            continue
        if g.kind is GateKind.SWAP:
            a, b = g.qubits
            frame[a], frame[b] = frame[b], frame[a]
            out.append(g)
            continue
        for q in g.qubits:
            if frame[q]:
                g = conjugate_by_h(g, q)
        out.append(g)
    out.extend(Gate(GateKind.H, (q,)) for q in range(c.num_qubits) if frame[q])
    return c.with_gates(out)
