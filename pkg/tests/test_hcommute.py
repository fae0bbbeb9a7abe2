import pytest
from hypothesis import given

from icepack.hcommute import NotAnOperand, commute_hadamards, conjugate_by_h
from icepack.ir import Gate, GateKind, LogicalCircuit
from icepack.sim.metrics import _lower
from icepack.sim.statevector import equal_up_to_phase, unitary

from conftest import circuit_unitary, circuits


def _conj_unitary(g, q, n=2):
    ops = [("H", (q,), None), *_lower(g), ("H", (q,), None)]
    return unitary(ops, n)


@pytest.mark.parametrize("g, q", [
    (Gate(GateKind.X, (0,)), 0), (Gate(GateKind.Z, (0,)), 0), (Gate(GateKind.S, (0,)), 0),
    (Gate(GateKind.SX, (0,)), 0), (Gate(GateKind.RZ, (0,), 0.7), 0), (Gate(GateKind.RX, (0,), 0.7), 0),
    (Gate(GateKind.CX, (0, 1)), 0), (Gate(GateKind.CX, (0, 1)), 1),
    (Gate(GateKind.CZ, (0, 1)), 0), (Gate(GateKind.CZ, (0, 1)), 1),
    (Gate(GateKind.XCX, (0, 1)), 0), (Gate(GateKind.XCX, (0, 1)), 1),
])
def test_conjugation_rules(g, q):
    out = conjugate_by_h(g, q)
    assert equal_up_to_phase(unitary(_lower(out), 2), _conj_unitary(g, q))


def test_not_an_operand():
    with pytest.raises(NotAnOperand):
        conjugate_by_h(Gate(GateKind.X, (0,)), 1)


@given(circuits(n_max=5, max_gates=30))
def test_at_most_one_trailing_h_per_qubit(c):
    out = commute_hadamards(c)
    hs = [g.qubits[0] for g in out.gates if g.kind is GateKind.H]
    assert len(hs) == len(set(hs))
    k = [g.kind for g in out.gates]
    if hs:
        first = k.index(GateKind.H)
        assert all(x is GateKind.H for x in k[first:])
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))


def test_h_pair_vanishes():
    c = LogicalCircuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1)), Gate(GateKind.H, (0,))))
    out = commute_hadamards(c)
    assert out.gates == (Gate(GateKind.XCX, (0, 1)),)
