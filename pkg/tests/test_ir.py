import math

import pytest
from hypothesis import given

from icepack.ir import (Gate, GateKind, LogicalCircuit, MalformedSyntax, MultipleRegisters,
                        UnsupportedGate, Variant, cancel_adjacent, depth, emit_qasm, moments,
                        parse_qasm, push_swaps_right)
from icepack.sim.statevector import equal_up_to_phase

from conftest import circuit_unitary, circuits


def test_parse_bell(bell_qasm):
    c = parse_qasm(bell_qasm)
    assert c.num_qubits == 2
    assert c.measured
    assert [g.kind for g in c.gates] == [GateKind.H, GateKind.CX]
    assert c.gates[1].qubits == (0, 1)


def test_parse_angles_and_broadcast():
    c = parse_qasm("OPENQASM 2.0; qreg q[3]; rz(pi/4) q[1]; rx(-2*pi/3) q[0]; h q;")
    assert c.gates[0].angle == pytest.approx(math.pi / 4)
    assert c.gates[1].angle == pytest.approx(-2 * math.pi / 3)
    assert [g.qubits for g in c.gates[2:]] == [(0,), (1,), (2,)]


def test_sdg_expands_to_three_s():
    c = parse_qasm("OPENQASM 2.0; qreg q[1]; sdg q[0];")
    assert [g.kind for g in c.gates] == [GateKind.S] * 3


def test_comments_and_barrier_ignored():
    c = parse_qasm("OPENQASM 2.0; // hi\nqreg q[2]; /* block */ barrier q; x q[1];")
    assert len(c) == 1


@pytest.mark.parametrize("text, err", [
    ("OPENQASM 2.0; qreg q[2]; t q[0];", UnsupportedGate),
    ("OPENQASM 2.0; qreg q[2]; ccx q[0],q[1],q[1];", UnsupportedGate),
    ("OPENQASM 2.0; qreg q[2]; qreg r[2];", MultipleRegisters),
    ("OPENQASM 2.0; qreg q[2]; cx q[0],q[0];", MalformedSyntax),
    ("OPENQASM 2.0; qreg q[2]; h q[5];", MalformedSyntax),
    ("OPENQASM 2.0; qreg q[2]; rz q[0];", MalformedSyntax),
    ("OPENQASM 2.0; qreg q[2]; rz(foo) q[0];", MalformedSyntax),
    ("OPENQASM 2.0; h q[0];", MalformedSyntax),
    ("OPENQASM 2.0;", MalformedSyntax),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_qasm(text)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.CX, (1, 1))
    with pytest.raises(ValueError):
        Gate(GateKind.RZ, (0,))
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0,), 0.5)
    with pytest.raises(ValueError):
        LogicalCircuit(2, (Gate(GateKind.H, (2,)),))


def test_transversal_macro_parts():
    g = Gate(GateKind.CX, (0, 1, 2, 3), variant=Variant.TRANSVERSAL)
    assert [p.qubits for p in g.parts()] == [(0, 1), (2, 3)]
    hh = Gate(GateKind.HH, (0, 1))
    assert [p.kind for p in hh.parts()] == [GateKind.H, GateKind.H]


def test_depth_and_moments():
    c = LogicalCircuit(3, (Gate(GateKind.H, (0,)), Gate(GateKind.H, (1,)),
                           Gate(GateKind.CX, (0, 1)), Gate(GateKind.X, (2,))))
    assert depth(c) == 2
    assert moments(c) == [{0, 1, 3}, {2}]
    assert depth(LogicalCircuit(2)) == 0


@given(circuits(rotations=False))
def test_qasm_roundtrip(c):
    c = c.with_gates(g for g in c.gates if g.kind is not GateKind.XCX)
    back = parse_qasm(emit_qasm(c))
    assert back.num_qubits == c.num_qubits
    assert back.gates == c.gates


@given(circuits(n_max=4))
def test_cancel_preserves_unitary(c):
    out = cancel_adjacent(c)
    assert len(out) <= len(c)
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))


@given(circuits(n_max=4))
def test_cancel_is_idempotent(c):
    once = cancel_adjacent(c)
    assert cancel_adjacent(once).gates == once.gates


@given(circuits(n_max=4))
def test_push_swaps_right(c):
    out = push_swaps_right(c)
    kinds = [g.kind for g in out.gates]
    if GateKind.SWAP in kinds:
        first = kinds.index(GateKind.SWAP)
        assert all(k is GateKind.SWAP for k in kinds[first:])
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))


def test_cancel_pairs():
    c = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1]; cx q[0],q[1]; h q[0]; s q[1];")
    assert [g.kind for g in cancel_adjacent(c).gates] == [GateKind.S]
