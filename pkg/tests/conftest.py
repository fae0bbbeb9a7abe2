import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from icepack.ir import Gate, GateKind, LogicalCircuit

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ANGLES = (0.3, -1.1, 2.5)


@st.composite
def circuits(draw, n_min=2, n_max=5, max_gates=25, kinds=None, rotations=True, swaps=True):
    """Random logical circuits over the supported gate set."""
    n = draw(st.integers(n_min, n_max))
    one = [GateKind.H, GateKind.X, GateKind.Z, GateKind.S, GateKind.SX]
    two = [GateKind.CX, GateKind.CZ, GateKind.XCX] + ([GateKind.SWAP] if swaps else [])
    if rotations:
        one += [GateKind.RX, GateKind.RZ]
    pool = kinds or one + two
    gates = []
    for _ in range(draw(st.integers(0, max_gates))):
        k = draw(st.sampled_from(pool))
        if k.is_two_qubit and n < 2:
            continue
        if k.is_two_qubit:
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            gates.append(Gate(k, (a, b)))
        else:
            q = draw(st.integers(0, n - 1))
            angle = draw(st.sampled_from(ANGLES)) if k.is_rotation else None
            gates.append(Gate(k, (q,), angle))
    return LogicalCircuit(n, tuple(gates))


def circuit_unitary(c: LogicalCircuit) -> np.ndarray:
    from icepack.sim.metrics import _lower
    from icepack.sim.statevector import unitary

    ops = [o for g in c.gates for part in g.parts() for o in _lower(part)]
    return unitary(ops, c.num_qubits)


@pytest.fixture
def bell_qasm():
    return 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nmeasure q -> c;\n'


# acceptance results, printed once at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
