import pytest
from hypothesis import given
from hypothesis import strategies as st

from icepack.ir import SYMMETRIC, Gate, GateKind, LogicalCircuit, Variant
from icepack.merge import (CircuitIndex, InvalidPacking, apply_merges, best_subset_exhaustive,
                           conflict_clusters, find_candidates, find_candidates_bruteforce,
                           merge_savings, pair_savings, resolve_cluster, select_merges)
from icepack.pack import Packing, naive_packing
from icepack.sim.statevector import equal_up_to_phase

from conftest import circuit_unitary, circuits

def _key(g):
    qs = tuple(sorted(g.qubits)) if g.kind in SYMMETRIC else g.qubits
    return (g.kind.value, qs)


MERGE_KINDS = [GateKind.H, GateKind.X, GateKind.Z, GateKind.S, GateKind.CX, GateKind.CZ, GateKind.XCX]


def test_merge_savings_values():
    # derived from the implemented templates: two targeted gates vs one patch-wise macro
    assert merge_savings(GateKind.H) == (10, 8)
    assert merge_savings(GateKind.X) == (2, 0)
    assert merge_savings(GateKind.Z) == (2, 0)
    # two inter-patch gates vs one transversal macro
    assert merge_savings(GateKind.CX) == (0, 4)
    assert merge_savings(GateKind.CZ) == (0, 4)
    assert merge_savings(GateKind.XCX) == (8, 4)


@given(circuits(n_min=3, n_max=5, max_gates=20, kinds=MERGE_KINDS), st.data())
def test_candidates_match_bruteforce(c, data):
    i, j = data.draw(st.lists(st.integers(0, c.num_qubits - 1), min_size=2, max_size=2, unique=True))
    fast = sorted(find_candidates(c, i, j))
    slow = find_candidates_bruteforce(c, i, j)
    assert [(m.gate_a, m.gate_b) for m in fast] == [(m.gate_a, m.gate_b) for m in slow]


@given(circuits(n_min=3, n_max=5, max_gates=20, kinds=MERGE_KINDS), st.data())
def test_candidates_match_bruteforce_with_slots(c, data):
    n = c.num_qubits
    i, j = 0, 1
    slots = {q: data.draw(st.integers(0, 1)) for q in range(2, n)}
    slots[i], slots[j] = 0, 1
    fast = sorted(find_candidates(c, i, j, slots))
    slow = find_candidates_bruteforce(c, i, j, slots)
    assert [(m.gate_a, m.gate_b) for m in fast] == [(m.gate_a, m.gate_b) for m in slow]


@given(circuits(n_min=2, n_max=4, max_gates=24, kinds=MERGE_KINDS))
def test_resolution_is_conflict_free_and_near_optimal(c):
    ix = CircuitIndex(c)
    cands = find_candidates(c, 0, 1, index=ix)
    for cl in conflict_clusters(cands, ix, 0, 1):
        if len(cl.candidates) > 16:
            continue
        chosen = resolve_cluster(cl)
        picked = {cl.candidates.index(m) for m in chosen}
        assert not any(a in picked and b in picked for a, b in cl.conflicts)
        assert sum(m.savings for m in chosen) <= best_subset_exhaustive(cl)


def test_simple_h_merge():
    c = LogicalCircuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.H, (1,))))
    ps = pair_savings(c, 0, 1)
    assert (ps.s1, ps.s2) == merge_savings(GateKind.H)
    out = apply_merges(c, Packing([(0, 1)]))
    assert out.gates == (Gate(GateKind.HH, (0, 1)),)


def test_dependent_gates_do_not_merge():
    # the CX makes the second H depend on the first
    c = LogicalCircuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1)), Gate(GateKind.H, (1,))))
    assert find_candidates(c, 0, 1) == []


def test_transversal_cx_merge():
    # 0,1 in patch A and 2,3 in patch B; CX(0,2) and CX(1,3) merge
    c = LogicalCircuit(4, (Gate(GateKind.CX, (0, 2)), Gate(GateKind.CX, (1, 3))))
    out, applied = apply_merges(c, Packing([(0, 1), (2, 3)]), return_applied=True)
    assert len(out.gates) == 1
    g = out.gates[0]
    assert g.variant is Variant.TRANSVERSAL and g.kind is GateKind.CX
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))


def test_same_slot_partners_rejected():
    c = LogicalCircuit(4, (Gate(GateKind.CX, (0, 2)), Gate(GateKind.CX, (1, 3))))
    # 2 and 3 would need different slots of patch B; here they share a slot index
    assert select_merges(c, Packing([(0, 1), (2, None), (3, None)])) == []


def test_invalid_packing():
    c = LogicalCircuit(3)
    with pytest.raises(InvalidPacking):
        apply_merges(c, Packing([(0, 1)]))
    with pytest.raises(InvalidPacking):
        apply_merges(c, Packing([(0, 1), (1, 2)]))


@given(circuits(n_min=2, n_max=6, max_gates=30, kinds=MERGE_KINDS), st.randoms(use_true_random=False))
def test_apply_merges_preserves_unitary(c, rnd):
    order = list(range(c.num_qubits))
    rnd.shuffle(order)
    packing = naive_packing(c.num_qubits, order=order)
    out = apply_merges(c, packing)
    assert sorted(_key(p) for g in out.gates for p in g.parts()) == sorted(_key(g) for g in c.gates)
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))
