import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icepack.bench import random_circuit
from icepack.compiler import preprocess
from icepack.ir import Gate, GateKind, LogicalCircuit
from icepack.pack import (BiasWeights, InvalidTarget, Packing, default_grid, exhaustive_pack,
                          grid_align, greedy_pack, interaction_weights, naive_packing, packing_score,
                          pair_cell, patches_for_density, penalty, score_matrix, solo_h_savings,
                          solo_score)
from icepack.sim.noise import NoiseModel

from conftest import circuits

PACK_KINDS = [GateKind.H, GateKind.X, GateKind.Z, GateKind.S, GateKind.CX, GateKind.CZ, GateKind.XCX]


def test_bias_defaults():
    assert BiasWeights() == BiasWeights(1.0, 1.0, 0.2, -0.1)


def test_penalty_ordering():
    # CNOTs prefer separation most, CZ less, XCX prefers pairing
    assert penalty(GateKind.CX) > penalty(GateKind.CZ) > 0 > penalty(GateKind.XCX)


def test_penalty_formula_for_cz():
    w = NoiseModel().weights()
    # intra (1,3,3) vs transversal (0,4,1)
    expected = w["w_depth"] * (3 - 1) + w["w_2q"] * (3 - 4) + w["w_1q"] * (1 - 0)
    assert penalty(GateKind.CZ) == pytest.approx(expected)


def test_noise_weights():
    w = NoiseModel().weights()
    assert w["w_2q"] == 1.0
    assert w["w_1q"] == pytest.approx(0.2)


def test_solo_score_idle_qubit_is_zero():
    c = LogicalCircuit(2, (Gate(GateKind.X, (1,)),))
    assert solo_score(c, 0) == 0


def test_solo_score_counts_h():
    c = LogicalCircuit(1, (Gate(GateKind.H, (0,)),))
    s1, s2 = solo_h_savings()
    assert solo_score(c, 0) == s1 + s2
    m = score_matrix(c)
    assert m.w.shape == (1, 1) and m.w[0, 0] == s1 + s2


@given(circuits(n_min=2, n_max=5, max_gates=25, kinds=PACK_KINDS))
def test_score_matrix_matches_single_cell_path(c):
    m = score_matrix(c)
    assert np.allclose(m.w, m.w.T)
    for i in range(c.num_qubits):
        assert m.w[i, i] == pytest.approx(solo_score(c, i))
        for j in range(i + 1, c.num_qubits):
            w, ps, t = pair_cell(c, i, j)
            assert m.w[i, j] == pytest.approx(w)
            assert m.T[i, j] == pytest.approx(t)
            assert m.w[i, j] == pytest.approx(ps.s1 + ps.s2 - 0.2 * ps.delay - 0.1 * t)


def test_check_target():
    m = score_matrix(LogicalCircuit(4))
    with pytest.raises(InvalidTarget):
        greedy_pack(m, 1)
    with pytest.raises(InvalidTarget):
        greedy_pack(m, 5)


def test_trivial_packings():
    c = LogicalCircuit(2, (Gate(GateKind.H, (0,)),))
    assert sorted(q for q in greedy_pack(score_matrix(c), 1).patches[0]) == [0, 1]
    p = greedy_pack(score_matrix(LogicalCircuit(4)), 4)
    assert p.patches == [(q, None) for q in range(4)]


@given(circuits(n_min=2, n_max=6, max_gates=25, kinds=PACK_KINDS), st.data())
def test_greedy_packing_invariants(c, data):
    n = c.num_qubits
    N = data.draw(st.integers(math.ceil(n / 2), n))
    m = score_matrix(c)
    p = greedy_pack(m, N)
    assert p.n_patches == N
    flat = [q for pair in p.patches for q in pair if q is not None]
    assert sorted(flat) == list(range(n))
    assert sum(None not in pair for pair in p.patches) == n - N
    assert sum(None in pair for pair in p.patches) == 2 * N - n
    pairs = [tuple(x for x in pair) for pair in p.patches if None not in pair]
    solos = [pair[0] for pair in p.patches if None in pair]
    score = packing_score(m, pairs, solos)
    if p.history:
        assert p.history[-1]["score"] == pytest.approx(score)
    best, _ = exhaustive_pack(m, N)
    assert score <= best + 1e-9


def test_density_conventions():
    assert patches_for_density(20, 2.0) == 10
    assert patches_for_density(20, 1.0) == 20
    assert patches_for_density(20, 1.5) == 14
    with pytest.raises(InvalidTarget):
        patches_for_density(20, 2.5)
    p = naive_packing(6, 3)
    assert p.density == 1.0 and p.qubits_per_patch == 2.0


def test_naive_packing_order():
    p = naive_packing(5, 3, order=[4, 3, 2, 1, 0])
    assert p.patches == [(4, 3), (2, 1), (0, None)]


def test_grid_single_patch():
    p = grid_align(Packing([(0, 1)]), LogicalCircuit(2))
    assert p.grid == [(0, 0)]


def test_grid_is_a_placement():
    c = preprocess(random_circuit(12, 6, seed=3))
    m = score_matrix(c)
    p = grid_align(greedy_pack(m, 6), c)
    assert len(set(p.grid)) == 6
    side = math.ceil(math.sqrt(6))
    assert all(0 <= r < side and 0 <= col < side for r, col in p.grid)


def test_grid_places_heaviest_pair_adjacent():
    # patches 0 and 2 interact heavily, patch 1 not at all
    c = LogicalCircuit(6, tuple(Gate(GateKind.CX, (0, 4)) for _ in range(3)))
    p = grid_align(Packing([(0, 1), (2, 3), (4, 5)]), c)
    W = interaction_weights(p, c)
    assert W[0, 2] > 0 and W[0, 1] == 0
    assert p.distance(0, 2) == 1


def test_default_grid_row_major():
    assert default_grid(Packing([(0, None)] * 5)).grid == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]


def test_score_csv():
    text = score_matrix(random_circuit(3, 4, seed=1)).to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "i,j,w,s1,s2,delay,T"
    assert len(lines) == 1 + 9
