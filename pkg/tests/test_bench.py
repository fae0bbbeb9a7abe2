import json

import numpy as np
import pytest

from icepack.bench import (BenchSpec, DensityPoint, ablation, distinct_permutations, improvement,
                           random_circuit, run_bench, to_csv)
from icepack.ir import GateKind


def test_random_circuit_shape_and_seed():
    a = random_circuit(8, 5, seed=1)
    assert a.num_qubits == 8 and len(a) == 40
    assert a.gates == random_circuit(8, 5, seed=1).gates
    assert a.gates != random_circuit(8, 5, seed=2).gates
    # no immediate self-inverse repeats
    for g, h in zip(a.gates, a.gates[1:]):
        assert not (g == h and g.kind in (GateKind.H, GateKind.X, GateKind.Z, GateKind.CX, GateKind.CZ))


def test_improvement():
    assert improvement(10, 8) == pytest.approx(0.2)
    assert improvement(0, 0) == 0.0


def test_distinct_permutations():
    rng = np.random.default_rng(0)
    perms = distinct_permutations(3, 10, rng)
    assert len(perms) == 6
    assert len({tuple(p) for p in perms}) == 6
    assert len(distinct_permutations(5, 20, rng)) == 20


def test_density_point_row():
    p = DensityPoint(2.0, 5, 80, 100, 50, 100, 10, 20)
    row = p.row()
    assert row["improvement_2q"] == pytest.approx(0.2)
    assert row["improvement_1q"] == pytest.approx(0.5)


def test_ablation_keys():
    out = ablation(random_circuit(6, 6, seed=0))
    assert set(out["single"]) == {"cancel", "hcommute", "merge", "pack", "grid"}
    assert out["full"]["n2q"] >= 0


def test_bench_spec_rejects_unknown_keys():
    with pytest.raises(ValueError):
        BenchSpec.from_json(json.dumps({"experiment": "density", "bogus": 1}))


def test_run_small_density_bench():
    spec = BenchSpec.from_json(json.dumps({"experiment": "density", "qubits": 8, "gates_per_qubit": 4,
                                           "circuits": 2, "perms": 3, "densities": [2.0, 1.0]}))
    rows, summary = run_bench(spec)
    assert len(rows) == 2
    text = to_csv(rows)
    assert text.splitlines()[0].startswith("density,")
    one = [r for r in rows if r["density"] == 1.0][0]
    assert one["improvement_2q"] == pytest.approx(0.0, abs=1e-12)
