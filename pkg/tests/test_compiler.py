import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from icepack.bench import random_circuit
from icepack.compiler import ALL_PASSES, IcebergCompiler, compile_circuit, naive_baseline, preprocess
from icepack.ir import Gate, GateKind, LogicalCircuit, emit_qasm
from icepack.pack import InvalidTarget
from icepack.sim.metrics import exact_logical_distribution, ideal_distribution, tvd
from icepack.translate import PhysicalCircuit, resource_report
from icepack.validation import check_circuit, check_passes, check_target_args


def test_check_passes():
    assert check_passes(None) == ALL_PASSES
    assert check_passes("pack, merge") == ("merge", "pack")
    assert check_passes("") == ()
    with pytest.raises(ValueError):
        check_passes("merge,bogus")


def test_check_target_args():
    assert check_target_args(7) == 4
    assert check_target_args(8, density=1.0) == 8
    with pytest.raises(ValueError):
        check_target_args(8, patches=4, density=2.0)
    with pytest.raises(InvalidTarget):
        check_target_args(8, patches=3)


def test_check_circuit_inputs(tmp_path, bell_qasm):
    f = tmp_path / "bell.qasm"
    f.write_text(bell_qasm)
    assert check_circuit(f).num_qubits == 2
    assert check_circuit(str(f)).num_qubits == 2
    assert check_circuit(bell_qasm).num_qubits == 2
    with pytest.raises(TypeError):
        check_circuit(3)


def test_preprocess_reduces_hadamards():
    c = random_circuit(6, 10, seed=2)
    out = preprocess(c)
    assert out.count(GateKind.H) <= c.num_qubits


def test_full_pipeline_beats_baseline():
    c = random_circuit(16, 10, seed=4)
    base = resource_report(naive_baseline(c).physical)
    ours = resource_report(compile_circuit(c).physical)
    assert ours.n1q < base.n1q
    assert ours.n2q < base.n2q
    assert ours.depth < base.depth


def test_pass_log_and_report():
    res = compile_circuit(random_circuit(6, 5, seed=0))
    names = [e["pass"] for e in res.pass_log]
    assert names[0] == "cancel" and names[-1] == "translate"
    assert {"hcommute", "score", "pack", "grid", "merge"} <= set(names)
    rep = res.report()
    assert set(rep) == {"resources", "packing", "grid", "pass_log"}


def test_compile_is_deterministic():
    c = random_circuit(10, 8, seed=6)
    a, b = compile_circuit(c).physical, compile_circuit(c).physical
    assert a.to_json() == b.to_json()


def test_density_sets_patch_count():
    c = random_circuit(10, 4, seed=1)
    assert compile_circuit(c, density=1.0).physical.n_patches == 10
    assert compile_circuit(c, patches=7).physical.n_patches == 7


def test_estimator_params_and_clone():
    est = IcebergCompiler(patches=3, gamma=0.5)
    params = est.get_params()
    assert params["patches"] == 3 and params["gamma"] == 0.5
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(delta=0.0)
    assert est.delta == 0.0


def test_estimator_not_fitted():
    with pytest.raises(NotFittedError):
        IcebergCompiler().transform(LogicalCircuit(2))


def test_estimator_fit_transform():
    c = LogicalCircuit(4, (Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1)), Gate(GateKind.CZ, (2, 3)),
                           Gate(GateKind.CX, (1, 3))))
    est = IcebergCompiler()
    p = est.fit_transform(c)
    assert isinstance(p, PhysicalCircuit)
    assert est.packing_.n_patches == 2 and est.n_qubits_ == 4
    got, acc = exact_logical_distribution(p)
    assert acc == pytest.approx(1) and tvd(got, ideal_distribution(c)) < 1e-9
    assert est.transform(emit_qasm(c)).to_json() == p.to_json()
    with pytest.raises(ValueError):
        est.transform(LogicalCircuit(5))


def test_estimator_bias_changes_scores():
    c = random_circuit(6, 8, seed=8)
    a = IcebergCompiler().fit(c).scores_.w
    b = IcebergCompiler(delta=0.0).fit(c).scores_.w
    assert not np.allclose(a, b)
