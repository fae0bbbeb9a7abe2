import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from icepack.bench import random_circuit
from icepack.compiler import compile_circuit, naive_baseline
from icepack.ir import Gate, GateKind, LogicalCircuit
from icepack.sim.frame import measurement_record, sample
from icepack.sim.metrics import (EmptyKeptSet, clifford_proxy, counts, estimate_lsr, needs_proxy,
                                 postselect, simulate, tune_alpha, tvd)
from icepack.sim.noise import (Instruction, NoiseModel, NoisyCircuit, ProbabilityOverflow,
                               apply_noise_channels, randomize_measurements)
from icepack.sim.statevector import Statevector
from icepack.sim.tableau import NonCliffordGate

QUIET = NoiseModel(p1=0, p2=0, pm=0, alpha=0)


def _bell_physical():
    c = LogicalCircuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1))))
    return compile_circuit(c).physical


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(p1=1.5)
    with pytest.raises(ValueError):
        NoiseModel(T1=10, T2=30)
    with pytest.raises(ValueError):
        NoiseModel(alpha=-1)
    assert NoiseModel().c_move == pytest.approx(NoiseModel().p2 / 2)


def test_probability_overflow():
    with pytest.raises(ProbabilityOverflow):
        NoiseModel(p2=0.5, alpha=3).gate2()


def test_idle_channel_is_physical():
    px, py, pz = NoiseModel().idle(300.0)
    assert px == py > 0 and pz > 0 and px + py + pz < 0.01


def test_noiseless_has_no_channels():
    nc = apply_noise_channels(_bell_physical(), QUIET)
    assert nc.n_channels() == 0


def test_noisy_circuit_text_roundtrip():
    nc = apply_noise_channels(_bell_physical(), NoiseModel())
    back = NoisyCircuit.from_text(nc.to_text())
    assert back.instructions == nc.instructions
    assert back.plans == nc.plans and back.readout == nc.readout


def test_channels_inserted():
    nc = apply_noise_channels(_bell_physical(), NoiseModel())
    names = {i.name for i in nc.instructions}
    assert {"DEPOLARIZE1", "DEPOLARIZE2", "X_ERROR", "PAULI_CHANNEL_1"} <= names
    # measurement error precedes its measurement in the same moment
    first_m = next(k for k, i in enumerate(nc.instructions) if i.name == "M")
    assert any(i.name == "X_ERROR" for i in nc.instructions[:first_m])


def test_noiseless_sampling_accepts_everything():
    b = sample(apply_noise_channels(_bell_physical(), QUIET), 2000, seed=1)
    assert b.accept.all()
    dist, lsr = postselect(b)
    assert lsr == 1.0
    assert set(dist) == {"00", "11"}
    assert dist["00"] == pytest.approx(0.5, abs=0.05)


def test_empty_kept_set():
    nc = randomize_measurements(apply_noise_channels(_bell_physical(), QUIET))
    b = sample(nc, 5, seed=0)
    b.accept[:] = False
    with pytest.raises(EmptyKeptSet):
        postselect(b)


def test_full_randomization_gives_one_eighth():
    nc = randomize_measurements(apply_noise_channels(_bell_physical(), QUIET))
    b = sample(nc, 20000, seed=3)
    rate = b.patch_accept().mean()
    assert abs(rate - 1 / 8) < 3 * np.sqrt(1 / 8 * 7 / 8 / 20000)


def test_sampler_matches_statevector_chi2():
    ops = [("H", (0,)), ("H", (1,)), ("CX", (1, 2)), ("S", (2,)), ("H", (2,)), ("CZ", (0, 2)), ("H", (0,))]
    n, shots = 3, 40000
    probs = Statevector(n).apply(ops).probabilities()
    ins = [Instruction(name, qs) for name, qs in ops] + [Instruction("M", (q,)) for q in range(n)]
    rec, order = measurement_record(NoisyCircuit(n, ins, [], []), shots, seed=11)
    assert order == [0, 1, 2]
    idx = rec @ (1 << np.arange(n - 1, -1, -1))
    observed = np.bincount(idx, minlength=2 ** n)
    support = probs > 1e-12
    assert observed[~support].sum() == 0
    _, pval = stats.chisquare(observed[support], probs[support] * shots)
    assert pval > 1e-3


def test_x_error_rate():
    ins = [Instruction("X_ERROR", (0,), (0.1,)), Instruction("M", (0,))]
    rec, _ = measurement_record(NoisyCircuit(1, ins, [], []), 50000, seed=2)
    assert rec.mean() == pytest.approx(0.1, abs=0.006)


def test_depolarize1_flip_rate():
    # X and Y flip a Z measurement: 2/3 of p
    ins = [Instruction("DEPOLARIZE1", (0,), (0.3,)), Instruction("M", (0,))]
    rec, _ = measurement_record(NoisyCircuit(1, ins, [], []), 50000, seed=4)
    assert rec.mean() == pytest.approx(0.2, abs=0.008)


def test_non_clifford_rejected():
    ins = [Instruction("RZ", (0,), (0.3,)), Instruction("M", (0,))]
    with pytest.raises(NonCliffordGate):
        measurement_record(NoisyCircuit(1, ins, [], []), 10)


def test_seeded_determinism_and_worker_independence(monkeypatch):
    nc = apply_noise_channels(_bell_physical(), NoiseModel(alpha=5))
    a = sample(nc, 40000, seed=9)
    b = sample(nc, 40000, seed=9)
    assert np.array_equal(a.data, b.data) and np.array_equal(a.syndromes, b.syndromes)
    monkeypatch.setenv("ICEPACK_WORKERS", "2")
    c = sample(nc, 40000, seed=9)
    assert np.array_equal(a.data, c.data)
    assert not np.array_equal(a.data, sample(nc, 40000, seed=10).data)


def test_counts_without_postselection():
    b = sample(apply_noise_channels(_bell_physical(), NoiseModel(alpha=10)), 1000, seed=0)
    assert sum(counts(b, accepted_only=False).values()) == 1000
    assert sum(counts(b).values()) == int(b.accept.sum())


_dists = st.dictionaries(st.sampled_from(["00", "01", "10", "11"]), st.floats(0.01, 1.0), min_size=1)


def _norm(d):
    s = sum(d.values())
    return {k: v / s for k, v in d.items()}


@given(_dists, _dists)
def test_tvd_properties(p, q):
    p, q = _norm(p), _norm(q)
    assert 0 <= tvd(p, q) <= 1
    assert tvd(p, q) == pytest.approx(tvd(q, p))
    assert tvd(p, p) == 0


def test_lsr_monotone_in_alpha():
    p = naive_baseline(random_circuit(4, 6, seed=5)).physical
    lsr = [estimate_lsr(p, NoiseModel().scaled(a), 8000, seed=1) for a in (0.5, 1, 2, 4, 8)]
    assert all(a > b for a, b in zip(lsr, lsr[1:]))


def test_tune_alpha_hits_target():
    p = naive_baseline(random_circuit(4, 6, seed=5)).physical
    alpha = tune_alpha(p, shots=4000, seed=0)
    assert estimate_lsr(p, NoiseModel().scaled(alpha), 20000, seed=7) == pytest.approx(0.2, abs=0.03)


def test_clifford_proxy_keeps_costs():
    c = LogicalCircuit(2, (Gate(GateKind.RZ, (0,), 0.3), Gate(GateKind.CX, (0, 1))))
    p = compile_circuit(c).physical
    assert needs_proxy(p)
    q = clifford_proxy(p)
    assert not needs_proxy(q)
    assert [o.name for o in q.ops] == [o.name for o in p.ops]
    assert q.source.gates[0].kind is GateKind.S


def test_simulate_report():
    p = _bell_physical()
    r = simulate(p, QUIET, shots=3000, seed=0)
    assert r.lsr == 1.0 and r.kept == 3000
    assert r.tvd < 0.05
    r2 = simulate(p, QUIET, shots=3000, seed=0)
    assert r.to_json(sort_keys=True) == r2.to_json(sort_keys=True)
    assert set(r.to_dict()) >= {"shots", "kept", "lsr", "distribution", "tvd", "noise", "resources", "seed"}


def test_noise_lowers_lsr():
    p = _bell_physical()
    clean = simulate(p, QUIET, shots=5000, seed=0)
    noisy = simulate(p, NoiseModel(alpha=20), shots=5000, seed=0)
    assert noisy.lsr < clean.lsr
