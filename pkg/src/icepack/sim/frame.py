"""Vectorized Pauli-frame sampling of noisy Clifford circuits."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .noise import Instruction, NoisyCircuit
from .tableau import NonCliffordGate, clifford_word, reference_sample

CHUNK = 1 << 14
WORKERS_ENV = "ICEPACK_WORKERS"


@dataclass
class ShotBatch:
    """Decoded shots.  Arrays are indexed [shot, patch, ...] / [shot, qubit]."""

    data: np.ndarray        # (shots, P, 4) data-qubit outcomes
    syndromes: np.ndarray   # (shots, P, 2) X- and Z-syndrome outcomes
    logical: np.ndarray     # (shots, n) decoded program-qubit bits
    accept: np.ndarray      # (shots,) bool

    @property
    def shots(self) -> int:
        return int(self.accept.shape[0])

    def patch_accept(self) -> np.ndarray:
        even = self.data.sum(axis=2) % 2 == 0
        quiet = ~self.syndromes.any(axis=2)
        return even & quiet


def _bernoulli_positions(rng, p: float, size: int) -> np.ndarray:
    """Indices in [0, size) of independent success events with rate p."""
    if p <= 0 or size == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1:
        return np.arange(size)
    if p > 0.2:
        return np.nonzero(rng.random(size) < p)[0]
    out = []
    start = -1
    while True:
        k = int(p * (size - start) + 6 * np.sqrt(p * size) + 16)
        pos = start + np.cumsum(rng.geometric(p, k))
        out.append(pos[pos < size])
        if pos[-1] >= size:
            break
        start = int(pos[-1])
    return np.concatenate(out)


class FrameSimulator:
    def __init__(self, n: int, shots: int, rng):
        self.n = n
        self.shots = shots
        self.rng = rng
        self.x = np.zeros((n, shots), dtype=np.uint8)
        self.z = rng.integers(0, 2, size=(n, shots), dtype=np.uint8)

    def _flip(self, targets, hits, xbits, zbits):
        rows = np.asarray(targets)[hits // self.shots]
        cols = hits % self.shots
        if xbits is not None:
            self.x[rows, cols] ^= xbits
        if zbits is not None:
            self.z[rows, cols] ^= zbits

    def gate(self, name, qs, angle=None):
        x, z = self.x, self.z
        if name == "CX":
            a, b = qs
            x[b] ^= x[a]
            z[a] ^= z[b]
        elif name == "CZ":
            a, b = qs
            z[a] ^= x[b]
            z[b] ^= x[a]
        elif name in ("X", "Y", "Z", "I"):
            pass
        else:
            q = qs[0]
            for ch in clifford_word(name, angle):
                if ch == "H":
                    x[q], z[q] = z[q].copy(), x[q].copy()
                else:
                    z[q] ^= x[q]

    def reset(self, q):
        self.x[q] = 0
        self.z[q] = self.rng.integers(0, 2, size=self.shots, dtype=np.uint8)

    def depolarize1(self, targets, p):
        hits = _bernoulli_positions(self.rng, p, len(targets) * self.shots)
        if len(hits):
            r = self.rng.integers(1, 4, size=len(hits))
            self._flip(targets, hits, ((r == 1) | (r == 2)).astype(np.uint8),
                       ((r == 2) | (r == 3)).astype(np.uint8))

    def depolarize2(self, targets, p):
        a = np.asarray(targets[0::2])
        b = np.asarray(targets[1::2])
        hits = _bernoulli_positions(self.rng, p, len(a) * self.shots)
        if len(hits):
            r = self.rng.integers(1, 16, size=len(hits))
            pa, pb = r >> 2, r & 3
            for qs, code in ((a, pa), (b, pb)):
                self._flip(qs, hits, ((code == 1) | (code == 2)).astype(np.uint8),
                           ((code == 2) | (code == 3)).astype(np.uint8))

    def pauli_channel1(self, targets, px, py, pz):
        tot = px + py + pz
        hits = _bernoulli_positions(self.rng, tot, len(targets) * self.shots)
        if len(hits):
            u = self.rng.random(len(hits)) * tot
            code = np.where(u < px, 1, np.where(u < px + py, 2, 3))
            self._flip(targets, hits, ((code == 1) | (code == 2)).astype(np.uint8),
                       ((code == 2) | (code == 3)).astype(np.uint8))

    def x_error(self, targets, p):
        hits = _bernoulli_positions(self.rng, p, len(targets) * self.shots)
        if len(hits):
            self._flip(targets, hits, np.uint8(1), None)


def _check_clifford(ins: list[Instruction]):
    for i in ins:
        if i.name in ("RX", "RZ"):
            clifford_word(i.name, i.args[0])


def _run_chunk(circuit: NoisyCircuit, ref: np.ndarray, shots: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    sim = FrameSimulator(circuit.num_qubits, shots, rng)
    rec = np.empty((len(ref), shots), dtype=np.uint8)
    k = 0
    for ins in circuit.instructions:
        name, t = ins.name, ins.targets
        if name == "M":
            q = t[0]
            rec[k] = sim.x[q] ^ ref[k]
            k += 1
            sim.z[q] = rng.integers(0, 2, size=shots, dtype=np.uint8)
        elif name == "R":
            sim.reset(t[0])
        elif name == "DEPOLARIZE1":
            sim.depolarize1(t, ins.args[0])
        elif name == "DEPOLARIZE2":
            sim.depolarize2(t, ins.args[0])
        elif name == "PAULI_CHANNEL_1":
            sim.pauli_channel1(t, *ins.args)
        elif name == "X_ERROR":
            sim.x_error(t, ins.args[0])
        else:
            sim.gate(name, t, ins.args[0] if ins.args else None)
    return rec.T


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def measurement_record(circuit: NoisyCircuit, shots: int, seed: int = 0) -> tuple[np.ndarray, list[int]]:
    """Raw outcomes (shots x measurements) and the measured qubit order."""
    _check_clifford(circuit.instructions)

    class _Op:
        __slots__ = ("name", "qubits", "angle")

        def __init__(self, i: Instruction):
            self.name, self.qubits = i.name, i.targets
            self.angle = i.args[0] if i.args else None

    ops = [_Op(i) for i in circuit.instructions if not i.is_channel]
    ref = reference_sample(ops, circuit.num_qubits)
    order = [i.targets[0] for i in circuit.instructions if i.name == "M"]
    # chunking is independent of the worker count, so results are too
    sizes = [min(CHUNK, shots - s) for s in range(0, shots, CHUNK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = min(_workers(), len(sizes))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_run_chunk, [circuit] * len(sizes), [ref] * len(sizes), sizes, seeds))
    else:
        parts = [_run_chunk(circuit, ref, s, sd) for s, sd in zip(sizes, seeds)]
    rec = np.concatenate(parts, axis=0) if parts else np.zeros((0, len(ref)), dtype=np.uint8)
    return rec, order


def sample(circuit: NoisyCircuit, shots: int, seed: int = 0) -> ShotBatch:
    rec, order = measurement_record(circuit, shots, seed)
    col = {q: k for k, q in enumerate(order)}
    P = len(circuit.plans)
    data = np.zeros((shots, P, 4), dtype=np.uint8)
    syn = np.zeros((shots, P, 2), dtype=np.uint8)
    for p, plan in enumerate(circuit.plans):
        data[:, p, :] = rec[:, [col[q] for q in plan[:4]]]
        syn[:, p, :] = rec[:, [col[q] for q in plan[4:6]]]
    logical = np.zeros((shots, len(circuit.readout)), dtype=np.uint8)
    for q, (p, s) in enumerate(circuit.readout):
        logical[:, q] = data[:, p, 0] ^ data[:, p, 2 if s == 0 else 1]
    even = data.sum(axis=2) % 2 == 0
    quiet = ~syn.any(axis=2)
    accept = np.all(even & quiet, axis=1) if P else np.ones(shots, dtype=bool)
    return ShotBatch(data, syn, logical, accept)


__all__ = ["ShotBatch", "sample", "measurement_record", "NonCliffordGate", "FrameSimulator"]
