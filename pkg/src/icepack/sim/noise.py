"""Noise model and the noisy-circuit interchange format."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace


class ProbabilityOverflow(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Gate, measurement, idle and movement noise.  Times: T in µs, t in ns."""

    p1: float = 1e-3
    p2: float = 5e-3
    pm: float = 2e-2
    T1: float = 100.0
    T2: float = 80.0
    t_1q: float = 50.0
    t_2q: float = 300.0
    alpha: float = 1.0
    c_move: float | None = None

    def __post_init__(self):
        if self.c_move is None:
            object.__setattr__(self, "c_move", self.p2 / 2)
        for name in ("p1", "p2", "pm", "c_move"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} is not a probability")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.T1 <= 0 or self.T2 <= 0:
            raise ValueError("coherence times must be positive")
        if self.T2 > 2 * self.T1:
            raise ValueError("T2 cannot exceed 2*T1")
        if self.t_1q < 0 or self.t_2q < 0:
            raise ValueError("gate durations must be non-negative")

    def scaled(self, alpha: float) -> "NoiseModel":
        return replace(self, alpha=alpha)

    def to_dict(self) -> dict:
        return asdict(self)

    # scaled probabilities ------------------------------------------------
    def _check(self, p: float, what: str) -> float:
        if p > 1 + 1e-12:
            raise ProbabilityOverflow(f"{what} probability {p} exceeds 1")
        return min(p, 1.0)

    def gate1(self) -> float:
        return self._check(self.alpha * self.p1, "1q gate")

    def gate2(self) -> float:
        return self._check(self.alpha * self.p2, "2q gate")

    def measure(self) -> float:
        return self._check(self.alpha * self.pm, "measurement")

    def movement(self, distance: float) -> float:
        return self._check(self.alpha * self.c_move * distance, "movement")

    def idle(self, t_ns: float) -> tuple[float, float, float]:
        """Twirled amplitude damping plus dephasing for an idle period (ns)."""
        t = t_ns / 1000.0
        px = py = (1 - math.exp(-t / self.T1)) / 4
        pz = (1 - math.exp(-t / self.T2)) / 2 - py
        out = tuple(self.alpha * p for p in (px, py, max(pz, 0.0)))
        self._check(sum(out), "idle")
        return out

    def weights(self) -> dict[str, float]:
        """Cost weights for packing: 2q-gate error is the unit."""
        return {
            "w_2q": 1.0,
            "w_1q": self.p1 / self.p2,
            "w_depth": (self.t_2q / 1000.0 / self.T2) / self.p2,
        }


# --- noisy circuit description --------------------------------------------------

CHANNELS = ("DEPOLARIZE1", "DEPOLARIZE2", "PAULI_CHANNEL_1", "X_ERROR")


@dataclass(frozen=True)
class Instruction:
    """A gate, reset (R), measurement (M) or noise channel with arguments."""

    name: str
    targets: tuple[int, ...]
    args: tuple[float, ...] = ()

    @property
    def is_channel(self) -> bool:
        return self.name in CHANNELS

    def to_line(self) -> str:
        head = self.name
        if self.args:
            head += "(" + ",".join(repr(float(a)) for a in self.args) + ")"
        return " ".join([head, *map(str, self.targets)])

    @classmethod
    def from_line(cls, line: str) -> "Instruction":
        head, *rest = line.split()
        args: tuple[float, ...] = ()
        if "(" in head:
            head, a = head.split("(", 1)
            args = tuple(float(v) for v in a.rstrip(")").split(","))
        return cls(head, tuple(int(t) for t in rest), args)


@dataclass
class NoisyCircuit:
    """Physical instructions with noise, plus what is needed to decode shots.

    ``plans`` lists, per patch, the measured qubits (d0..d3, ax, az);
    ``readout`` maps each program qubit to its final (patch, slot).
    """

    num_qubits: int
    instructions: list[Instruction]
    plans: list[tuple[int, ...]]
    readout: list[tuple[int, int]]

    def n_channels(self) -> int:
        return sum(i.is_channel for i in self.instructions)

    def to_text(self) -> str:
        lines = [f"#qubits {self.num_qubits}"]
        lines += ["#plan " + " ".join(map(str, p)) for p in self.plans]
        lines += ["#readout " + " ".join(f"{p}:{s}" for p, s in self.readout)]
        lines += [i.to_line() for i in self.instructions]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NoisyCircuit":
        n, plans, readout, ins = 0, [], [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#qubits"):
                n = int(line.split()[1])
            elif line.startswith("#plan"):
                plans.append(tuple(int(v) for v in line.split()[1:]))
            elif line.startswith("#readout"):
                readout = [tuple(int(x) for x in v.split(":")) for v in line.split()[1:]]
            elif not line.startswith("#"):
                ins.append(Instruction.from_line(line))
        return cls(n, ins, plans, readout)


def _schedule(ops):
    """ASAP moment of every op (gates, resets and measurements alike)."""
    last: dict[int, int] = {}
    out = []
    for o in ops:
        t = max((last.get(q, -1) for q in o.qubits), default=-1) + 1
        for q in o.qubits:
            last[q] = t
        out.append(t)
    return out


def apply_noise_channels(p, nm: NoiseModel) -> NoisyCircuit:
    """Insert gate, movement, idle and measurement noise moment by moment."""
    from ..code import ONE_Q, TWO_Q

    ops = p.ops
    mom = _schedule(ops)
    depth = max(mom) + 1 if mom else 0
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for o, t in zip(ops, mom):
        for q in o.qubits:
            first.setdefault(q, t)
            last[q] = t
    by_moment: list[list[int]] = [[] for _ in range(depth)]
    for i, t in enumerate(mom):
        by_moment[t].append(i)

    p1, p2, pm = nm.gate1(), nm.gate2(), nm.measure()
    out: list[Instruction] = []
    for t, idxs in enumerate(by_moment):
        one, two, moved, meas = [], [], {}, []
        has2q = False
        active = set()
        for i in idxs:
            o = ops[i]
            active.update(o.qubits)
            if o.name == "M":
                if pm > 0:
                    meas.append(o.qubits[0])
                continue
            if o.name in TWO_Q:
                has2q = True
                two.extend(o.qubits)
                d = p.distance[i] if p.distance else 0
                if d:
                    moved.setdefault(d, []).extend(o.qubits)
            elif o.name in ONE_Q:
                one.extend(o.qubits)
        if meas:
            out.append(Instruction("X_ERROR", tuple(meas), (pm,)))
        for i in idxs:
            o = ops[i]
            out.append(Instruction(o.name, o.qubits, () if o.angle is None else (o.angle,)))
        if one and p1 > 0:
            out.append(Instruction("DEPOLARIZE1", tuple(one), (p1,)))
        if two and p2 > 0:
            out.append(Instruction("DEPOLARIZE2", tuple(two), (p2,)))
        for d in sorted(moved):
            pmv = nm.movement(d)
            if pmv > 0:
                out.append(Instruction("DEPOLARIZE2", tuple(moved[d]), (pmv,)))
        dur = nm.t_2q if has2q else nm.t_1q
        idle = tuple(q for q in sorted(first) if first[q] < t < last[q] and q not in active)
        px, py, pz = nm.idle(dur)
        if idle and px + py + pz > 0:
            out.append(Instruction("PAULI_CHANNEL_1", idle, (px, py, pz)))
    return NoisyCircuit(p.num_qubits, out, [tuple(pl.qubits) for pl in p.plans],
                        [tuple(r) for r in p.readout])


def randomize_measurements(nc: NoisyCircuit) -> NoisyCircuit:
    """Fully depolarize every qubit right before it is measured.

    DEPOLARIZE1(3/4) is the completely depolarizing channel, so every
    measured bit becomes uniform and independent of the circuit.
    """
    out: list[Instruction] = []
    for ins in nc.instructions:
        if ins.name == "M":
            out.append(Instruction("DEPOLARIZE1", ins.targets, (0.75,)))
        out.append(ins)
    return NoisyCircuit(nc.num_qubits, out, list(nc.plans), list(nc.readout))
