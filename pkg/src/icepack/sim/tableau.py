"""Aaronson-Gottesman stabilizer tableau (CHP) for reference samples."""

from __future__ import annotations

import math

import numpy as np


class NonCliffordGate(ValueError):
    pass


def quarter_turns(angle: float, name: str) -> int:
    """Rotation angle as a multiple of pi/2, or NonCliffordGate."""
    k = angle / (math.pi / 2)
    r = round(k)
    if abs(k - r) > 1e-9:
        raise NonCliffordGate(f"{name}({angle}) is not Clifford")
    return r % 4


# Every 1q Clifford used by the compiler, as a word over H and S
# (applied left to right), up to global phase.
_WORDS = {
    "I": "", "H": "H", "S": "S", "SDG": "SSS", "X": "HSSH", "Z": "SS",
    "Y": "SSHSSH", "SX": "HSH", "SXDG": "HSSSH", "SY": "SSH", "SYDG": "HSS",
}


def clifford_word(name: str, angle: float | None = None) -> str:
    if name == "RZ":
        return "S" * quarter_turns(angle, name)
    if name == "RX":
        return "H" + "S" * quarter_turns(angle, name) + "H"
    return _WORDS[name]


class Tableau:
    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n + 1, n), dtype=bool)
        self.z = np.zeros((2 * n + 1, n), dtype=bool)
        self.r = np.zeros(2 * n + 1, dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True

    # gates ------------------------------------------------------------------
    def h(self, a):
        x, z = self.x, self.z
        self.r ^= x[:, a] & z[:, a]
        x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()

    def s(self, a):
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def pauli(self, name, a):
        if name in ("X", "Y"):
            self.r ^= self.z[:, a]
        if name in ("Z", "Y"):
            self.r ^= self.x[:, a]

    def cx(self, a, b):
        x, z = self.x, self.z
        self.r ^= x[:, a] & z[:, b] & ~(x[:, b] ^ z[:, a])
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]

    def cz(self, a, b):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def apply(self, name: str, qubits, angle=None):
        if name == "CX":
            self.cx(*qubits)
        elif name == "CZ":
            self.cz(*qubits)
        elif name in ("X", "Y", "Z"):
            self.pauli(name, qubits[0])
        else:
            for ch in clifford_word(name, angle):
                (self.h if ch == "H" else self.s)(qubits[0])

    # measurement ---------------------------------------------------------
    @staticmethod
    def _g(x1, z1, x2, z2):
        x1 = x1.astype(np.int8)
        z1 = z1.astype(np.int8)
        x2 = x2.astype(np.int8)
        z2 = z2.astype(np.int8)
        return np.where(x1 & z1, z2 - x2,
                        np.where(x1 & ~z1 & 1, z2 * (2 * x2 - 1),
                                 np.where(~x1 & z1 & 1, x2 * (1 - 2 * z2), 0)))

    def _rowsum(self, h, i):
        tot = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(
            self._g(self.x[i], self.z[i], self.x[h], self.z[h]).sum())
        self.r[h] = (tot % 4) == 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _rowsum_many(self, hs, i):
        if len(hs) == 0:
            return
        g = self._g(self.x[i][None, :], self.z[i][None, :], self.x[hs], self.z[hs]).sum(axis=1)
        tot = 2 * self.r[hs].astype(np.int64) + 2 * int(self.r[i]) + g
        self.r[hs] = (tot % 4) == 2
        self.x[hs] ^= self.x[i]
        self.z[hs] ^= self.z[i]

    def measure(self, a: int, random_outcome: int = 0) -> tuple[int, bool]:
        """Measure qubit a in Z.  Returns (outcome, was_random)."""
        n = self.n
        stab_x = self.x[n:2 * n, a]
        hits = np.nonzero(stab_x)[0]
        if len(hits):
            p = n + int(hits[0])
            rows = np.nonzero(self.x[:2 * n, a])[0]
            rows = rows[rows != p]
            self._rowsum_many(rows, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, a] = True
            self.r[p] = bool(random_outcome)
            return int(random_outcome), True
        scratch = 2 * n
        self.x[scratch] = False
        self.z[scratch] = False
        self.r[scratch] = False
        for i in np.nonzero(self.x[:n, a])[0]:
            self._rowsum(scratch, int(i) + n)
        return int(self.r[scratch]), False

    def reset(self, a: int):
        m, _ = self.measure(a)
        if m:
            self.pauli("X", a)


def reference_sample(ops, n: int) -> np.ndarray:
    """Noiseless measurement record, choosing 0 for every random outcome."""
    t = Tableau(n)
    rec = []
    for o in ops:
        if o.name == "M":
            rec.append(t.measure(o.qubits[0])[0])
        elif o.name == "R":
            t.reset(o.qubits[0])
        else:
            t.apply(o.name, o.qubits, o.angle)
    return np.array(rec, dtype=np.uint8)
