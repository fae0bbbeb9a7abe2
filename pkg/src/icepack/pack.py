"""Pair scoring, greedy packing into patches, and grid placement."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .code import template
from .ir import GateKind, LogicalCircuit, Variant
from .merge import CircuitIndex, pair_savings
from .sim.noise import NoiseModel

PAIR_KINDS = (GateKind.CX, GateKind.CZ, GateKind.XCX)


class InvalidTarget(ValueError):
    pass


@dataclass(frozen=True)
class BiasWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.2
    delta: float = -0.1


@lru_cache(maxsize=None)
def _penalty(kind: GateKind, noise: NoiseModel) -> float:
    intra = template(kind, Variant.INTRA, (0, 1)).cost
    trans = template(kind, Variant.TRANSVERSAL, (0, 0)).cost
    w = noise.weights()
    return (w["w_depth"] * (intra.depth - trans.depth)
            + w["w_2q"] * (intra.n2q - trans.n2q)
            + w["w_1q"] * (intra.n1q - trans.n1q))


def penalty(kind: GateKind, noise: NoiseModel | None = None) -> float:
    """Preference of a two-qubit gate kind for separation (positive) or pairing."""
    return _penalty(GateKind(kind), noise or NoiseModel())


@lru_cache(maxsize=None)
def solo_h_savings() -> tuple[int, int]:
    h = template(GateKind.H, Variant.TARGETED, (0,)).cost
    hh = template(GateKind.HH, Variant.PATCHWISE).cost
    return (h.n1q - hh.n1q, h.n2q - hh.n2q)


def _pen_sums(c: LogicalCircuit, noise: NoiseModel):
    n = c.num_qubits
    per_q = np.zeros(n)
    both = np.zeros((n, n))
    for g in c.gates:
        if g.kind in PAIR_KINDS and g.variant is None:
            pen = penalty(g.kind, noise)
            a, b = g.qubits
            per_q[a] += pen
            per_q[b] += pen
            both[a, b] += pen
            both[b, a] += pen
    return per_q, both


def solo_score(c: LogicalCircuit, q: int, noise: NoiseModel | None = None,
               bias: BiasWeights | None = None) -> float:
    noise = noise or NoiseModel()
    bias = bias or BiasWeights()
    s1, s2 = solo_h_savings()
    nh = sum(1 for g in c.gates if g.kind is GateKind.H and g.qubits[0] == q)
    pen = sum(penalty(g.kind, noise) for g in c.gates
              if g.kind in PAIR_KINDS and g.variant is None and q in g.qubits)
    return nh * (bias.alpha * s1 + bias.beta * s2) + pen


@dataclass
class ScoreMatrix:
    s1: np.ndarray
    s2: np.ndarray
    delay: np.ndarray
    T: np.ndarray
    w: np.ndarray
    slot_of_row: np.ndarray
    bias: BiasWeights = field(default_factory=BiasWeights)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def net_gain(self, i: int, j: int) -> float:
        return self.w[i, j] - self.w[i, i] - self.w[j, j]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["i", "j", "w", "s1", "s2", "delay", "T"])
        for i in range(self.n):
            for j in range(self.n):
                wr.writerow([i, j, f"{self.w[i, j]:.6g}", int(self.s1[i, j]), int(self.s2[i, j]),
                             int(self.delay[i, j]), f"{self.T[i, j]:.6g}"])
        return buf.getvalue()


def pair_cell(c: LogicalCircuit, i: int, j: int, noise: NoiseModel | None = None,
              bias: BiasWeights | None = None, index: CircuitIndex | None = None):
    """One off-diagonal score cell computed in isolation."""
    noise = noise or NoiseModel()
    bias = bias or BiasWeights()
    ps = pair_savings(c, i, j, index=index)
    t = sum(penalty(g.kind, noise) for g in c.gates
            if g.kind in PAIR_KINDS and g.variant is None and (i in g.qubits or j in g.qubits))
    w = bias.alpha * ps.s1 + bias.beta * ps.s2 - bias.gamma * ps.delay + bias.delta * t
    return w, ps, t


def score_matrix(c: LogicalCircuit, noise: NoiseModel | None = None,
                 bias: BiasWeights | None = None) -> ScoreMatrix:
    noise = noise or NoiseModel()
    bias = bias or BiasWeights()
    n = c.num_qubits
    ix = CircuitIndex(c)
    s1 = np.zeros((n, n), dtype=np.int64)
    s2 = np.zeros((n, n), dtype=np.int64)
    dl = np.zeros((n, n), dtype=np.int64)
    slot = np.zeros((n, n), dtype=np.int64)
    per_q, both = _pen_sums(c, noise)
    T = per_q[:, None] + per_q[None, :] - both
    np.fill_diagonal(T, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            ps = pair_savings(c, i, j, index=ix)
            s1[i, j] = s1[j, i] = ps.s1
            s2[i, j] = s2[j, i] = ps.s2
            dl[i, j] = dl[j, i] = ps.delay
            slot[i, j] = ps.slot_of_i
            slot[j, i] = 1 - ps.slot_of_i
    w = bias.alpha * s1 + bias.beta * s2 - bias.gamma * dl + bias.delta * T
    sh1, sh2 = solo_h_savings()
    nh = np.zeros(n)
    for g in c.gates:
        if g.kind is GateKind.H:
            nh[g.qubits[0]] += 1
    np.fill_diagonal(w, nh * (bias.alpha * sh1 + bias.beta * sh2) + per_q)
    return ScoreMatrix(s1, s2, dl, T, w.astype(float), slot, bias)


# --- packing -----------------------------------------------------------------------

@dataclass
class Packing:
    """Patches as (slot 0, slot 1) program qubits; ``None`` marks a gauge slot."""

    patches: list[tuple[int | None, int | None]]
    grid: list[tuple[int, int]] | None = None
    history: list[dict] = field(default_factory=list)

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    @property
    def num_qubits(self) -> int:
        return sum(q is not None for p in self.patches for q in p)

    @property
    def density(self) -> float:
        """Program qubits per available logical slot, in (0.5, 1]."""
        return self.num_qubits / (2 * self.n_patches)

    @property
    def qubits_per_patch(self) -> float:
        return self.num_qubits / self.n_patches

    def location(self) -> dict[int, tuple[int, int]]:
        return {q: (p, s) for p, pair in enumerate(self.patches) for s, q in enumerate(pair)
                if q is not None}

    def coords(self, patch: int) -> tuple[int, int]:
        if self.grid is None:
            side = math.ceil(math.sqrt(self.n_patches))
            return divmod(patch, side)
        return self.grid[patch]

    def distance(self, a: int, b: int) -> int:
        (r1, c1), (r2, c2) = self.coords(a), self.coords(b)
        return abs(r1 - r2) + abs(c1 - c2)

    def to_dict(self) -> dict:
        return {"patches": [list(p) for p in self.patches],
                "grid": [list(g) for g in self.grid] if self.grid else None}


def check_target(n: int, N: int):
    if not math.ceil(n / 2) <= N <= max(n, 1):
        raise InvalidTarget(f"patch count {N} outside [{math.ceil(n / 2)}, {n}]")


def patches_for_density(n: int, qubits_per_patch: float) -> int:
    """Patch count for a density in the qubits-per-patch convention (1.0 to 2.0)."""
    if not 1.0 <= qubits_per_patch <= 2.0:
        raise InvalidTarget("density must lie in [1.0, 2.0] qubits per patch")
    return min(n, max(math.ceil(n / 2), math.ceil(n / qubits_per_patch - 1e-9)))


def packing_score(scores: ScoreMatrix, pairs, solos) -> float:
    """Total packing score: committed pairs plus remaining solos."""
    return float(sum(scores.w[i, j] for i, j in pairs) + sum(scores.w[q, q] for q in solos))


def greedy_pack(scores: ScoreMatrix, N: int) -> Packing:
    n = scores.n
    check_target(n, N)
    w = scores.w
    diag = np.diag(w).copy()
    gain = w - diag[:, None] - diag[None, :]
    avail = np.triu(np.ones((n, n), dtype=bool), k=1)
    solos = set(range(n))
    pairs: list[tuple[int, int]] = []
    total = float(diag.sum())
    history = []
    for _ in range(n - N):
        masked = np.where(avail, gain, -np.inf)
        k = int(np.argmax(masked))  # first maximum = lowest (i, j)
        i, j = divmod(k, n)
        g = float(gain[i, j])
        total += g
        pairs.append((i, j))
        solos -= {i, j}
        for q in (i, j):
            avail[q, :] = False
            avail[:, q] = False
        history.append({"pair": (i, j), "net_gain": g, "score": total})
    patches = []
    for i, j in pairs:
        patches.append((i, j) if scores.slot_of_row[i, j] == 0 else (j, i))
    patches.extend((q, None) for q in sorted(solos))
    return Packing(patches, None, history)


def _matchings(free: list[int], k: int):
    if k == 0:
        yield []
        return
    if len(free) < 2 * k:
        return
    first, rest = free[0], free[1:]
    yield from _matchings(rest, k)
    for n, other in enumerate(rest):
        for m in _matchings(rest[:n] + rest[n + 1:], k - 1):
            yield [(first, other)] + m


def exhaustive_pack(scores: ScoreMatrix, N: int) -> tuple[float, list[tuple[int, int]]]:
    """Best total packing score over every choice of n - N disjoint pairs."""
    n = scores.n
    check_target(n, N)
    best: tuple[float, list] = (-math.inf, [])
    for pairs in _matchings(list(range(n)), n - N):
        used = {q for p in pairs for q in p}
        s = packing_score(scores, pairs, [q for q in range(n) if q not in used])
        if s > best[0]:
            best = (s, pairs)
    return best


def naive_packing(n: int, N: int | None = None, order=None) -> Packing:
    """Sequential packing in the given qubit order (program order by default)."""
    N = math.ceil(n / 2) if N is None else N
    check_target(n, N)
    order = list(range(n)) if order is None else list(order)
    npairs = n - N
    patches = [(order[2 * k], order[2 * k + 1]) for k in range(npairs)]
    patches += [(q, None) for q in order[2 * npairs:]]
    return Packing(patches)


def random_packing(n: int, N: int, rng) -> Packing:
    return naive_packing(n, N, rng.permutation(n))


# --- grid ----------------------------------------------------------------------------

def interaction_weights(packing: Packing, c: LogicalCircuit) -> np.ndarray:
    """Physical two-qubit gate counts between patches, following SWAP relabels."""
    P = packing.n_patches
    where = {q: p for q, (p, _) in packing.location().items()}
    W = np.zeros((P, P))
    for g in c.gates:
        for part in g.parts():
            if part.kind is GateKind.SWAP:
                a, b = part.qubits
                where[a], where[b] = where[b], where[a]
                continue
            if len(part.qubits) != 2:
                continue
            pa, pb = where[part.qubits[0]], where[part.qubits[1]]
            if pa != pb:
                cost = template(part.kind, Variant.INTER, (0, 0)).cost.n2q
                W[pa, pb] += cost
                W[pb, pa] += cost
    return W


def linear_order(W: np.ndarray) -> list[int]:
    P = W.shape[0]
    if P == 0:
        return []
    totals = W.sum(axis=1)
    start = int(np.argmax(totals))
    order = [start]
    placed = np.zeros(P, dtype=bool)
    placed[start] = True
    link = W[start].copy()
    for _ in range(P - 1):
        cand = np.where(placed, -np.inf, link)
        nxt = int(np.argmax(cand))
        order.append(nxt)
        placed[nxt] = True
        link += W[nxt]
    return order


def grid_align(packing: Packing, c: LogicalCircuit) -> Packing:
    """Place patches row-major on a square grid in greedy interaction order."""
    P = packing.n_patches
    order = linear_order(interaction_weights(packing, c))
    side = max(1, math.ceil(math.sqrt(P)))
    grid: list[tuple[int, int]] = [(0, 0)] * P
    for rank, p in enumerate(order):
        grid[p] = divmod(rank, side)
    return Packing(list(packing.patches), grid, list(packing.history))


def default_grid(packing: Packing) -> Packing:
    """Row-major placement in patch order, without interaction ordering."""
    side = max(1, math.ceil(math.sqrt(packing.n_patches)))
    grid = [divmod(p, side) for p in range(packing.n_patches)]
    return Packing(list(packing.patches), grid, list(packing.history))
