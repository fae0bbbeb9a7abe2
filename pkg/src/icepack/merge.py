"""Merge candidate search, conflict resolution and the merge rewrite."""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .code import REFERENCE_COSTS
from .ir import MACRO_OF, Gate, GateKind, LogicalCircuit, Variant, gate_moments

ONE_Q_MERGEABLE = (GateKind.H, GateKind.X, GateKind.Z)
TWO_Q_MERGEABLE = (GateKind.CX, GateKind.CZ, GateKind.XCX)


class InvalidPacking(ValueError):
    pass


@lru_cache(maxsize=None)
def merge_savings(kind: GateKind) -> tuple[int, int]:
    """(1q, 2q) physical gates saved by merging two gates of ``kind``."""
    from .code import template

    if kind in ONE_Q_MERGEABLE:
        single = REFERENCE_COSTS[(kind, Variant.TARGETED)]
        merged = template(MACRO_OF[kind], Variant.PATCHWISE).cost
    else:
        single = template(kind, Variant.INTER, (0, 0)).cost
        merged = template(kind, Variant.TRANSVERSAL, (0, 0)).cost
    return (2 * single.n1q - merged.n1q, 2 * single.n2q - merged.n2q)


@dataclass(frozen=True, order=True)
class MergeCandidate:
    gate_a: int
    gate_b: int
    kind: GateKind = field(compare=False)
    savings_1q: int = field(compare=False)
    savings_2q: int = field(compare=False)
    delay: int = field(compare=False)

    @property
    def savings(self) -> int:
        return self.savings_1q + self.savings_2q


@dataclass
class ConflictCluster:
    candidates: list[MergeCandidate]
    conflicts: set[tuple[int, int]] = field(default_factory=set)  # index pairs into candidates

    def degree(self) -> list[int]:
        deg = [0] * len(self.candidates)
        for a, b in self.conflicts:
            deg[a] += 1
            deg[b] += 1
        return deg


@dataclass
class MergeSet:
    selected: list[MergeCandidate] = field(default_factory=list)

    @property
    def totals(self) -> tuple[int, int, int]:
        return (sum(c.savings_1q for c in self.selected),
                sum(c.savings_2q for c in self.selected),
                sum(c.delay for c in self.selected))


class CircuitIndex:
    """Per-qubit timelines and dependency reachability for one circuit.

    ``desc_min[g, q]`` is the earliest timeline position on ``q`` occupied by
    ``g`` or one of its descendants (``len(timeline)`` if none);
    ``anc_max[g, q]`` is the latest position occupied by ``g`` or an ancestor
    (-1 if none).  Two gates on different qubits are independent when neither
    bound places one on the other's side.
    """

    def __init__(self, c: LogicalCircuit):
        self.circuit = c
        self.gates = c.gates
        n = c.num_qubits
        self.timeline: list[list[int]] = [[] for _ in range(n)]
        self.pos: list[dict[int, int]] = [dict() for _ in self.gates]
        for gi, g in enumerate(self.gates):
            for q in g.qubits:
                self.pos[gi][q] = len(self.timeline[q])
                self.timeline[q].append(gi)
        self.moment = gate_moments(self.gates)
        # positions of each kind of gate per qubit, for range queries
        self.by_kind: dict[tuple[int, GateKind], list[int]] = {}
        for q, tl in enumerate(self.timeline):
            for p, gi in enumerate(tl):
                self.by_kind.setdefault((q, self.gates[gi].kind), []).append(p)

    @cached_property
    def desc_min(self) -> np.ndarray:
        n, m = self.circuit.num_qubits, len(self.gates)
        lens = np.array([len(t) for t in self.timeline], dtype=np.int64)
        out = np.empty((m, n), dtype=np.int64)
        for gi in range(m - 1, -1, -1):
            row = lens.copy()
            for q, p in self.pos[gi].items():
                tl = self.timeline[q]
                if p + 1 < len(tl):
                    np.minimum(row, out[tl[p + 1]], out=row)
            for q, p in self.pos[gi].items():
                row[q] = p
            out[gi] = row
        return out

    @cached_property
    def anc_max(self) -> np.ndarray:
        n, m = self.circuit.num_qubits, len(self.gates)
        out = np.empty((m, n), dtype=np.int64)
        for gi in range(m):
            row = np.full(n, -1, dtype=np.int64)
            for q, p in self.pos[gi].items():
                if p > 0:
                    np.maximum(row, out[self.timeline[q][p - 1]], out=row)
            for q, p in self.pos[gi].items():
                row[q] = p
            out[gi] = row
        return out

    def independent(self, a: int, b: int) -> bool:
        """Neither gate lies in the other's causal future."""
        if a == b:
            return False
        for q, p in self.pos[b].items():
            if self.anc_max[a, q] >= p or self.desc_min[a, q] <= p:
                return False
        return True

    def window(self, a: int, q: int) -> tuple[int, int]:
        """Open interval of positions on ``q`` causally unrelated to gate ``a``."""
        return int(self.anc_max[a, q]), int(self.desc_min[a, q])


def _role(g: Gate, q: int) -> int:
    return g.qubits.index(q) if g.kind is GateKind.CX else 0


def _other(g: Gate, q: int) -> int:
    a, b = g.qubits
    return b if q == a else a


def find_candidates(c: LogicalCircuit, i: int, j: int, idx=None, *,
                    index: CircuitIndex | None = None, patch_of=None,
                    two_qubit: bool = True, one_qubit: bool = True) -> list[MergeCandidate]:
    """All mergeable gate pairs (a on qubit i, b on qubit j).

    ``idx`` maps program qubits to their slot within a patch; partner qubits
    of a two-qubit merge must sit in different slots when both are known.
    ``patch_of`` additionally requires both partners to share a patch.
    """
    if i == j:
        raise ValueError("i and j must differ")
    ix = index or CircuitIndex(c)
    gates = ix.gates
    idx = idx or {}
    tl_j = ix.timeline[j]
    out = []
    for pa, a in enumerate(ix.timeline[i]):
        ga = gates[a]
        if j in ga.qubits or ga.variant is not None:
            continue
        k = ga.kind
        if k in ONE_Q_MERGEABLE:
            if not one_qubit:
                continue
        elif k in TWO_Q_MERGEABLE:
            if not two_qubit:
                continue
            x = _other(ga, i)
            role = _role(ga, i)
        else:
            continue
        lo, hi = ix.window(a, j)
        plist = ix.by_kind.get((j, k), ())
        s1, s2 = merge_savings(k)
        for p in plist[bisect.bisect_right(plist, lo):bisect.bisect_left(plist, hi)]:
            b = tl_j[p]
            gb = gates[b]
            if gb.variant is not None:
                continue
            if k in TWO_Q_MERGEABLE:
                if i in gb.qubits or _role(gb, j) != role:
                    continue
                y = _other(gb, j)
                if x == y or y == i or x == j:
                    continue
                if x in idx and y in idx and idx[x] == idx[y]:
                    continue
                if patch_of is not None and patch_of[x] != patch_of[y]:
                    continue
                if not ix.independent(a, b):
                    continue
            out.append(MergeCandidate(a, b, k, s1, s2, abs(ix.moment[a] - ix.moment[b])))
    return out


def find_candidates_bruteforce(c: LogicalCircuit, i: int, j: int, idx=None) -> list[MergeCandidate]:
    """Reference enumeration over all gate pairs using explicit DAG reachability."""
    idx = idx or {}
    m = len(c.gates)
    succ = [set() for _ in range(m)]
    last: dict[int, int] = {}
    for gi, g in enumerate(c.gates):
        for q in g.qubits:
            if q in last:
                succ[last[q]].add(gi)
            last[q] = gi
    reach = [set() for _ in range(m)]
    for gi in range(m - 1, -1, -1):
        for s in succ[gi]:
            reach[gi] |= {s} | reach[s]
    mom = gate_moments(c.gates)
    out = []
    for a, ga in enumerate(c.gates):
        for b, gb in enumerate(c.gates):
            if ga.kind != gb.kind or a == b:
                continue
            if i not in ga.qubits or j in ga.qubits or j not in gb.qubits or i in gb.qubits:
                continue
            if b in reach[a] or a in reach[b]:
                continue
            k = ga.kind
            if k in TWO_Q_MERGEABLE:
                if _role(ga, i) != _role(gb, j):
                    continue
                x, y = _other(ga, i), _other(gb, j)
                if x == y:
                    continue
                if x in idx and y in idx and idx[x] == idx[y]:
                    continue
            elif k not in ONE_Q_MERGEABLE:
                continue
            s1, s2 = merge_savings(k)
            out.append(MergeCandidate(a, b, k, s1, s2, abs(mom[a] - mom[b])))
    return sorted(out)


# --- conflicts ----------------------------------------------------------------------

def conflict_clusters(cands: list[MergeCandidate], index: CircuitIndex, i: int, j: int) -> list[ConflictCluster]:
    """Group candidates into clusters connected by crossings or shared gates."""
    if not cands:
        return []
    pa = [index.pos[c.gate_a][i] for c in cands]
    pb = [index.pos[c.gate_b][j] for c in cands]
    edges: set[tuple[int, int]] = set()
    order = sorted(range(len(cands)), key=lambda k: (pa[k], pb[k]))
    # sweep along timeline i: an earlier candidate whose b sits at or after
    # this one's b either crosses it or shares its b gate
    seen_b: list[tuple[int, int]] = []
    for k in order:
        lo = bisect.bisect_left(seen_b, (pb[k], -1))
        for _, other in seen_b[lo:]:
            edges.add((min(k, other), max(k, other)))
        bisect.insort(seen_b, (pb[k], k))
    # shared origins on either side
    for key in (pa, pb):
        groups: dict[int, list[int]] = {}
        for k, v in enumerate(key):
            groups.setdefault(v, []).append(k)
        for members in groups.values():
            for x in range(len(members)):
                for y in range(x + 1, len(members)):
                    edges.add((min(members[x], members[y]), max(members[x], members[y])))

    parent = list(range(len(cands)))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    members: dict[int, list[int]] = {}
    for k in order:
        members.setdefault(find(k), []).append(k)
    clusters = []
    for ks in members.values():
        local = {k: n for n, k in enumerate(ks)}
        cl_edges = {(local[a], local[b]) for a, b in edges if a in local and b in local}
        clusters.append(ConflictCluster([cands[k] for k in ks], {tuple(sorted(e)) for e in cl_edges}))
    return clusters


def _value(c: MergeCandidate, w1=1.0, w2=1.0) -> float:
    return w1 * c.savings_1q + w2 * c.savings_2q


def _greedy(cluster: ConflictCluster, order) -> list[int]:
    adj: dict[int, set[int]] = {k: set() for k in range(len(cluster.candidates))}
    for a, b in cluster.conflicts:
        adj[a].add(b)
        adj[b].add(a)
    chosen, blocked = [], set()
    for k in order:
        if k in blocked:
            continue
        chosen.append(k)
        blocked |= adj[k]
        blocked.add(k)
    return chosen


def _traverse(cluster: ConflictCluster) -> list[int]:
    """Walk candidates in timeline order; at each conflict keep the better one."""
    cands = cluster.candidates
    deg = cluster.degree()
    adj: dict[int, set[int]] = {k: set() for k in range(len(cands))}
    for a, b in cluster.conflicts:
        adj[a].add(b)
        adj[b].add(a)

    def key(k):
        c = cands[k]
        return (-c.savings, deg[k], c.delay, c.gate_a)

    kept: list[int] = []
    for k in range(len(cands)):
        clash = [o for o in kept if o in adj[k]]
        if not clash:
            kept.append(k)
            continue
        # replace the clashing kept candidates only if k beats their sum
        if sum(cands[o].savings for o in clash) < cands[k].savings or (
                len(clash) == 1 and key(k) < key(clash[0])):
            kept = [o for o in kept if o not in clash] + [k]
    return kept


def _score(cands, chosen):
    return (sum(cands[k].savings for k in chosen), -sum(cands[k].delay for k in chosen))


def resolve_cluster(cluster: ConflictCluster) -> list[MergeCandidate]:
    cands = cluster.candidates
    if not cluster.conflicts:
        return list(cands)
    deg = cluster.degree()
    n = len(cands)
    orders = [
        sorted(range(n), key=lambda k: (-cands[k].savings, deg[k], cands[k].delay, cands[k].gate_a)),
        sorted(range(n), key=lambda k: (deg[k], -cands[k].savings, cands[k].delay, cands[k].gate_a)),
        sorted(range(n), key=lambda k: (-cands[k].savings / (1 + deg[k]), cands[k].delay, cands[k].gate_a)),
    ]
    options = [_greedy(cluster, o) for o in orders] + [_traverse(cluster)]
    best = max(options, key=lambda ch: _score(cands, ch))
    return [cands[k] for k in sorted(best, key=lambda k: (cands[k].gate_a, cands[k].gate_b))]


def resolve_conflicts(clusters: list[ConflictCluster]) -> MergeSet:
    out = MergeSet()
    for cl in clusters:
        out.selected.extend(resolve_cluster(cl))
    return out


def best_subset_exhaustive(cluster: ConflictCluster) -> float:
    """Maximum total savings over conflict-free subsets (test oracle)."""
    cands = cluster.candidates
    n = len(cands)
    adj = [0] * n
    for a, b in cluster.conflicts:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    best = 0

    def rec(k, mask, total):
        nonlocal best
        if k == n:
            best = max(best, total)
            return
        rec(k + 1, mask, total)
        if not mask >> k & 1:
            rec(k + 1, mask | adj[k], total + cands[k].savings)

    rec(0, 0, 0)
    return best


# --- pair savings -----------------------------------------------------------------

@dataclass(frozen=True)
class PairSavings:
    s1: int
    s2: int
    delay: int
    tallies: dict
    slot_of_i: int = 0
    selected: tuple = ()

    def as_tuple(self):
        return (self.s1, self.s2, self.delay, dict(self.tallies))


def pair_savings(c: LogicalCircuit, i: int, j: int, *, index: CircuitIndex | None = None,
                 partner_slots=None) -> PairSavings:
    """Savings of placing i and j in one patch, best of both slot assignments.

    Only slots of partner qubits enter the eligibility test, so without
    ``partner_slots`` both assignments give identical results.
    """
    ix = index or CircuitIndex(c)
    a, b = (i, j) if i < j else (j, i)
    results = []
    for slot_a in (0, 1):
        idx = dict(partner_slots or {})
        idx[a], idx[b] = slot_a, 1 - slot_a
        cands = find_candidates(c, a, b, idx, index=ix)
        ms = resolve_conflicts(conflict_clusters(cands, ix, a, b))
        s1, s2, d = ms.totals
        tallies = Counter(m.kind.name for m in ms.selected)
        results.append(PairSavings(s1, s2, d, dict(tallies), slot_a if a == i else 1 - slot_a,
                                   tuple(ms.selected)))
        if not partner_slots:
            break
    return max(results, key=lambda r: (r.s1 + r.s2, -r.delay, -r.slot_of_i))


def debug_dump(c: LogicalCircuit, i: int, j: int, idx=None) -> str:
    """Plain-text listing of candidates and their conflict clusters."""
    ix = CircuitIndex(c)
    cands = find_candidates(c, i, j, idx, index=ix)
    lines = [f"pair {i} {j}: {len(cands)} candidates"]
    for n, cl in enumerate(conflict_clusters(cands, ix, i, j)):
        lines.append(f"cluster {n}")
        for k, m in enumerate(cl.candidates):
            nbrs = sorted({b for a, b in cl.conflicts if a == k} | {a for a, b in cl.conflicts if b == k})
            lines.append(f"  [{k}] {m.kind.name} g{m.gate_a}-g{m.gate_b} "
                         f"s=({m.savings_1q},{m.savings_2q}) delay={m.delay} conflicts={nbrs}")
    return "\n".join(lines)


# --- rewrite ------------------------------------------------------------------------

def _check_packing(c: LogicalCircuit, packing) -> dict[int, tuple[int, int]]:
    where: dict[int, tuple[int, int]] = {}
    for p, patch in enumerate(packing.patches):
        if len(patch) != 2:
            raise InvalidPacking("patches are (slot 0, slot 1) pairs")
        for s, q in enumerate(patch):
            if q is None:
                continue
            if q in where:
                raise InvalidPacking(f"qubit {q} placed twice")
            where[q] = (p, s)
    missing = set(range(c.num_qubits)) - set(where)
    if missing:
        raise InvalidPacking(f"unassigned qubits {sorted(missing)}")
    return where


def select_merges(c: LogicalCircuit, packing, index: CircuitIndex | None = None) -> list[MergeCandidate]:
    """Resolved merges for every paired patch under a committed packing."""
    where = _check_packing(c, packing)
    ix = index or CircuitIndex(c)
    patch_of = {q: p for q, (p, _) in where.items()}
    slot = {q: s for q, (_, s) in where.items()}
    chosen: list[MergeCandidate] = []
    for p, (u, v) in enumerate(packing.patches):
        if u is None or v is None:
            continue
        i, j = min(u, v), max(u, v)
        cands = find_candidates(c, i, j, slot, index=ix, patch_of=patch_of)
        # a two-qubit merge is seen from both patches it spans; keep one view
        cands = [m for m in cands if m.kind in ONE_Q_MERGEABLE
                 or patch_of[_other(ix.gates[m.gate_a], i)] > p]
        chosen.extend(resolve_conflicts(conflict_clusters(cands, ix, i, j)).selected)
    return chosen


@lru_cache(maxsize=None)
def _duration(kind: GateKind, variant: Variant, nq: int) -> int:
    from .code import template

    if kind is GateKind.SWAP:
        return 0
    if variant is Variant.TARGETED:
        return template(kind, variant, (0,)).cost.depth
    if variant is Variant.PATCHWISE:
        return template(kind, variant).cost.depth
    return template(kind, variant, (0, 1) if variant is Variant.INTRA else (0, 0)).cost.depth


def _timing(g: Gate, where) -> tuple[tuple[int, ...], int]:
    """Patches a logical gate occupies and its physical depth estimate."""
    pats = tuple(sorted({where[q][0] for q in g.qubits}))
    k = g.kind
    if k in MACRO_OF.values():
        var = Variant.PATCHWISE
    elif g.is_transversal:
        var = Variant.TRANSVERSAL
    elif len(g.qubits) == 1:
        var = Variant.TARGETED
    else:
        var = Variant.INTRA if len(pats) == 1 else Variant.INTER
    return pats, _duration(k, var, len(g.qubits))


def apply_merges(c: LogicalCircuit, packing, *, return_applied: bool = False,
                 rounds: int = 3):
    """Rewrite selected merge pairs into macros and reschedule.

    Gates are emitted by list scheduling on per-patch clocks: among the ready
    gates, the one that can start earliest goes first (ties by original
    index).  A merge partner waits for its mate; if nothing else is ready,
    the earliest waiting merge is dissolved.  Merges whose wait exceeds the
    depth they save are dropped and the schedule is rebuilt, up to
    ``rounds`` times.
    """
    ix = CircuitIndex(c)
    merges = select_merges(c, packing, ix)
    where = _check_packing(c, packing)
    for _ in range(rounds):
        out, applied, waits = _schedule(c, ix, merges, where, packing.n_patches)
        late = {n for n, w in waits.items()
                if w > _wait_budget(merges[n], c.gates, where)}
        if not late:
            break
        merges = [m for n, m in enumerate(merges) if n not in late]
    else:
        out, applied, _ = _schedule(c, ix, merges, where, packing.n_patches)
    res = c.with_gates(out)
    return (res, applied) if return_applied else res


WAIT_FACTOR_1Q = 8.0


def _wait_budget(m: MergeCandidate, gates, where) -> float:
    f = WAIT_FACTOR_1Q if m.kind in ONE_Q_MERGEABLE else 1.0
    return f * _depth_saving(m, gates, where)


def _depth_saving(m: MergeCandidate, gates, where) -> int:
    ga, gb = gates[m.gate_a], gates[m.gate_b]
    return _timing(ga, where)[1] + _timing(gb, where)[1] - _timing(_macro(ga, gb, where), where)[1]


def _schedule(c: LogicalCircuit, ix: CircuitIndex, merges, where, n_patches):
    """List-schedule the gates; returns (gates, applied merges, waits by merge)."""
    partner = {}
    for n, m in enumerate(merges):
        partner[m.gate_a] = n
        partner[m.gate_b] = n
    gates = c.gates
    mcount = len(gates)
    succ: list[list[int]] = [[] for _ in range(mcount)]
    npred = [0] * mcount
    for tl in ix.timeline:
        for a, b in zip(tl, tl[1:]):
            succ[a].append(b)
            npred[b] += 1
    timing = [_timing(g, where) for g in gates]
    clock = [0] * n_patches
    first_ready: dict[int, int] = {}
    waits: dict[int, int] = {}
    dissolved: set[int] = set()
    ready: list[int] = [g for g in range(mcount) if npred[g] == 0]
    out: list[Gate] = []
    applied: list[MergeCandidate] = []
    waiting: set[int] = set()  # merged gates whose partner is not ready yet

    def release(g):
        for s in succ[g]:
            npred[s] -= 1
            if npred[s] == 0:
                ready.append(s)

    def start(g):
        return max((clock[p] for p in timing[g][0]), default=0)

    while ready or waiting:
        if not ready:
            g = min(waiting)
            dissolved.add(partner[g])
            waiting.discard(g)
            ready.append(g)
            continue
        k = min(range(len(ready)), key=lambda r: (start(ready[r]), ready[r]))
        g = ready.pop(k)
        n = partner.get(g)
        if n is None or n in dissolved:
            t = start(g) + timing[g][1]
            for p in timing[g][0]:
                clock[p] = t
            out.append(gates[g])
            release(g)
            continue
        m = merges[n]
        mate = m.gate_b if g == m.gate_a else m.gate_a
        if mate in waiting:
            waiting.discard(mate)
            macro = _macro(gates[m.gate_a], gates[m.gate_b], where)
            pats, dur = _timing(macro, where)
            begin = max(clock[p] for p in pats)
            waits[n] = begin - min(first_ready[n], start(g))
            t = begin + dur
            for p in pats:
                clock[p] = t
            out.append(macro)
            applied.append(m)
            release(g)
            release(mate)
        else:
            first_ready[n] = start(g)
            waiting.add(g)
    return out, applied, waits


def _macro(ga: Gate, gb: Gate, where) -> Gate:
    if ga.kind in ONE_Q_MERGEABLE:
        qa, qb = ga.qubits[0], gb.qubits[0]
        ordered = (qa, qb) if where[qa][1] == 0 else (qb, qa)
        return Gate(MACRO_OF[ga.kind], ordered)
    b = gb.qubits
    if where[b[0]][0] != where[ga.qubits[0]][0]:
        # symmetric kinds: align operands so a0, b0 share a patch
        b = b[::-1]
    return Gate(ga.kind, ga.qubits + b, variant=Variant.TRANSVERSAL)
