"""Meet-in-the-middle search for Iceberg gate templates.

Works on the binary symplectic representation, so it finds circuits up to
Pauli signs; signs are then fixed (and every template checked) with the
exact state-vector verifier in ``icepack.code.verify_template``.

A Pauli on n qubits is an int: bit q is its X part, bit n+q its Z part.
A candidate circuit is accepted when it maps the stabilizer group onto
itself and every logical operator onto the intended image modulo the
stabilizers, with the requested (1q gates, 2q gates, depth).

Example:
    python3 tools/find_templates.py --target cz-intra --cost 1,3,3 --split 0,1
"""

from __future__ import annotations

import argparse
import itertools
from collections import defaultdict

ONE_Q = ("H", "S", "SX")
TWO_Q = ("CX", "CZ")
X_SUPPORT = ((0, 1), (0, 2))
Z_SUPPORT = ((0, 2), (0, 1))


def _bit(v: int, i: int) -> int:
    return (v >> i) & 1


class Space:
    def __init__(self, n: int):
        self.n = n

    def pauli(self, x=(), z=()) -> int:
        v = 0
        for q in x:
            v |= 1 << q
        for q in z:
            v |= 1 << (self.n + q)
        return v

    def apply(self, g, v: int) -> int:
        """Conjugate Pauli v by gate g.  All gates used are involutions mod signs."""
        n, k = self.n, g[0]
        if k == "H":
            q = g[1]
            a, b = _bit(v, q), _bit(v, n + q)
            v &= ~((1 << q) | (1 << (n + q)))
            return v | (b << q) | (a << (n + q))
        if k == "S":
            return v ^ (_bit(v, g[1]) << (n + g[1]))
        if k == "SX":
            return v ^ (_bit(v, n + g[1]) << g[1])
        if k == "CX":
            c, t = g[1], g[2]
            v ^= _bit(v, c) << t
            return v ^ (_bit(v, n + t) << (n + c))
        if k == "CZ":
            a, b = g[1], g[2]
            xa, xb = _bit(v, a), _bit(v, b)
            return v ^ (xb << (n + a)) ^ (xa << (n + b))
        raise ValueError(k)

    def run(self, seq, paulis):
        for g in seq:
            paulis = [self.apply(g, v) for v in paulis]
        return paulis


def _span(gens) -> frozenset:
    sp = {0}
    for g in gens:
        sp |= {x ^ g for x in sp}
    return frozenset(sp)


def _key(paulis, n_stab: int):
    sp = _span(paulis[:n_stab])
    return (sp,) + tuple(min(p ^ s for s in sp) for p in paulis[n_stab:])


def _reduced(seq) -> bool:
    """No gate immediately repeated on the same operands."""
    last = {}
    for g in seq:
        if g[0] in ("H", "CX", "CZ") and all(last.get(q) == g for q in g[1:]):
            return False
        for q in g[1:]:
            last[q] = g
    return True


def _depth(seq, n: int) -> int:
    last = [0] * n
    d = 0
    for g in seq:
        m = max(last[q] for q in g[1:]) + 1
        for q in g[1:]:
            last[q] = m
        d = max(d, m)
    return d


def _sequences(one, two, n1: int, n2: int):
    length = n1 + n2
    for pos in itertools.combinations(range(length), n2):
        for g2 in itertools.product(two, repeat=n2):
            for g1 in itertools.product(one, repeat=n1):
                i2, i1 = iter(g2), iter(g1)
                s = [next(i2) if i in pos else next(i1) for i in range(length)]
                if _reduced(s):
                    yield s


def search(space: Space, base, target, n_stab: int, one, two, cost, split, limit=20):
    """Circuits A+B with A from the forward table and B matched backwards."""
    n1, n2, depth = cost
    a1, a2 = split
    table = defaultdict(list)
    for a in _sequences(one, two, a1, a2):
        table[_key(space.run(a, base), n_stab)].append(a)
    found = []
    for b in _sequences(one, two, n1 - a1, n2 - a2):
        k = _key(space.run(b[::-1], target), n_stab)
        for a in table.get(k, ()):
            s = a + b
            if _depth(s, space.n) == depth and _reduced(s):
                found.append(s)
                if len(found) >= limit:
                    return found
    return found


# --- targets -----------------------------------------------------------------

def _patch(space: Space, off: int):
    q = [off + k for k in range(4)]
    stabs = [space.pauli(x=q), space.pauli(z=q)]
    xs = [space.pauli(x=[off + k for k in X_SUPPORT[s]]) for s in (0, 1)]
    zs = [space.pauli(z=[off + k for k in Z_SUPPORT[s]]) for s in (0, 1)]
    return stabs, xs, zs


def target(name: str):
    """(space, base, image, n_stab, one-qubit pool, two-qubit pool)."""
    if name.endswith("intra") or name.startswith("h-"):
        sp = Space(4)
        stabs, (x0, x1), (z0, z1) = _patch(sp, 0)
        base = stabs + [x0, x1, z0, z1]
        if name == "cx-intra":      # control slot 0, target slot 1
            image = stabs + [x0 ^ x1, x1, z0, z0 ^ z1]
        elif name == "cz-intra":
            image = stabs + [x0 ^ z1, x1 ^ z0, z0, z1]
        elif name == "h-targeted":  # H on slot 0
            image = stabs + [z0, x1, x0, z1]
        else:
            raise SystemExit(f"unknown target {name}")
        pool = [(g, q) for g in ONE_Q for q in range(4)]
        pairs = [(g, a, b) for g in TWO_Q for a in range(4) for b in range(4) if a != b]
        return sp, base, image, 2, pool, pairs
    sp = Space(8)
    sa, (ax0, ax1), (az0, az1) = _patch(sp, 0)
    sb, (bx0, bx1), (bz0, bz1) = _patch(sp, 4)
    stabs = sa + sb
    base = stabs + [ax0, az0, bx0, bz0]
    if name == "cz-inter":          # slot 0 of A with slot 0 of B
        image = stabs + [ax0 ^ bz0, az0, bx0 ^ az0, bz0]
    elif name == "cx-inter":
        image = stabs + [ax0 ^ bx0, az0, bx0, bz0 ^ az0]
    else:
        raise SystemExit(f"unknown target {name}")
    pool = [(g, q) for g in ONE_Q for q in range(8)]
    pairs = [(g, a, b) for g in TWO_Q for a in range(4) for b in range(4, 8)]
    pairs += [(g, b, a) for g, a, b in pairs if g == "CX"]
    return sp, base, image, 4, pool, pairs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target", required=True,
                    choices=["cx-intra", "cz-intra", "h-targeted", "cx-inter", "cz-inter"])
    ap.add_argument("--cost", required=True, help="n1q,n2q,depth")
    ap.add_argument("--split", default=None, help="1q,2q gates in the forward half")
    ap.add_argument("--limit", type=int, default=20)
    a = ap.parse_args(argv)
    cost = tuple(int(v) for v in a.cost.split(","))
    split = (tuple(int(v) for v in a.split.split(",")) if a.split
             else (cost[0] // 2, cost[1] // 2))
    sp, base, image, ns, pool, pairs = target(a.target)
    found = search(sp, base, image, ns, pool, pairs, cost, split, a.limit)
    for s in found:
        print(" ".join(f"{g[0]}{tuple(g[1:])}" for g in s))
    print(f"# {len(found)} circuit(s) found")


if __name__ == "__main__":
    main()
