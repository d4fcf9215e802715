"""Independent brute-force references written straight from the definitions.

They work on plain dictionaries keyed by arrow ids and share no code with the
package beyond reading a groupoid's public tables.
"""

from __future__ import annotations

import itertools

import numpy as np


def tables(g):
    ids = [a.id for a in g.arrows]
    d = {a.id: a.d for a in g.arrows}
    r = {a.id: a.r for a in g.arrows}
    inv = {ids[i]: ids[g.inv[i]] for i in range(len(ids))}
    comp = {(ids[i], ids[j]): ids[k] for (i, j), k in g.table.items()}
    lam = {ids[i]: g.haar[i] for i in range(len(ids))}
    return ids, d, r, inv, comp, lam


def axioms_hold(g) -> bool:
    """All composable pairs/triples, units, inverses and right invariance."""
    ids, d, r, inv, comp, lam = tables(g)
    for x, y in itertools.product(ids, ids):
        if (d[x] == r[y]) != ((x, y) in comp):
            return False
        if (x, y) in comp:
            z = comp[(x, y)]
            if d[z] != d[y] or r[z] != r[x]:
                return False
    for x, y, z in itertools.product(ids, ids, ids):
        if (x, y) in comp and (y, z) in comp:
            if comp[(comp[(x, y)], z)] != comp[(x, comp[(y, z)])]:
                return False
    for x in ids:
        y = inv[x]
        if inv[y] != x or d[y] != r[x]:
            return False
        e = comp[(y, x)]
        if d[e] != d[x] or r[e] != d[x] or comp[(x, e)] != x:
            return False
    for xi in ids:
        src = [eta for eta in ids if d[eta] == r[xi]]
        image = [comp[(eta, xi)] for eta in src]
        if sorted(image) != sorted(e for e in ids if d[e] == d[xi]):
            return False
        if any(not np.isclose(float(lam[comp[(eta, xi)]]), float(lam[eta])) for eta in src):
            return False
    return True


def convolve(g, f: dict, h: dict) -> dict:
    """(f*h)(xi) = sum over eta in Xi^{r(xi)} of f(eta) h(eta^{-1} xi) lambda^{r(xi)}(eta)."""
    ids, d, r, inv, comp, lam = tables(g)
    out = {}
    for xi in ids:
        s = 0
        for eta in ids:
            if r[eta] != r[xi]:
                continue
            zeta = comp[(inv[eta], xi)]
            s += f.get(eta, 0) * h.get(zeta, 0) * lam[inv[eta]]
        out[xi] = s
    return out


def regular_matrix(g, x: str, f: dict) -> tuple[list[str], np.ndarray]:
    """Matrix of u -> f*u on the source fiber of x, from the convolution formula."""
    ids, d, r, inv, comp, lam = tables(g)
    fib = [a for a in ids if d[a] == x]
    M = np.zeros((len(fib), len(fib)), dtype=complex)
    for j, zeta in enumerate(fib):
        u = {zeta: 1.0}
        v = convolve(g, f, u)
        for i, xi in enumerate(fib):
            M[i, j] = v[xi]
    return fib, M


def hahn(g, f: dict) -> float:
    ids, d, r, inv, comp, lam = tables(g)
    best = 0.0
    for x in g.units:
        a = sum(abs(f.get(xi, 0)) * float(lam[xi]) for xi in ids if d[xi] == x)
        b = sum(abs(f.get(inv[xi], 0)) * float(lam[xi]) for xi in ids if d[xi] == x)
        best = max(best, a, b)
    return best


def interval_union(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out
