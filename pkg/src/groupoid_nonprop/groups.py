"""Finite groups given by multiplication tables, and truncated lattice groups.

These are the fibers of group bundles.  ``FiniteGroup`` is exact; ``ZdTruncation``
is a ball of radius ``radius`` in Z^d, which is *not* closed under addition
and is only used to build boundary convolution operators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BadGroupError, NotAbelianError


@dataclass(frozen=True)
class FiniteGroup:
    """Group with elements ``0..n-1`` labelled by ``names``; ``table[a][b] = ab``."""

    names: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    identity: int = 0

    def __post_init__(self):
        problem = _group_problem(self.table, self.identity)
        if problem:
            raise BadGroupError(problem, names=self.names)
        if len(self.names) != len(self.table):
            raise BadGroupError("names and table have different sizes")

    @property
    def order(self) -> int:
        return len(self.names)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @cached_property
    def inverses(self) -> tuple[int, ...]:
        e = self.identity
        return tuple(row.index(e) for row in self.table)

    @cached_property
    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(a))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    @cached_property
    def characters(self) -> np.ndarray:
        """Character table, shape ``(order, order)``; row j is the j-th character.

        Found by brute force over images of a greedy generating set, then
        checked to be homomorphisms against the table.
        """
        if not self.is_abelian:
            raise NotAbelianError("character table requested for a non-abelian group")
        gens = self._generators()
        n = self.order
        chars = []
        for images in itertools.product(*[range(self.element_order(g)) for g in gens]):
            chi = np.full(n, np.nan, dtype=complex)
            chi[self.identity] = 1.0
            frontier = [self.identity]
            ok = True
            while frontier and ok:
                nxt = []
                for x in frontier:
                    for g, k in zip(gens, images):
                        val = chi[x] * np.exp(2j * np.pi * k / self.element_order(g))
                        y = self.table[x][g]
                        if np.isnan(chi[y].real):
                            chi[y] = val
                            nxt.append(y)
                        elif abs(chi[y] - val) > 1e-9:
                            ok = False
                            break
                frontier = nxt
            if ok and all(
                abs(chi[self.table[a][b]] - chi[a] * chi[b]) < 1e-9
                for a in range(n)
                for b in range(n)
            ):
                chars.append(chi)
        if len(chars) != n:  # pragma: no cover - abelian groups always have n characters
            raise BadGroupError("character enumeration failed")
        return np.array(chars)

    def _generators(self) -> list[int]:
        gens: list[int] = []
        span = {self.identity}
        for a in sorted(range(self.order), key=self.element_order, reverse=True):
            if a in span:
                continue
            gens.append(a)
            span = _closure(self, gens)
            if len(span) == self.order:
                break
        return gens


def _closure(group: FiniteGroup, gens) -> set[int]:
    span = {group.identity}
    frontier = [group.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = group.table[x][g]
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return span


def _group_problem(table, identity) -> str | None:
    n = len(table)
    if n == 0:
        return "empty group"
    if not 0 <= identity < n:
        return "identity index out of range"
    for row in table:
        if len(row) != n:
            return "table is not square"
        if any(not (0 <= v < n) for v in row):
            return "table is not closed"
    for a in range(n):
        if table[identity][a] != a or table[a][identity] != a:
            return f"identity does not act neutrally on element {a}"
    for a in range(n):
        if identity not in table[a] or all(table[b][a] != identity for b in range(n)):
            return f"element {a} has no inverse"
    for a in range(n):
        for b in range(n):
            ab = table[a][b]
            for c in range(n):
                if table[ab][c] != table[a][table[b][c]]:
                    return f"associativity fails on ({a}, {b}, {c})"
    return None


def cyclic(k: int, prefix: str = "") -> FiniteGroup:
    names = tuple(f"{prefix}{i}" for i in range(k))
    return FiniteGroup(names, tuple(tuple((a + b) % k for b in range(k)) for a in range(k)))


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = [(a, b) for a in range(g.order) for b in range(h.order)]
    index = {p: i for i, p in enumerate(pairs)}
    names = tuple(f"{g.names[a]}.{h.names[b]}" for a, b in pairs)
    table = tuple(
        tuple(index[(g.table[a][c], h.table[b][d])] for c, d in pairs) for a, b in pairs
    )
    return FiniteGroup(names, table, index[(g.identity, h.identity)])


def symmetric3() -> FiniteGroup:
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    # (pq)(i) = p(q(i))
    table = tuple(
        tuple(index[tuple(p[q[i]] for i in range(3))] for q in perms) for p in perms
    )
    names = tuple("s" + "".join(map(str, p)) for p in perms)
    return FiniteGroup(names, table, index[(0, 1, 2)])


def group_from_table(names, table, identity=0) -> FiniteGroup:
    return FiniteGroup(tuple(names), tuple(tuple(int(v) for v in row) for row in table), identity)


@dataclass(frozen=True)
class ZdTruncation:
    """Ball ``{k in Z^d : |k|_inf <= radius}`` standing in for Z^d."""

    dim: int = 1
    radius: int = 1
    elements: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise BadGroupError(f"Z^d truncations support d in (1, 2), got {self.dim}")
        if self.radius < 0:
            raise BadGroupError("negative truncation radius")
        rng = range(-self.radius, self.radius + 1)
        object.__setattr__(self, "elements", tuple(itertools.product(rng, repeat=self.dim)))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_abelian(self) -> bool:
        return True
