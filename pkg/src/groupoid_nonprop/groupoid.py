"""Finite groupoids with right Haar weights.

A groupoid is stored as explicit tables: arrows with source ``d`` and range
``r``, an inversion map, and a partial composition table.  Identifiers are
opaque strings; everything internal is index based.

Conventions: ``d(xi eta) = d(eta)``, ``r(xi eta) = r(xi)``; the product
``xi eta`` is defined exactly when ``d(xi) == r(eta)``.  The Haar weight of an
arrow is its mass for the source fiber measure ``lambda_{d(xi)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Number
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadGroupError,
    IsotropyError,
    NotInvariantError,
    NotOrbitError,
    UnknownUnitError,
)
from .groups import FiniteGroup, ZdTruncation, cyclic, group_from_table


@dataclass(frozen=True)
class Arrow:
    id: str
    d: str
    r: str


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    detail: str = ""

    def __str__(self):
        w = ", ".join(map(str, self.witness))
        return f"{self.axiom} [{w}]" + (f": {self.detail}" if self.detail else "")


class FiniteGroupoid:
    """Exact finite groupoid.

    Parameters
    ----------
    units : sequence of str
        The unit space X, in a fixed order.
    arrows : iterable of (id, d, r)
        Arrow records; order is the stored basis order.
    inverse : mapping id -> id
        The inversion map.
    compose : mapping (id, id) -> id
        The composition table.  Only composable pairs may appear.
    haar : mapping id -> weight, optional
        Positive weight of each arrow in its source fiber.  Defaults to 1
        (counting measure).  Fractions keep exact arithmetic available.
    truncated : iterable of unit ids
        Units whose isotropy is a truncated lattice ball; products that leave
        the ball are absent from ``compose`` and ``validate`` tolerates that.

    Referential integrity is enforced here (unknown identifiers raise
    ``ValueError``); the groupoid axioms are checked by :func:`validate`.
    """

    def __init__(
        self,
        units: Sequence[str],
        arrows: Iterable,
        inverse: Mapping[str, str],
        compose: Mapping[tuple[str, str], str],
        haar: Mapping[str, Number] | None = None,
        truncated: Iterable[str] = (),
    ):
        self.units = tuple(str(u) for u in units)
        self.unit_index = {u: i for i, u in enumerate(self.units)}
        if len(self.unit_index) != len(self.units):
            raise ValueError("duplicate unit identifiers")
        recs = []
        for a in arrows:
            rec = a if isinstance(a, Arrow) else Arrow(str(a[0]), str(a[1]), str(a[2]))
            if rec.d not in self.unit_index or rec.r not in self.unit_index:
                raise ValueError(f"arrow {rec.id} references an unknown unit")
            recs.append(rec)
        self.arrows = tuple(recs)
        self.arrow_index = {a.id: i for i, a in enumerate(self.arrows)}
        if len(self.arrow_index) != len(self.arrows):
            raise ValueError("duplicate arrow identifiers")
        n = len(self.arrows)
        self.d = np.array([self.unit_index[a.d] for a in self.arrows], dtype=np.int64)
        self.r = np.array([self.unit_index[a.r] for a in self.arrows], dtype=np.int64)
        try:
            self.inv = np.array(
                [self.arrow_index[inverse[a.id]] for a in self.arrows], dtype=np.int64
            )
        except KeyError as exc:
            raise ValueError(f"inverse table incomplete or dangling at {exc}") from None
        table: dict[tuple[int, int], int] = {}
        for (x, y), z in compose.items():
            try:
                table[(self.arrow_index[x], self.arrow_index[y])] = self.arrow_index[z]
            except KeyError as exc:
                raise ValueError(f"composition table references unknown arrow {exc}") from None
        self.table = table
        if haar is None:
            self.haar = (1,) * n
        else:
            self.haar = tuple(haar[a.id] for a in self.arrows)
        self.truncated = frozenset(str(u) for u in truncated)
        unknown = self.truncated - set(self.units)
        if unknown:
            raise ValueError(f"truncated units not in unit list: {sorted(unknown)}")

    # -- identity ---------------------------------------------------------

    @cached_property
    def _key(self):
        return (
            self.units,
            self.arrows,
            tuple(self.inv.tolist()),
            tuple(sorted(self.table.items())),
            self.haar,
            tuple(sorted(self.truncated)),
        )

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteGroupoid):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"FiniteGroupoid(units={len(self.units)}, arrows={len(self.arrows)})"

    # -- derived tables ---------------------------------------------------

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    @cached_property
    def pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Composable pairs as index arrays ``(left, right, product)``."""
        if not self.table:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), z.copy()
        items = sorted(self.table.items())
        left = np.fromiter((k[0] for k, _ in items), dtype=np.int64, count=len(items))
        right = np.fromiter((k[1] for k, _ in items), dtype=np.int64, count=len(items))
        prod = np.fromiter((v for _, v in items), dtype=np.int64, count=len(items))
        return left, right, prod

    @cached_property
    def haar_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.haar], dtype=float)

    @cached_property
    def is_exact(self) -> bool:
        return all(isinstance(w, (int, Fraction)) for w in self.haar)

    @cached_property
    def source_fibers(self) -> tuple[np.ndarray, ...]:
        return tuple(np.flatnonzero(self.d == i) for i in range(self.n_units))

    @cached_property
    def range_fibers(self) -> tuple[np.ndarray, ...]:
        return tuple(np.flatnonzero(self.r == i) for i in range(self.n_units))

    @cached_property
    def unit_arrows(self) -> np.ndarray:
        """Index of the idempotent arrow at each unit, -1 when there is none."""
        out = np.full(self.n_units, -1, dtype=np.int64)
        for i in range(self.n_arrows):
            if self.d[i] == self.r[i] and self.table.get((i, i)) == i:
                if out[self.d[i]] == -1:
                    out[self.d[i]] = i
        return out

    def product(self, i: int, j: int) -> int | None:
        return self.table.get((i, j))

    def unit(self, x: str) -> int:
        try:
            return self.unit_index[x]
        except KeyError:
            raise UnknownUnitError(f"unknown unit {x!r}") from None

    def arrow(self, a: str) -> int:
        return self.arrow_index[a]

    def source_fiber(self, x: str) -> tuple[str, ...]:
        return tuple(self.arrows[i].id for i in self.source_fibers[self.unit(x)])

    def isotropy(self, x: str) -> tuple[str, ...]:
        i = self.unit(x)
        return tuple(self.arrows[k].id for k in self.source_fibers[i] if self.r[k] == i)

    def left_weight(self, i: int):
        """Weight of arrow ``i`` for the left system ``lambda^{r(xi)}``."""
        return self.haar[self.inv[i]]

    def _truncation_gap(self, i: int, j: int) -> bool:
        """True when ``(i, j)`` is composable but may be missing by truncation."""
        if not self.truncated:
            return False
        u = self.d[i]
        return (
            self.units[u] in self.truncated
            and self.r[i] == u
            and self.d[j] == u
            and self.r[j] == u
        )


def _same_weight(a, b) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=1e-15)


def validate(g: FiniteGroupoid) -> list[Violation]:
    """Check the groupoid and Haar axioms by brute force.

    Returns the list of violations; an empty list means ``g`` is a groupoid
    with a right-invariant Haar system.
    """
    out: list[Violation] = []
    A = g.arrows
    n = g.n_arrows
    d, r, inv, table = g.d, g.r, g.inv, g.table

    for (i, j), k in table.items():
        if d[i] != r[j]:
            out.append(Violation("composition-domain", (A[i].id, A[j].id), "not composable"))
            continue
        if d[k] != d[j] or r[k] != r[i]:
            out.append(Violation("composition-source-range", (A[i].id, A[j].id, A[k].id)))
    for i in range(n):
        for j in g.range_fibers[d[i]]:
            if (i, j) not in table and not g._truncation_gap(i, j):
                out.append(Violation("composition-domain", (A[i].id, A[j].id), "product missing"))

    for (i, j), ij in table.items():
        for k in g.range_fibers[d[j]]:
            jk = table.get((j, k))
            if jk is None:
                continue
            lhs = table.get((ij, k))
            rhs = table.get((i, jk))
            if lhs is None or rhs is None:
                if g._truncation_gap(ij, k) or g._truncation_gap(i, jk):
                    continue
                out.append(Violation("associativity", (A[i].id, A[j].id, A[k].id), "undefined"))
            elif lhs != rhs:
                out.append(Violation("associativity", (A[i].id, A[j].id, A[k].id)))

    e = g.unit_arrows
    for x in range(g.n_units):
        if e[x] < 0:
            out.append(Violation("unit", (g.units[x],), "no idempotent arrow"))
    for i in range(n):
        er, ed = e[r[i]], e[d[i]]
        if er >= 0 and table.get((er, i)) != i:
            out.append(Violation("unit-neutral", (A[er].id, A[i].id)))
        if ed >= 0 and table.get((i, ed)) != i:
            out.append(Violation("unit-neutral", (A[i].id, A[ed].id)))

    for i in range(n):
        j = inv[i]
        if inv[j] != i:
            out.append(Violation("involution", (A[i].id, A[j].id), "inverse is not involutive"))
        if d[j] != r[i] or r[j] != d[i]:
            out.append(Violation("involution", (A[i].id, A[j].id), "inverse has wrong endpoints"))
            continue
        if e[d[i]] >= 0 and table.get((j, i)) != e[d[i]]:
            out.append(Violation("involution", (A[i].id, A[j].id), "inv(xi) xi is not a unit"))
        if e[r[i]] >= 0 and table.get((i, j)) != e[r[i]]:
            out.append(Violation("involution", (A[i].id, A[j].id), "xi inv(xi) is not a unit"))

    for i in range(n):
        if not float(g.haar[i]) > 0:
            out.append(Violation("haar-positive", (A[i].id,), f"weight {g.haar[i]}"))
    for i in range(n):
        # xi: x -> y with x = d(xi), y = r(xi); eta -> eta xi maps Xi_y into Xi_x.
        x, y = d[i], r[i]
        image = []
        for eta in g.source_fibers[y]:
            k = table.get((eta, i))
            if k is None:
                continue
            image.append(k)
            if not _same_weight(g.haar[k], g.haar[eta]):
                out.append(
                    Violation(
                        "haar-right-invariance",
                        (A[eta].id, A[i].id),
                        f"weight {g.haar[k]} != {g.haar[eta]}",
                    )
                )
        if len(set(image)) != len(image):
            out.append(Violation("haar-right-invariance", (A[i].id,), "translation not injective"))
        if not g.truncated and set(image) != set(g.source_fibers[x].tolist()):
            out.append(Violation("haar-right-invariance", (A[i].id,), "translation not onto"))
    return out


@dataclass(frozen=True)
class OrbitDecomposition:
    orbits: tuple[frozenset, ...]
    isotropy: dict
    main_orbit: frozenset
    boundary: frozenset
    flags: tuple[str, ...] = ()

    def orbit_of(self, x: str) -> frozenset:
        for o in self.orbits:
            if x in o:
                return o
        raise UnknownUnitError(f"unknown unit {x!r}")


def orbits(g: FiniteGroupoid) -> tuple[frozenset, ...]:
    """Partition of the units into orbits, in order of first unit."""
    parent = list(range(g.n_units))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in zip(g.d.tolist(), g.r.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[str]] = {}
    for i, u in enumerate(g.units):
        groups.setdefault(find(i), []).append(u)
    return tuple(frozenset(v) for _, v in sorted(groups.items()))


def orbit_decomposition(g: FiniteGroupoid, claimed_main: Iterable[str]) -> OrbitDecomposition:
    """Orbits, isotropy, and a check that ``claimed_main`` is a principal orbit.

    Density of the main orbit is a property of the compactification, not of
    the finite tables, so it is not checked here.
    """
    main = frozenset(str(u) for u in claimed_main)
    if not main:
        raise NotOrbitError("claimed main orbit is empty")
    for u in main:
        g.unit(u)
    parts = orbits(g)
    if main not in parts:
        raise NotOrbitError(f"{sorted(main)} is not a single orbit")
    iso = {u: g.isotropy(u) for u in g.units}
    bad = sorted(u for u in main if len(iso[u]) != 1)
    if bad:
        raise IsotropyError(f"nontrivial isotropy on the main orbit at {bad}", units=bad)
    flags = tuple(
        f"{u}: isotropy of order {len(iso[u])}" + (" (truncated)" if u in g.truncated else "")
        for u in g.units
        if u not in main and len(iso[u]) > 1
    )
    return OrbitDecomposition(
        orbits=parts,
        isotropy=iso,
        main_orbit=main,
        boundary=frozenset(g.units) - main,
        flags=flags,
    )


def is_invariant(g: FiniteGroupoid, A: Iterable[str]) -> bool:
    mask = np.zeros(g.n_units, dtype=bool)
    mask[[g.unit(u) for u in A]] = True
    return bool(np.all(mask[g.d] == mask[g.r]))


def reduce(g: FiniteGroupoid, A: Iterable[str]) -> FiniteGroupoid:
    """The reduction of ``g`` to the invariant unit set ``A``."""
    return _reduce(g, frozenset(str(u) for u in A))


@lru_cache(maxsize=256)
def _reduce(g: FiniteGroupoid, A: frozenset) -> FiniteGroupoid:
    if A == frozenset(g.units):
        return g
    if not is_invariant(g, A):
        crossing = next(
            a.id for a in g.arrows if (a.d in A) != (a.r in A)
        )
        raise NotInvariantError(f"arrow {crossing} crosses the boundary of the unit set", arrow=crossing)
    units = [u for u in g.units if u in A]
    keep = [a for a in g.arrows if a.d in A]
    ids = {a.id for a in keep}
    ainv = {a.id: g.arrows[g.inv[g.arrow_index[a.id]]].id for a in keep}
    comp = {
        (g.arrows[i].id, g.arrows[j].id): g.arrows[k].id
        for (i, j), k in g.table.items()
        if g.arrows[i].id in ids
    }
    haar = {a.id: g.haar[g.arrow_index[a.id]] for a in keep}
    return FiniteGroupoid(units, keep, ainv, comp, haar, truncated=g.truncated & A)


def kept_arrows(g: FiniteGroupoid, A: Iterable[str]) -> np.ndarray:
    """Indices in ``g`` of the arrows of ``reduce(g, A)``, in stored order."""
    mask = np.zeros(g.n_units, dtype=bool)
    mask[[g.unit(u) for u in A]] = True
    return np.flatnonzero(mask[g.d])


# -- builders -------------------------------------------------------------


def transitive_groupoid(
    units: Sequence[str],
    group: FiniteGroup | None = None,
    weights: Mapping[str, Number] | None = None,
) -> FiniteGroupoid:
    """The groupoid ``units x group x units`` with arrows ``(i, g, j): j -> i``.

    ``weights`` gives a positive mass per range unit; the Haar weight of an
    arrow is the mass of its range, which is right invariant by construction.
    With ``group=None`` this is the pair groupoid and arrows are named
    ``(i,j)``.
    """
    units = [str(u) for u in units]
    trivial = group is None
    group = group or cyclic(1)
    gn = group.names

    def name(i, a, j):
        return f"({i},{j})" if trivial else f"({i},{gn[a]},{j})"

    arrows, inverse, compose, haar = [], {}, {}, {}
    ginv = group.inverses
    for i in units:
        for a in range(group.order):
            for j in units:
                aid = name(i, a, j)
                arrows.append((aid, j, i))
                inverse[aid] = name(j, ginv[a], i)
                haar[aid] = 1 if weights is None else weights[i]
                for b in range(group.order):
                    for k in units:
                        compose[(aid, name(j, b, k))] = name(i, group.mul(a, b), k)
    return FiniteGroupoid(units, arrows, inverse, compose, haar)


def build_pair_groupoid(n: int, labels: Sequence[str] | None = None) -> FiniteGroupoid:
    if n < 1:
        raise ValueError("the pair groupoid needs n >= 1")
    labels = [str(i) for i in range(n)] if labels is None else list(labels)
    if len(labels) != n:
        raise ValueError("label count differs from n")
    return transitive_groupoid(labels)


def _as_group(spec) -> FiniteGroup | ZdTruncation:
    if isinstance(spec, (FiniteGroup, ZdTruncation)):
        return spec
    if isinstance(spec, str):
        s = spec.replace(" ", "")
        if s.startswith("Z/"):
            return cyclic(int(s[2:]))
        raise BadGroupError(f"unknown group descriptor {spec!r}")
    if isinstance(spec, int):
        return cyclic(spec)
    try:
        rows = [list(row) for row in spec]
    except TypeError:
        raise BadGroupError(f"unknown group descriptor {spec!r}") from None
    return group_from_table([str(i) for i in range(len(rows))], rows)


def build_group_bundle(base: Sequence[str], fibers) -> FiniteGroupoid:
    """Disjoint union of groups over ``base`` (``d = r`` on every arrow).

    ``fibers`` maps each base point to a :class:`FiniteGroup`, a
    :class:`ZdTruncation`, a ``"Z/k"`` descriptor, or a raw multiplication
    table (identity at index 0).  A single descriptor applies to every point.
    """
    base = [str(b) for b in base]
    if not isinstance(fibers, Mapping):
        fibers = {b: fibers for b in base}
    arrows, inverse, compose, truncated = [], {}, {}, []
    for b in base:
        grp = _as_group(fibers[b])
        if isinstance(grp, ZdTruncation):
            truncated.append(b)
            elems = grp.elements
            index = {k: i for i, k in enumerate(elems)}
            names = [f"{b}#" + ",".join(map(str, k)) for k in elems]
            for i, k in enumerate(elems):
                arrows.append((names[i], b, b))
                inverse[names[i]] = names[index[tuple(-c for c in k)]]
                for j, k2 in enumerate(elems):
                    s = tuple(p + q for p, q in zip(k, k2))
                    if s in index:
                        compose[(names[i], names[j])] = names[index[s]]
        else:
            names = [f"{b}#{nm}" for nm in grp.names]
            for a in range(grp.order):
                arrows.append((names[a], b, b))
                inverse[names[a]] = names[grp.inverses[a]]
                for c in range(grp.order):
                    compose[(names[a], names[c])] = names[grp.mul(a, c)]
    return FiniteGroupoid(base, arrows, inverse, compose, truncated=truncated)


def disjoint_union(*gs: FiniteGroupoid) -> FiniteGroupoid:
    units, arrows, inverse, compose, haar, truncated = [], [], {}, {}, {}, set()
    for g in gs:
        if set(units) & set(g.units):
            raise ValueError("disjoint_union needs disjoint unit sets")
        units.extend(g.units)
        arrows.extend(g.arrows)
        for i, a in enumerate(g.arrows):
            inverse[a.id] = g.arrows[g.inv[i]].id
            haar[a.id] = g.haar[i]
        for (i, j), k in g.table.items():
            compose[(g.arrows[i].id, g.arrows[j].id)] = g.arrows[k].id
        truncated |= g.truncated
    return FiniteGroupoid(units, arrows, inverse, compose, haar, truncated)
