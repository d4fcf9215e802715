"""Lattice compactifications, band kernels, and boundary convolution operators.

A :class:`CompactificationModel` realizes ``X = M u N`` where ``M`` is the
lattice window ``[-L, L]^d`` (d = 1 or 2), ``M^in`` is the core box of radius
``core_radius`` and the outer points are sorted into fibers over the boundary
``N`` by a fiber rule:

``sign``
    d = 1, ``N = (negative end, positive end)``; ``p(m)`` is the sign of ``m``.
``constant``
    a single boundary point; every outer point lies over it (one-point
    compactification).

Every boundary point carries the translation group ``Z^d`` as isotropy.  A
:class:`BandKernel` gives the coefficients of ``(H u)(m) = sum_k a_k(m) u(m - k)``
together with their limits along each fiber.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .algebra import Kernel
from .errors import BadModelError, NotAbelianError, RadiusError
from .groupoid import FiniteGroupoid, build_group_bundle, disjoint_union, transitive_groupoid
from .groups import FiniteGroup, ZdTruncation
from .representations import OperatorMatrix
from .spectral import DEFAULT_GRID, SpectrumSet

FIBER_RULES = ("sign", "constant")
EPS_LADDER = (1e-1, 1e-2, 1e-3)

Point = tuple


def point_label(p: Point) -> str:
    return ",".join(str(int(c)) for c in p)


def parse_point(s: str, dim: int) -> Point:
    p = tuple(int(c) for c in s.split(","))
    if len(p) != dim:
        raise ValueError(f"point {s!r} does not have {dim} coordinates")
    return p


@dataclass(frozen=True)
class CompactificationModel:
    """Truncated realization of a quotient-type compactification of Z^d."""

    dim: int = 1
    boundary: tuple[str, ...] = ("-inf", "+inf")
    fiber_map: str = "sign"
    core_radius: int = 0
    truncation: int = 8

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(str(b) for b in self.boundary))
        if self.dim not in (1, 2):
            raise BadModelError(f"dimension {self.dim} not supported (use 1 or 2)")
        if self.fiber_map not in FIBER_RULES:
            raise BadModelError(f"unknown fiber map {self.fiber_map!r}")
        if len(set(self.boundary)) != len(self.boundary) or not self.boundary:
            raise BadModelError("boundary points must be distinct and nonempty")
        if self.fiber_map == "sign" and (self.dim != 1 or len(self.boundary) != 2):
            raise BadModelError("the sign fiber map needs d = 1 and two boundary points")
        if self.fiber_map == "constant" and len(self.boundary) != 1:
            raise BadModelError("the constant fiber map needs exactly one boundary point")
        if self.core_radius < 0:
            raise BadModelError("negative core radius")
        if self.truncation <= self.core_radius:
            # every fiber must be realized at the truncation scale
            raise BadModelError(
                f"truncation {self.truncation} leaves empty fibers (core radius {self.core_radius})"
            )
        for b in self.boundary:
            if not b or b.replace("-", "").replace(",", "").isdigit():
                raise BadModelError(f"boundary name {b!r} is empty or looks like a lattice point")
            if any(c.isspace() or c in "=:#|[]()" for c in b):
                raise BadModelError(f"boundary name {b!r} contains a reserved character")

    def with_truncation(self, L: int) -> "CompactificationModel":
        return replace(self, truncation=int(L))

    @cached_property
    def points(self) -> tuple[Point, ...]:
        rng = range(-self.truncation, self.truncation + 1)
        return tuple(itertools.product(rng, repeat=self.dim))

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(len(self.points), self.dim)

    @cached_property
    def index(self) -> dict[Point, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def radii(self) -> np.ndarray:
        return np.abs(self.coords).max(axis=1)

    @cached_property
    def fiber_index(self) -> np.ndarray:
        """Boundary index of each realized point, -1 on the core."""
        out = np.full(len(self.points), -1, dtype=np.int64)
        outer = self.radii > self.core_radius
        if self.fiber_map == "sign":
            out[outer] = np.where(self.coords[outer, 0] > 0, 1, 0)
        else:
            out[outer] = 0
        return out

    @property
    def units(self) -> tuple:
        """Realized unit space: lattice points, then boundary names."""
        return self.points + self.boundary

    def fiber(self, p: Point) -> str | None:
        i = self.fiber_index[self.index[tuple(p)]]
        return None if i < 0 else self.boundary[i]

    def fiber_points(self, n: str) -> tuple[Point, ...]:
        j = self.boundary.index(n)
        return tuple(self.points[i] for i in np.flatnonzero(self.fiber_index == j))

    def radius(self, p: Point) -> int:
        return int(max(abs(c) for c in p))

    def box(self, radius: int) -> frozenset:
        return frozenset(p for p in self.points if self.radius(p) <= radius)

    @cached_property
    def _neighbours(self) -> list[list[int]]:
        n_pts = len(self.points)
        nb: list[list[int]] = [[] for _ in range(n_pts + len(self.boundary))]
        for i, p in enumerate(self.points):
            for axis in range(self.dim):
                for s in (-1, 1):
                    q = list(p)
                    q[axis] += s
                    j = self.index.get(tuple(q))
                    if j is not None:
                        nb[i].append(j)
        # a boundary point is attached to the outermost realized layer of its fiber
        for j, _ in enumerate(self.boundary):
            b = n_pts + j
            for i in np.flatnonzero((self.fiber_index == j) & (self.radii == self.truncation)):
                nb[b].append(int(i))
                nb[int(i)].append(b)
        return nb

    def graph_distance(self, sources: Iterable[int]) -> np.ndarray:
        """BFS distance on the realized X from a set of unit indices (inf if unreachable)."""
        dist = np.full(len(self.units), np.inf)
        q = deque()
        for s in sources:
            dist[s] = 0
            q.append(s)
        nb = self._neighbours
        while q:
            a = q.popleft()
            for b in nb[a]:
                if dist[b] == np.inf:
                    dist[b] = dist[a] + 1
                    q.append(b)
        return dist

    def unit_index(self, x) -> int:
        if isinstance(x, str):
            return len(self.points) + self.boundary.index(x)
        return self.index[tuple(x)]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Base set ``A_{E,K} = (p^{-1}(E) minus K) u E`` of the compactified topology."""

    E: frozenset
    K: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "E", frozenset(self.E))
        object.__setattr__(self, "K", frozenset(tuple(k) for k in self.K))

    @classmethod
    def box(cls, cm: CompactificationModel, E: Iterable[str], radius: int) -> "NeighborhoodSpec":
        return cls(frozenset(E), cm.box(radius))

    def intersect(self, other: "NeighborhoodSpec") -> "NeighborhoodSpec":
        return NeighborhoodSpec(self.E & other.E, self.K | other.K)


def interior_mask(cm: CompactificationModel, spec: NeighborhoodSpec) -> np.ndarray:
    """Indicator of ``A^M_{E,K}`` on the realized lattice points."""
    unknown = spec.E - set(cm.boundary)
    if unknown:
        raise BadModelError(f"unknown boundary points {sorted(unknown)}")
    ids = [cm.boundary.index(n) for n in spec.E]
    mask = np.isin(cm.fiber_index, ids)
    if spec.K:
        inK = np.array([p in spec.K for p in cm.points], dtype=bool)
        mask &= ~inK
    return mask


def membership_neighborhood(cm: CompactificationModel, spec: NeighborhoodSpec, x) -> bool:
    if isinstance(x, str):
        if x not in cm.boundary:
            raise BadModelError(f"unknown boundary point {x!r}")
        return x in spec.E
    x = tuple(x)
    n = cm.fiber(x)
    return n is not None and n in spec.E and x not in spec.K


@dataclass(frozen=True)
class ContinuityResult:
    ok: bool
    witness: tuple | None
    radii: dict

    def __bool__(self):
        return self.ok


def continuity_check(
    cm: CompactificationModel,
    phi: Mapping | Callable,
    ladder: Iterable[float] = EPS_LADDER,
) -> ContinuityResult:
    """Fiber-limit continuity test for ``phi`` on the realized X.

    For every boundary point ``n`` and every ``eps`` in ``ladder`` a radius
    ``k <= L // 2`` must exist with ``|phi(m) - phi(n)| <= eps`` for all
    realized ``m`` over ``n`` with ``|m| > k``.  Continuity on M and N is
    automatic (both are discrete).  ``radii`` records the smallest such
    ``k``; a failure returns the witness ``(n, eps, m)``.
    """
    get = phi if callable(phi) else (lambda x: phi[x])
    vals = np.array([get(p) for p in cm.points], dtype=complex)
    kmax = cm.truncation // 2
    radii = {}
    for j, n in enumerate(cm.boundary):
        limit = complex(get(n))
        on = np.flatnonzero(cm.fiber_index == j)
        dev = np.abs(vals[on] - limit)
        r = cm.radii[on]
        for eps in ladder:
            bad = r[dev > eps]
            k = int(bad.max()) if len(bad) else cm.core_radius
            k = max(k, cm.core_radius)
            if k > kmax:
                tail = r > kmax
                worst = on[tail][np.argmax(dev[tail])]
                return ContinuityResult(False, (n, eps, cm.points[worst]), radii)
            radii[(n, eps)] = k
    return ContinuityResult(True, None, radii)


# -- band kernels -----------------------------------------------------------


def _offset(k, dim: int) -> tuple[int, ...]:
    k = (k,) if isinstance(k, (int, np.integer)) else tuple(int(c) for c in k)
    if len(k) != dim:
        raise BadModelError(f"offset {k} does not have {dim} coordinates")
    return k


@dataclass(frozen=True)
class Coefficient:
    """A coefficient profile ``m -> a_k(m)`` with known fiber limits.

    Kinds and parameters:

    * ``const``: ``(c,)``
    * ``fiber``: ``(core_value, ((n, v), ...))`` -- constant ``v`` on the fiber over ``n``
    * ``tanh``: ``(center, amplitude, scale)`` -- ``center + amplitude * tanh(m / scale)``, d = 1
    * ``table``: ``(((point, v), ...), default)`` -- listed values, ``default`` elsewhere
    * ``python``: ``(func, ((n, v), ...))`` -- vectorized callable on coordinates
    """

    kind: str
    params: tuple

    @classmethod
    def const(cls, c) -> "Coefficient":
        return cls("const", (complex(c),))

    @classmethod
    def fiber(cls, core, values: Mapping[str, complex]) -> "Coefficient":
        return cls("fiber", (complex(core), tuple((str(n), complex(v)) for n, v in values.items())))

    @classmethod
    def tanh(cls, center, amplitude, scale) -> "Coefficient":
        return cls("tanh", (complex(center), complex(amplitude), float(scale)))

    @classmethod
    def table(cls, values: Mapping[Point, complex], default=0.0) -> "Coefficient":
        items = tuple(sorted((tuple(p), complex(v)) for p, v in values.items()))
        return cls("table", (items, complex(default)))

    @classmethod
    def python(cls, func: Callable, limits: Mapping[str, complex]) -> "Coefficient":
        return cls("python", (func, tuple((str(n), complex(v)) for n, v in limits.items())))

    def values(self, cm: CompactificationModel, coords: np.ndarray | None = None) -> np.ndarray:
        """Coefficient at every realized point (or at the given coordinates of realized points)."""
        coords = cm.coords if coords is None else coords
        npts = len(coords)
        if self.kind == "const":
            return np.full(npts, self.params[0], dtype=complex)
        if self.kind == "fiber":
            core, table = self.params
            table = dict(table)
            fib = np.array([cm.fiber_index[cm.index[tuple(c)]] for c in coords]) if coords is not cm.coords else cm.fiber_index
            lut = np.array([table.get(n, np.nan) for n in cm.boundary] + [core], dtype=complex)
            if np.isnan(lut.real).any():
                raise BadModelError("fiber coefficient is missing a boundary point")
            return lut[fib]
        if self.kind == "tanh":
            if cm.dim != 1:
                raise BadModelError("tanh profiles are one-dimensional")
            c, a, s = self.params
            return c + a * np.tanh(coords[:, 0] / s)
        if self.kind == "table":
            items, default = self.params
            table = dict(items)
            return np.array([table.get(tuple(int(v) for v in c), default) for c in coords], dtype=complex)
        if self.kind == "python":
            return np.asarray(self.params[0](coords), dtype=complex).reshape(npts)
        raise BadModelError(f"unknown coefficient kind {self.kind!r}")

    def limit(self, cm: CompactificationModel, n: str) -> complex:
        if self.kind == "const":
            return self.params[0]
        if self.kind in ("fiber", "python"):
            table = dict(self.params[1])
            if n not in table:
                raise BadModelError(f"no limit declared at {n!r}")
            return table[n]
        if self.kind == "tanh":
            c, a, _ = self.params
            if cm.fiber_map != "sign":
                if a != 0:
                    raise BadModelError("tanh profile has no single limit over a one-point boundary")
                return c
            return c - a if n == cm.boundary[0] else c + a
        if self.kind == "table":
            return self.params[1]
        raise BadModelError(f"unknown coefficient kind {self.kind!r}")


@dataclass(frozen=True)
class BandKernel:
    """Finite-bandwidth kernel ``a_k(m)`` with boundary limits ``a_k(n)``.

    ``limits`` may override the limits derived from the coefficient forms;
    :meth:`check_limits` verifies they agree.  ``profile`` is a free-form
    convergence tag (``exact``, ``exponential:<rate>``, ``power:<exponent>``).
    """

    dim: int
    coefficients: Mapping[tuple[int, ...], Coefficient]
    limits: Mapping[tuple[str, tuple[int, ...]], complex] = field(default_factory=dict)
    profile: str = "exact"

    def __post_init__(self):
        coeffs = {}
        for k, c in dict(self.coefficients).items():
            coeffs[_offset(k, self.dim)] = c if isinstance(c, Coefficient) else Coefficient.const(c)
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))
        lims = {(str(n), _offset(k, self.dim)): complex(v) for (n, k), v in dict(self.limits).items()}
        object.__setattr__(self, "limits", dict(sorted(lims.items())))

    @classmethod
    def constant(cls, values: Mapping, dim: int = 1) -> "BandKernel":
        return cls(dim, {k: Coefficient.const(v) for k, v in values.items()})

    @property
    def bandwidth(self) -> int:
        return max((max(abs(c) for c in k) for k in self.coefficients), default=0)

    def limit(self, cm: CompactificationModel, n: str, k) -> complex:
        k = _offset(k, self.dim)
        if (n, k) in self.limits:
            return self.limits[(n, k)]
        c = self.coefficients.get(k)
        return 0j if c is None else c.limit(cm, n)

    def boundary_data(self, cm: CompactificationModel, n: str) -> dict[tuple[int, ...], complex]:
        if n not in cm.boundary:
            raise BadModelError(f"unknown boundary point {n!r}")
        return {k: self.limit(cm, n, k) for k in self.coefficients}

    def check_limits(self, cm: CompactificationModel, tol: float = 1e-12) -> None:
        """Raise :class:`BadModelError` if declared limits disagree with the forms."""
        if cm.dim != self.dim:
            raise BadModelError(f"kernel dimension {self.dim} != model dimension {cm.dim}")
        for (n, k), v in self.limits.items():
            if n not in cm.boundary:
                raise BadModelError(f"limit declared at unknown boundary point {n!r}")
            c = self.coefficients.get(k)
            derived = 0j if c is None else c.limit(cm, n)
            if abs(derived - v) > tol:
                raise BadModelError(f"declared limit {v} at ({n}, {k}) disagrees with profile limit {derived}")

    def is_selfadjoint(self, cm: CompactificationModel, tol: float = 1e-12) -> bool:
        """Hermiticity of the interior matrix and of every boundary symbol."""
        H = interior_operator(self, cm)
        if H.selfadjoint_defect() > tol:
            return False
        for n in cm.boundary:
            data = self.boundary_data(cm, n)
            for k, v in data.items():
                if abs(data.get(tuple(-c for c in k), 0j) - np.conj(v)) > tol:
                    return False
        return True


def _ball(dim: int, R: int) -> tuple[Point, ...]:
    return tuple(itertools.product(range(-R, R + 1), repeat=dim))


def _band_matrix(points: tuple[Point, ...], index: dict, offsets_values) -> sp.csr_matrix:
    n = len(points)
    rows, cols, vals = [], [], []
    coords = np.array(points, dtype=np.int64).reshape(n, -1)
    for k, v in offsets_values:
        target = coords - np.asarray(k)
        idx = np.array([index.get(tuple(t), -1) for t in target.tolist()], dtype=np.int64)
        ok = idx >= 0
        vv = np.broadcast_to(np.asarray(v, dtype=complex), (n,))[ok]
        nz = vv != 0
        rows.append(np.flatnonzero(ok)[nz])
        cols.append(idx[ok][nz])
        vals.append(vv[nz])
    if rows:
        rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
    if not np.any(M.data.imag):
        M = sp.csr_matrix(M.real)
    return M


def boundary_operator(
    bk: BandKernel, n: str, R: int, model: CompactificationModel | None = None
) -> OperatorMatrix:
    """Convolution by the boundary data at ``n``, compressed to the ball of radius ``R``.

    Entry ``(j, j')`` is ``a_{j - j'}(n)``.
    """
    if R < bk.bandwidth:
        raise RadiusError(f"radius {R} is smaller than the bandwidth {bk.bandwidth}")
    if model is None:
        model = _default_model(bk, n)
    data = bk.boundary_data(model, n)
    pts = _ball(bk.dim, R)
    index = {p: i for i, p in enumerate(pts)}
    return OperatorMatrix(pts, _band_matrix(pts, index, data.items()))


def _default_model(bk: BandKernel, n: str) -> CompactificationModel:
    if any(c.kind != "const" for c in bk.coefficients.values()) and not bk.limits:
        raise BadModelError("a compactification model is needed to evaluate boundary limits")
    return CompactificationModel(dim=bk.dim, boundary=(n,), fiber_map="constant", truncation=1)


def interior_operator(
    bk: BandKernel, cm: CompactificationModel, L: int | None = None
) -> OperatorMatrix:
    """``(H_0 u)(m) = sum_k a_k(m) u(m - k)`` on the window, entries leaving it dropped."""
    if L is not None:
        cm = cm.with_truncation(L)
    if cm.dim != bk.dim:
        raise BadModelError(f"kernel dimension {bk.dim} != model dimension {cm.dim}")
    values = [(k, c.values(cm)) for k, c in bk.coefficients.items()]
    return OperatorMatrix(cm.points, _band_matrix(cm.points, cm.index, values))


def _cyclic_step(vals: np.ndarray) -> float:
    step = 0.0
    for axis in range(vals.ndim):
        d = np.abs(vals - np.roll(vals, -1, axis=axis))
        step = max(step, float(d.max()))
    return step


def fourier_symbol_spectrum(
    bk: BandKernel,
    n: str,
    grid: int = DEFAULT_GRID,
    model: CompactificationModel | None = None,
    group: FiniteGroup | ZdTruncation | None = None,
) -> SpectrumSet:
    """Range of the symbol ``sum_k a_k(n) exp(i k.theta)`` on a ``grid^d`` torus sample.

    With a finite abelian ``group`` the offsets ``(g,)`` index group elements and
    the spectrum is the exact set of character values.
    """
    if isinstance(group, FiniteGroup):
        if not group.is_abelian:
            raise NotAbelianError("boundary group is not abelian; use boundary_operator")
        if model is None:
            model = _default_model(bk, n)
        data = {k[0]: v for k, v in bk.boundary_data(model, n).items()}
        return character_symbol_spectrum(data, group)
    if model is None:
        model = _default_model(bk, n)
    data = bk.boundary_data(model, n)
    theta = 2 * np.pi * np.arange(grid) / grid
    if bk.dim == 1:
        vals = np.zeros(grid, dtype=complex)
        for (k,), a in data.items():
            vals += a * np.exp(1j * k * theta)
    else:
        vals = np.zeros((grid, grid), dtype=complex)
        e = {}
        for (k1, k2), a in data.items():
            e1 = e.setdefault((0, k1), np.exp(1j * k1 * theta))
            e2 = e.setdefault((1, k2), np.exp(1j * k2 * theta))
            vals += a * np.outer(e1, e2)
    step = _cyclic_step(vals)
    if not np.any(np.abs(vals.imag) > 1e-12 * max(1.0, np.abs(vals).max())):
        vals = vals.real
    return SpectrumSet(vals.ravel(), "sampled-range", step)


def character_symbol_spectrum(values: Mapping[int, complex], group: FiniteGroup) -> SpectrumSet:
    """Spectrum of convolution by ``values`` on a finite abelian group, via characters."""
    if not group.is_abelian:
        raise NotAbelianError("character tables need an abelian group")
    f = np.zeros(group.order, dtype=complex)
    for g, v in values.items():
        f[g if isinstance(g, (int, np.integer)) else group.names.index(g)] += v
    return SpectrumSet(group.characters @ f, "exact-eigenvalues")


def group_convolution_operator(values: Mapping[int, complex], group: FiniteGroup) -> OperatorMatrix:
    """``(H u)(a) = sum_b f(a b^{-1}) u(b)`` on ``l^2`` of a finite group (counting measure)."""
    f = np.zeros(group.order, dtype=complex)
    for g, v in values.items():
        f[g if isinstance(g, (int, np.integer)) else group.names.index(g)] += v
    inv = group.inverses
    M = np.array([[f[group.mul(a, inv[b])] for b in range(group.order)] for a in range(group.order)])
    return OperatorMatrix(group.names, M)


# -- the truncated translation groupoid ------------------------------------------


@dataclass(frozen=True)
class CompactifiedGroupoid:
    """Finite groupoid realizing a compactification model, with transport data."""

    groupoid: FiniteGroupoid
    model: CompactificationModel
    boundary_radius: int

    @property
    def main_orbit(self) -> tuple[str, ...]:
        return tuple(point_label(p) for p in self.model.points)

    def unit_of(self, x) -> str:
        return x if isinstance(x, str) else point_label(x)

    def pair_arrow(self, m: Point, m2: Point) -> str:
        return f"({point_label(m)}|{point_label(m2)})"

    def boundary_arrow(self, n: str, k) -> str:
        return f"{n}#" + point_label(_offset(k, self.model.dim))


def build_compactified_groupoid(
    cm: CompactificationModel, boundary_radius: int | None = None
) -> CompactifiedGroupoid:
    """Pair groupoid on the realized window plus truncated ``Z^d`` isotropy at each boundary point.

    Counting Haar weights.  Boundary isotropy is a lattice ball of radius
    ``boundary_radius`` (default: the truncation), flagged as truncated.
    """
    R = cm.truncation if boundary_radius is None else int(boundary_radius)
    if R < 0:
        raise BadModelError("negative boundary radius")
    labels = [point_label(p) for p in cm.points]
    # pair groupoid with arrow ids (a|b)
    units = labels
    arrows, inverse, compose = [], {}, {}
    for a in units:
        for b in units:
            aid = f"({a}|{b})"
            arrows.append((aid, b, a))
            inverse[aid] = f"({b}|{a})"
            for c in units:
                compose[(aid, f"({b}|{c})")] = f"({a}|{c})"
    interior = FiniteGroupoid(units, arrows, inverse, compose)
    bundle = build_group_bundle(cm.boundary, ZdTruncation(cm.dim, R))
    return CompactifiedGroupoid(disjoint_union(interior, bundle), cm, R)


def band_kernel_on_groupoid(bk: BandKernel, cg: CompactifiedGroupoid) -> Kernel:
    """The groupoid kernel ``F``: ``F(m, m') = a_{m - m'}(m)`` and ``F(n, k) = a_k(n)``."""
    cm = cg.model
    g = cg.groupoid
    vals = {}
    for k, c in bk.coefficients.items():
        coeff = c.values(cm)
        for i, m in enumerate(cm.points):
            src = tuple(a - b for a, b in zip(m, k))
            if src in cm.index and coeff[i] != 0:
                vals[cg.pair_arrow(m, src)] = coeff[i]
        if max(abs(x) for x in k) <= cg.boundary_radius:
            for n in cm.boundary:
                v = bk.limit(cm, n, k)
                if v != 0:
                    vals[cg.boundary_arrow(n, k)] = v
    return Kernel.from_dict(g, vals)
