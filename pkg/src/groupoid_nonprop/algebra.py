"""The convolution *-algebra of a finite groupoid.

Kernels are dense value vectors over the parent's arrows (absent = 0).  Float
kernels are ``complex128``; exact kernels hold ``Fraction`` objects and use
the pure Python loops, so algebraic identities can be checked without
rounding.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from . import _backend
from .errors import ParentMismatchError
from .groupoid import FiniteGroupoid, kept_arrows, reduce

ATOL = 1e-12


def _same_parent(a: FiniteGroupoid, b: FiniteGroupoid):
    if a is not b and a != b:
        raise ParentMismatchError("operands live on different groupoids")


def _promote(x: np.ndarray, y: np.ndarray) -> np.dtype:
    if x.dtype == object and y.dtype == object:
        return np.dtype(object)
    return np.dtype(complex)


class Kernel:
    """A complex function on the arrows of ``parent``."""

    __slots__ = ("parent", "values")
    __hash__ = None

    def __init__(self, parent: FiniteGroupoid, values):
        values = np.asarray(values)
        if values.dtype != object:
            values = values.astype(complex, copy=False)
        if values.shape != (parent.n_arrows,):
            raise ValueError(
                f"kernel needs {parent.n_arrows} values, got shape {values.shape}"
            )
        self.parent = parent
        self.values = values

    @classmethod
    def zeros(cls, g: FiniteGroupoid, exact: bool = False) -> "Kernel":
        if exact:
            return cls(g, np.array([Fraction(0)] * g.n_arrows, dtype=object))
        return cls(g, np.zeros(g.n_arrows, dtype=complex))

    @classmethod
    def from_dict(cls, g: FiniteGroupoid, values: Mapping[str, Number], exact: bool = False):
        k = cls.zeros(g, exact)
        for aid, v in values.items():
            k.values[g.arrow(aid)] = Fraction(v) if exact else v
        return k

    @classmethod
    def delta(cls, g: FiniteGroupoid, arrow: str, value=1, exact: bool = False):
        return cls.from_dict(g, {arrow: value}, exact)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(self.parent.arrows[i].id for i in self.support_indices())

    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(np.array([v != 0 for v in self.values], dtype=bool))

    def to_dict(self) -> dict[str, Number]:
        return {self.parent.arrows[i].id: self.values[i] for i in self.support_indices()}

    def __getitem__(self, arrow: str):
        return self.values[self.parent.arrow(arrow)]

    def _binary(self, other, op):
        _same_parent(self.parent, other.parent)
        dt = _promote(self.values, other.values)
        return Kernel(self.parent, op(self.values.astype(dt), other.values.astype(dt)))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return Kernel(self.parent, -self.values)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Kernel(self.parent, self.values * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return convolve(self, other)

    def isclose(self, other: "Kernel", atol: float = ATOL) -> bool:
        _same_parent(self.parent, other.parent)
        diff = self.values - other.values
        return bool(all(abs(v) <= atol for v in diff))

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        try:
            return self.isclose(other)
        except ParentMismatchError:
            return False

    def __repr__(self):
        return f"Kernel(support={len(self.support_indices())}/{self.parent.n_arrows})"


class UnitFunction:
    """A complex function on the units of ``parent`` (an element of C(X))."""

    __slots__ = ("parent", "values")
    __hash__ = None

    def __init__(self, parent: FiniteGroupoid, values):
        values = np.asarray(values)
        if values.dtype != object:
            values = values.astype(complex, copy=False)
        if values.shape != (parent.n_units,):
            raise ValueError(f"unit function needs {parent.n_units} values")
        self.parent = parent
        self.values = values

    @classmethod
    def constant(cls, g: FiniteGroupoid, c=1.0):
        return cls(g, np.full(g.n_units, c, dtype=object if isinstance(c, Fraction) else complex))

    @classmethod
    def from_dict(cls, g: FiniteGroupoid, values: Mapping[str, Number], default=0.0):
        out = np.full(g.n_units, default, dtype=complex)
        for u, v in values.items():
            out[g.unit(u)] = v
        return cls(g, out)

    @classmethod
    def indicator(cls, g: FiniteGroupoid, units: Iterable[str]):
        return cls.from_dict(g, {u: 1.0 for u in units})

    def __getitem__(self, unit: str):
        return self.values[self.parent.unit(unit)]

    def to_dict(self) -> dict[str, Number]:
        return dict(zip(self.parent.units, self.values.tolist()))

    def __eq__(self, other):
        if not isinstance(other, UnitFunction):
            return NotImplemented
        if self.parent is not other.parent and self.parent != other.parent:
            return False
        return bool(all(abs(v) <= ATOL for v in self.values - other.values))


def _left_weights(g: FiniteGroupoid, exact: bool) -> np.ndarray:
    if exact:
        return np.array([g.haar[j] for j in g.inv.tolist()], dtype=object)
    return g.haar_float[g.inv]


def convolve(f: Kernel, g: Kernel) -> Kernel:
    """``(f * g)(xi) = sum over xi = eta zeta of f(eta) g(zeta) lambda^{r(xi)}(eta)``."""
    _same_parent(f.parent, g.parent)
    G = f.parent
    dt = _promote(f.values, g.values)
    exact = dt == object
    out = Kernel.zeros(G, exact=exact).values
    left, right, prod = G.pairs
    _backend.convolve_pairs(
        left, right, prod, f.values.astype(dt), g.values.astype(dt), _left_weights(G, exact), out
    )
    return Kernel(G, out)


def involute(f: Kernel) -> Kernel:
    vals = f.values[f.parent.inv]
    if f.exact:
        return Kernel(f.parent, np.array([v.conjugate() for v in vals], dtype=object))
    return Kernel(f.parent, np.conj(vals))


def hahn_norm(f: Kernel):
    """Max over units of the source-fiber L1 norms of ``f`` and of ``f o inv``.

    Exact for Fraction kernels on groupoids with rational weights.
    """
    G = f.parent
    if f.exact and G.is_exact:
        a = [Fraction(0)] * G.n_units
        b = [Fraction(0)] * G.n_units
        for i in range(G.n_arrows):
            x = G.d[i]
            a[x] += abs(f.values[i]) * G.haar[i]
            b[x] += abs(f.values[G.inv[i]]) * G.haar[i]
        return max(max(a), max(b)) if G.n_units else Fraction(0)
    absf = np.abs(f.values.astype(complex))
    w = G.haar_float
    a = np.bincount(G.d, weights=absf * w, minlength=G.n_units)
    b = np.bincount(G.d, weights=absf[G.inv] * w, minlength=G.n_units)
    return float(max(a.max(initial=0.0), b.max(initial=0.0)))


def cx_action(psi: UnitFunction, f: Kernel, side: str = "left") -> Kernel:
    """Multiply ``f`` by ``psi o r`` (left) or ``psi o d`` (right)."""
    _same_parent(psi.parent, f.parent)
    G = f.parent
    if side == "left":
        factor = psi.values[G.r]
    elif side == "right":
        factor = psi.values[G.d]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    dt = _promote(f.values, factor)
    return Kernel(G, f.values.astype(dt) * factor.astype(dt))


def restrict(f: Kernel, A: Iterable[str]) -> Kernel:
    """Restriction of ``f`` to the reduction over the invariant set ``A``."""
    A = frozenset(A)
    sub = reduce(f.parent, A)
    if sub is f.parent:
        return f
    return Kernel(sub, f.values[kept_arrows(f.parent, A)])


def extend_by_zero(f: Kernel, g: FiniteGroupoid) -> Kernel:
    """Embed a kernel on a reduction of ``g`` into ``g`` (value 0 elsewhere)."""
    out = Kernel.zeros(g, exact=f.exact)
    for i, a in enumerate(f.parent.arrows):
        out.values[g.arrow(a.id)] = f.values[i]
    return out
