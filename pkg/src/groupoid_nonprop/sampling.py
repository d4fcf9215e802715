"""Random finite groupoids and kernels for property tests and benchmarks."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebra import Kernel, UnitFunction
from .groupoid import FiniteGroupoid, disjoint_union, transitive_groupoid
from .groups import FiniteGroup, cyclic, direct_product, symmetric3

_GROUPS = ("C1", "C2", "C3", "C4", "C5", "C6", "K4", "S3")


def _group(name: str) -> FiniteGroup | None:
    if name == "C1":
        return None
    if name == "K4":
        return direct_product(cyclic(2), cyclic(2))
    if name == "S3":
        return symmetric3()
    return cyclic(int(name[1:]))


def _order(name: str) -> int:
    return {"K4": 4, "S3": 6}.get(name) or int(name[1:])


def random_transitive(
    rng: np.random.Generator, n_units: int, group: str = "C1", exact: bool = False, prefix: str = "u"
) -> FiniteGroupoid:
    """``units x G x units`` with random positive masses per range unit."""
    units = [f"{prefix}{i}" for i in range(n_units)]
    if exact:
        w = {u: Fraction(int(rng.integers(1, 6)), int(rng.integers(1, 4))) for u in units}
    else:
        w = {u: float(rng.uniform(0.25, 4.0)) for u in units}
    return transitive_groupoid(units, _group(group), w)


def random_groupoid(
    rng: np.random.Generator,
    max_units: int = 12,
    max_arrows: int = 60,
    exact: bool = False,
) -> FiniteGroupoid:
    """Disjoint union of random transitive groupoids within the size limits.

    Every finite groupoid is of this form up to isomorphism, so sampling
    orbit sizes and isotropy groups covers all shapes.
    """
    parts = []
    units = arrows = 0
    while True:
        room_u = max_units - units
        if room_u <= 0:
            break
        choices = []
        for name in _GROUPS:
            for k in range(1, room_u + 1):
                if arrows + k * k * _order(name) <= max_arrows:
                    choices.append((k, name))
        if not choices:
            break
        k, name = choices[int(rng.integers(len(choices)))]
        parts.append(random_transitive(rng, k, name, exact, prefix=f"o{len(parts)}u"))
        units += k
        arrows += k * k * _order(name)
        if rng.random() < 0.35:
            break
    return disjoint_union(*parts)


def random_kernel(
    rng: np.random.Generator, g: FiniteGroupoid, density: float = 0.6, exact: bool = False
) -> Kernel:
    mask = rng.random(g.n_arrows) < density
    if exact:
        vals = [Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) if m else Fraction(0) for m in mask]
        return Kernel(g, np.array(vals, dtype=object))
    vals = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    return Kernel(g, np.where(mask, vals, 0))


def random_unit_function(rng: np.random.Generator, g: FiniteGroupoid) -> UnitFunction:
    return UnitFunction(g, rng.standard_normal(g.n_units) + 1j * rng.standard_normal(g.n_units))
