"""Localization and non-propagation experiments on band models.

Pipeline for a model ``(X = M u N, H_0)`` and a quasi-orbit ``Q`` of boundary
points:

1. :func:`check_hypothesis` merges the boundary symbol spectra over ``Q`` and
   measures the gap to ``supp(kappa)``.
2. :func:`find_localization_neighborhood` builds ``f = kappa(H_L)``, cuts its
   tail toward ``Q`` (:func:`construct_psi`), reads off ``W = psi^{-1}(1, 2]``
   and reports the realized base set ``A_{E,K}`` with the static norm and the
   logged inequality chain.
3. :func:`propagation_sweep` evolves seeded probes and records the localized
   mass over a time grid.

All norms are operator norms in the vector representation at truncation L.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import Kernel, UnitFunction
from .boundary import (
    BandKernel,
    CompactificationModel,
    CompactifiedGroupoid,
    NeighborhoodSpec,
    fourier_symbol_spectrum,
    interior_mask,
    interior_operator,
)
from .errors import BadModelError, HypothesisError, NotSelfAdjointError, SeparationError
from .representations import OperatorMatrix, vector_rep
from .spectral import (
    DEFAULT_GRID,
    BumpFunction,
    SpectralDecomposition,
    SpectrumSet,
    decompose,
    essential_spectrum_union,
    support_gap,
)

log = logging.getLogger(__name__)

RAMP = 2
T_GRID = np.arange(0.0, 100.0 + 0.25, 0.5)
N_PROBES = 20


@dataclass(frozen=True)
class LatticeSystem:
    """A band kernel on a compactification model, with cached solves per truncation."""

    model: CompactificationModel
    kernel: BandKernel
    name: str = "model"

    def __post_init__(self):
        self.kernel.check_limits(self.model)

    def at(self, L: int) -> CompactificationModel:
        return self.model.with_truncation(L)

    def hamiltonian(self, L: int | None = None) -> OperatorMatrix:
        return _hamiltonian(self, self.model.truncation if L is None else int(L))

    def decomposition(self, L: int | None, window: tuple[float, float] | None) -> SpectralDecomposition:
        return _decomposition(self, self.model.truncation if L is None else int(L), window)

    def eigenvalues(self, L: int | None = None) -> np.ndarray:
        return _eigenvalues(self, self.model.truncation if L is None else int(L))

    def symbol(self, n: str, grid: int = DEFAULT_GRID) -> SpectrumSet:
        return fourier_symbol_spectrum(self.kernel, n, grid, model=self.model)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


@lru_cache(maxsize=8)
def _hamiltonian(system: LatticeSystem, L: int) -> OperatorMatrix:
    return interior_operator(system.kernel, system.model, L)


@lru_cache(maxsize=8)
def _decomposition(system: LatticeSystem, L: int, window) -> SpectralDecomposition:
    return decompose(_hamiltonian(system, L), window=window)


@lru_cache(maxsize=8)
def _eigenvalues(system: LatticeSystem, L: int) -> np.ndarray:
    return decompose(_hamiltonian(system, L), vectors=False).values


def _opnorm(X: np.ndarray) -> float:
    """Spectral norm through the smaller Gram matrix."""
    if X.size == 0:
        return 0.0
    G = X @ X.conj().T if X.shape[0] < X.shape[1] else X.conj().T @ X
    return float(np.sqrt(max(np.linalg.eigvalsh(G)[-1], 0.0)))


class _Factored:
    """``f = X V^*`` with ``V`` isometric, so ``|D f| = |D X|`` for diagonal ``D``."""

    def __init__(self, dec: SpectralDecomposition, phi: np.ndarray):
        self.V = dec.vectors
        keep = phi != 0
        self.X = dec.vectors[:, keep] * phi[keep][None, :]
        self.V = dec.vectors[:, keep]
        self.phi = phi[keep]
        self.values = dec.values[keep]
        self.hermitian = dec.hermitian

    @property
    def n(self):
        return self.X.shape[0]

    def left(self, w: np.ndarray) -> float:
        sel = np.flatnonzero(w)
        return _opnorm(self.X[sel] * w[sel, None])

    def right(self, w: np.ndarray) -> float:
        if self.hermitian:
            return self.left(w)
        sel = np.flatnonzero(w)
        return _opnorm(self.X @ (self.V[sel].conj().T * w[None, sel]))

    def left_exact(self, w: np.ndarray) -> float:
        sel = np.flatnonzero(w)
        Y = self.X[sel] * w[sel, None]
        return float(np.linalg.norm(Y, 2)) if Y.size else 0.0


class _Dense:
    def __init__(self, M: np.ndarray):
        self.M = np.asarray(M, dtype=complex)

    @property
    def n(self):
        return self.M.shape[0]

    def left(self, w):
        return _opnorm(self.M * w[:, None])

    def right(self, w):
        return _opnorm(self.M * w[None, :])

    left_exact = left


# -- hypothesis -------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    gap: float
    spectrum: SpectrumSet
    step: float
    Q: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.gap > self.step


def _check_Q(model: CompactificationModel, Q: Iterable[str]) -> tuple[str, ...]:
    Q = tuple(Q)
    if not Q:
        raise BadModelError("empty quasi-orbit")
    unknown = [n for n in Q if n not in model.boundary]
    if unknown:
        raise BadModelError(f"unknown boundary points {unknown}")
    return Q


def check_hypothesis(
    kappa: BumpFunction, Q: Iterable[str], system: LatticeSystem, grid: int = DEFAULT_GRID
) -> HypothesisReport:
    """Gap between ``supp(kappa)`` and the union of boundary symbol spectra over ``Q``.

    A gap not exceeding the sampling step cannot be certified and raises
    :class:`HypothesisError`.
    """
    Q = _check_Q(system.model, Q)
    S = essential_spectrum_union([system.symbol(n, grid) for n in Q])
    gap = support_gap(kappa, S)
    rep = HypothesisReport(gap, S, S.step, Q)
    if not rep.ok:
        raise HypothesisError(
            f"supp(kappa) = {kappa.support} meets the boundary spectrum over {list(Q)} "
            f"(gap {gap:.4g}, grid step {S.step:.2g})",
            gap=gap,
        )
    return rep


# -- the cutoff psi -----------------------------------------------------------


@dataclass
class PsiConstruction:
    """Discrete Urysohn cutoff on the realized X (points, then boundary)."""

    values: np.ndarray
    radius: int
    tail: float
    S0: np.ndarray
    dist_A: np.ndarray
    psi_norm: float
    bound: float

    @property
    def W(self) -> np.ndarray:
        return self.values > 1.0

    def as_unit_function(self, cg: CompactifiedGroupoid) -> UnitFunction:
        cm = cg.model
        g = cg.groupoid
        out = np.zeros(g.n_units, dtype=complex)
        for i, x in enumerate(cm.units):
            out[g.unit(cg.unit_of(x))] = self.values[i]
        return UnitFunction(g, out)


def _psi(cm: CompactificationModel, op, A_idx: Sequence[int], eps: float, ramp: int = RAMP) -> PsiConstruction:
    npts = len(cm.points)
    dA = cm.graph_distance(A_idx)
    dM = dA[:npts]
    finite = dM[np.isfinite(dM)]
    rmax = int(finite.max()) if len(finite) else 0

    def tail(r: int) -> float:
        q = (dM <= r).astype(float)
        return op.left(q) + op.right(q)

    budget = eps / 4
    # largest r with tail(r) <= eps/4; tail is monotone in r
    lo, hi = 0, None
    r = 1
    while r <= rmax:
        if tail(r) <= budget:
            lo, r = r, 2 * r
        else:
            hi = r
            break
    if hi is None:
        lo = rmax if tail(rmax) <= budget else lo
        hi = rmax + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) <= budget:
            lo = mid
        else:
            hi = mid
    r = lo
    if r + 1 < ramp:
        raise SeparationError(
            f"the eps/4 tail cut of kappa(H) reaches the boundary (tail {tail(1):.3g} > {budget:.3g}) "
            f"at truncation {cm.truncation}",
            truncation=cm.truncation,
        )
    S0 = dM > r
    if np.any(S0):
        dS = cm.graph_distance(np.flatnonzero(S0))
    else:
        dS = np.full(len(cm.units), np.inf)
    values = np.minimum(2.0, 2.0 * dS / ramp)
    psiM = values[:npts]
    pn = op.left(psiM)
    return PsiConstruction(values, r, tail(r), S0, dA, pn, pn + op.right(psiM))


def construct_psi(
    eps: float,
    A: Iterable[str],
    f: Kernel | SpectralDecomposition | OperatorMatrix,
    cm: CompactificationModel | CompactifiedGroupoid,
    kappa: Callable | None = None,
    ramp: int = RAMP,
) -> PsiConstruction:
    """Cutoff ``psi: X -> [0, 2]`` with ``psi = 2`` on ``A`` and ``|psi f| + |f psi| <= eps``.

    ``f`` is cut to ``f_0 = (1 - Q_r) f (1 - Q_r)`` where ``Q_r`` projects onto
    the lattice points within graph distance ``r`` of ``A``; ``r`` is the
    largest radius with ``|Q_r f| + |f Q_r| <= eps/4``.  ``psi`` vanishes on
    ``S_0`` (points farther than ``r``) and rises linearly over ``ramp``
    graph steps.

    ``f`` may be a kernel on the compactified groupoid (its interior part is
    read through the vector representation), an operator matrix on the
    lattice points, or a decomposition together with ``kappa``.

    Raises
    ------
    SeparationError
        If no positive cut radius meets the budget at this truncation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(cm, CompactifiedGroupoid):
        cg, cm = cm, cm.model
        if isinstance(f, Kernel):
            f = vector_rep(f, cg.main_orbit[0])
            order = [f.basis.index(lbl) for lbl in cg.main_orbit]
            f = OperatorMatrix(cg.main_orbit, f.dense()[np.ix_(order, order)])
    if isinstance(f, SpectralDecomposition):
        if kappa is None:
            raise ValueError("a decomposition needs kappa")
        op = _Factored(f, f.function_values(kappa))
    elif isinstance(f, OperatorMatrix):
        op = _Dense(f.unitary().toarray() if f.is_sparse else f.unitary())
    else:
        op = _Dense(np.asarray(f))
    if op.n != len(cm.points):
        raise BadModelError("operator size does not match the realized lattice")
    A = tuple(A)
    idx = [cm.unit_index(a) for a in A]
    return _psi(cm, op, idx, eps, ramp)


# -- localization ----------------------------------------------------------------


@dataclass
class LocalizationResult:
    eps: float
    L: int
    Q: tuple[str, ...]
    E: tuple[str, ...]
    K_radius: int
    spec: NeighborhoodSpec
    static_norm: float
    w0_norm: float
    psi_norm: float
    psi_bound: float
    chain: dict
    gap: float
    route: str
    mask: np.ndarray
    psi: PsiConstruction | None
    allowance: float | None = None
    _op: object = field(default=None, repr=False)

    @property
    def chain_holds(self) -> bool:
        c = self.chain
        tol = 1e-12
        return (
            c["static_norm"] <= c["w0_norm"] + tol
            and c["w0_norm"] <= c["psi_norm"] + tol
            and c["psi_norm"] <= c["eps"] + tol
        )


def _kappa_op(system: LatticeSystem, kappa: BumpFunction, L: int) -> _Factored:
    H = system.hamiltonian(L)
    if not H.is_selfadjoint():
        raise NotSelfAdjointError("localization experiments need a self-adjoint H")
    dec = system.decomposition(L, kappa.support)
    return _Factored(dec, dec.function_values(kappa))


def _spec_from_W(cm: CompactificationModel, W: np.ndarray) -> tuple[tuple[str, ...], int]:
    npts = len(cm.points)
    E = tuple(n for j, n in enumerate(cm.boundary) if W[npts + j])
    fib = np.isin(cm.fiber_index, [cm.boundary.index(n) for n in E])
    outside = fib & ~W[:npts]
    K = int(cm.radii[outside].max()) if np.any(outside) else cm.core_radius
    return E, max(K, cm.core_radius)


def find_localization_neighborhood(
    eps: float,
    kappa: BumpFunction,
    Q: Iterable[str],
    system: LatticeSystem,
    L: int | None = None,
    allowance: bool = False,
    grid: int = DEFAULT_GRID,
) -> LocalizationResult:
    """Neighborhood ``W`` of ``Q`` with ``|1_{W_0} kappa(H_L)| <= eps``.

    The returned ``(E, K_radius)`` describe the base set ``A_{E,K}`` with
    ``K`` the lattice box of that radius; ``static_norm`` is measured on its
    interior part.  ``chain`` logs ``static <= |1_{W_0} f| <= |psi|_M f| <= eps``
    together with ``sqrt|f 1_W f|``.  With ``allowance`` the same ``(E, K)``
    is re-measured at ``2L`` and the difference is reported.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    L = system.model.truncation if L is None else int(L)
    Q = _check_Q(system.model, Q)
    gap = check_hypothesis(kappa, Q, system, grid).gap
    cm = system.at(L)
    npts = len(cm.points)

    if kappa.is_zero or eps >= 2 * kappa.sup_abs:
        # a priori route: psi = 2 everywhere, W = X
        route = "zero" if kappa.is_zero else "a-priori"
        op = _kappa_op(system, kappa, L) if not kappa.is_zero else None
        W = np.ones(len(cm.units), dtype=bool)
        E, K = _spec_from_W(cm, W)
        spec = NeighborhoodSpec(frozenset(E), cm.box(K))
        mask = interior_mask(cm, spec)
        full = op.left_exact(np.ones(npts)) if op else 0.0
        static = op.left_exact(mask.astype(float)) if op else 0.0
        chain = dict(static_norm=static, w0_norm=full, psi_norm=2 * full, eps=eps, sqrt_kWk=full)
        res = LocalizationResult(eps, L, Q, E, K, spec, static, full, 2 * full, 4 * full, chain, gap, route, mask, None)
    else:
        op = _kappa_op(system, kappa, L)
        psi = _psi(cm, op, [cm.unit_index(n) for n in Q], eps)
        W = psi.W
        E, K = _spec_from_W(cm, W)
        spec = NeighborhoodSpec(frozenset(E), cm.box(K))
        mask = interior_mask(cm, spec)
        static = op.left_exact(mask.astype(float))
        w0 = op.left_exact(W[:npts].astype(float))
        sqrt_kwk = float(np.sqrt(_opnorm(op.X[W[:npts]].conj().T @ op.X[W[:npts]]))) if W[:npts].any() else 0.0
        chain = dict(static_norm=static, w0_norm=w0, psi_norm=psi.psi_norm, eps=eps, sqrt_kWk=sqrt_kwk)
        res = LocalizationResult(
            eps, L, Q, E, K, spec, static, w0, psi.psi_norm, psi.bound, chain, gap, "urysohn", mask, psi
        )
    res._op = op
    log.info(
        "L=%d eps=%g E=%s K=%d: static %.3e <= |1_W0 f| %.3e <= |psi f| %.3e <= eps %.3g; sqrt|f1_Wf| %.3e",
        L, eps, list(E), res.K_radius, res.chain["static_norm"], res.chain["w0_norm"],
        res.chain["psi_norm"], eps, res.chain["sqrt_kWk"],
    )
    if allowance:
        res.allowance = abs(static_norm_at(system, kappa, res.spec, 2 * L) - res.static_norm)
    return res


def static_norm_at(system: LatticeSystem, kappa: BumpFunction, spec: NeighborhoodSpec, L: int) -> float:
    """``|1_{A^M_{E,K}} kappa(H_L)|`` for a fixed base set at truncation ``L``."""
    cm = system.at(L)
    if kappa.is_zero:
        return 0.0
    op = _kappa_op(system, kappa, L)
    return op.left_exact(interior_mask(cm, spec).astype(float))


# -- time evolution ------------------------------------------------------------------


@dataclass
class SweepResult:
    t: np.ndarray
    series: np.ndarray
    per_probe: np.ndarray
    seed: int | None

    @property
    def max(self) -> float:
        return float(self.series.max()) if self.series.size else 0.0


def make_probes(n: int, count: int = N_PROBES, seed: int = 0) -> np.ndarray:
    """Seeded complex Gaussian probes, normalized, as columns."""
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))
    return U / np.linalg.norm(U, axis=0)[None, :]


def propagation_sweep(
    loc: LocalizationResult,
    probes: int | np.ndarray = N_PROBES,
    t_grid: Sequence[float] | None = None,
    seed: int = 0,
) -> SweepResult:
    """``|1_{W_0} exp(itH) kappa(H) u| / |u|`` over the time grid and the probes.

    ``series[i]`` is the maximum over probes at ``t_grid[i]``.
    """
    op = loc._op
    t = T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if op is None:
        # kappa = 0: every localized mass vanishes
        k = probes if isinstance(probes, int) else np.atleast_2d(np.asarray(probes).T).shape[0]
        z = np.zeros((len(t), k))
        return SweepResult(t, np.zeros(len(t)), z, seed)
    if not op.hermitian:
        raise NotSelfAdjointError("propagation needs a self-adjoint H")
    if isinstance(probes, (int, np.integer)):
        U = make_probes(op.n, int(probes), seed)
    else:
        U = np.asarray(probes, dtype=complex)
        if U.ndim == 1:
            U = U[:, None]
        seed = None
    norms = np.linalg.norm(U, axis=0)
    C = (op.V.conj().T @ U) * op.phi[:, None]  # kappa(lambda) <v, u>, k x p
    XW = op.V[loc.mask]
    G = XW.conj().T @ XW
    out = np.empty((len(t), U.shape[1]))
    for i, ti in enumerate(t):
        Z = C * np.exp(1j * ti * op.values)[:, None]
        q = np.einsum("ij,ij->j", Z.conj(), G @ Z).real
        out[i] = np.sqrt(np.maximum(q, 0.0)) / norms
    return SweepResult(t, out.max(axis=1), out, seed)


# -- ideal membership and essential spectrum --------------------------------------


def ideal_membership_residual(
    kappa: BumpFunction,
    system: LatticeSystem,
    Q: Iterable[str],
    L: int | None = None,
    radii: Sequence[int] | None = None,
) -> dict[int, float]:
    """``|1_{p^{-1}(Q), |m| > rho} kappa(H_L)|`` along a radius ladder.

    Small values say that ``kappa(H_L)`` lives away from the ``Q`` fibers,
    the finite counterpart of membership in the ideal of ``X`` minus ``Q``.
    """
    L = system.model.truncation if L is None else int(L)
    Q = _check_Q(system.model, Q)
    cm = system.at(L)
    if radii is None:
        radii = [r for r in (2**j for j in range(20)) if r < L]
    if kappa.is_zero:
        return {int(r): 0.0 for r in radii}
    op = _kappa_op(system, kappa, L)
    fib = np.isin(cm.fiber_index, [cm.boundary.index(n) for n in Q])
    return {int(r): op.left_exact((fib & (cm.radii > r)).astype(float)) for r in radii}


@dataclass
class OutlierReport:
    L: int
    outliers: np.ndarray
    outliers_2L: np.ndarray | None
    max_distance: float
    tol: float

    @property
    def stable(self) -> bool:
        if self.outliers_2L is None:
            return True
        if len(self.outliers) != len(self.outliers_2L):
            return False
        return bool(np.all(np.abs(np.sort(self.outliers) - np.sort(self.outliers_2L)) <= self.tol))


def discrete_outliers(
    system: LatticeSystem,
    L: int | None = None,
    tol: float = 0.05,
    doubling: bool = True,
    grid: int = DEFAULT_GRID,
) -> OutlierReport:
    """Eigenvalues of ``H_L`` farther than ``tol`` from the union of all boundary symbol spectra."""
    L = system.model.truncation if L is None else int(L)
    S = essential_spectrum_union([system.symbol(n, grid) for n in system.model.boundary])

    def far(LL):
        ev = system.eigenvalues(LL)
        d = S.distance(ev)
        return ev[d > tol], float(d.max(initial=0.0))

    out, dmax = far(L)
    out2 = far(2 * L)[0] if doubling else None
    return OutlierReport(L, out, out2, dmax, tol)


# -- experiment report -------------------------------------------------------------


@dataclass
class ExperimentReport:
    run_id: str
    model: str
    L: int
    Q: tuple[str, ...]
    kappa: tuple
    eps_target: float
    E: tuple[str, ...]
    K_radius: int
    static_norm: float
    sweep_max: float
    gap: float
    runtime_s: float
    chain: dict
    series: dict
    seed: int | None
    allowance: float | None = None

    @property
    def met(self) -> bool:
        return self.static_norm <= self.eps_target

    @property
    def dominated(self) -> bool:
        return self.sweep_max <= self.static_norm + 1e-10


def run_experiment(
    system: LatticeSystem,
    kappa: BumpFunction,
    Q: Iterable[str],
    eps: float,
    L: int | None = None,
    t_grid: Sequence[float] | None = None,
    probes: int = N_PROBES,
    seed: int = 0,
    run_id: str = "run",
    allowance: bool = False,
) -> ExperimentReport:
    start = time.perf_counter()
    loc = find_localization_neighborhood(eps, kappa, Q, system, L, allowance=allowance)
    sw = propagation_sweep(loc, probes, t_grid, seed)
    runtime = time.perf_counter() - start
    return ExperimentReport(
        run_id=run_id,
        model=system.name,
        L=loc.L,
        Q=loc.Q,
        kappa=kappa.nodes,
        eps_target=eps,
        E=loc.E,
        K_radius=loc.K_radius,
        static_norm=loc.static_norm,
        sweep_max=sw.max,
        gap=loc.gap,
        runtime_s=runtime,
        chain=dict(loc.chain),
        series={"t": sw.t.tolist(), "max_over_probes": sw.series.tolist()},
        seed=sw.seed,
        allowance=loc.allowance,
    )
