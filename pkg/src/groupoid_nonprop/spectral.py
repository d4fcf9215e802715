"""Spectra of normal matrices, continuous functional calculus, spectral sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import NotNormalError, NotSelfAdjointError
from .representations import NORMAL_TOL, OperatorMatrix

RESIDUAL_TOL = 1e-8
DEFAULT_GRID = 4096


@dataclass(frozen=True)
class BumpFunction:
    """Continuous piecewise-linear real function with compact support.

    ``nodes`` are ``(x, y)`` pairs with strictly increasing ``x``; the first
    and last ``y`` are 0 and the function vanishes outside ``[x_0, x_last]``.
    """

    nodes: tuple[tuple[float, float], ...]

    def __post_init__(self):
        nodes = tuple((float(x), float(y)) for x, y in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 2:
            raise ValueError("a bump function needs at least two nodes")
        xs = [x for x, _ in nodes]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("node abscissae must be strictly increasing")
        if nodes[0][1] != 0.0 or nodes[-1][1] != 0.0:
            raise ValueError("first and last node values must be 0")
        if not all(np.isfinite(v) for n in nodes for v in n):
            raise ValueError("node coordinates must be finite")

    @classmethod
    def hat(cls, a: float, b: float, height: float = 1.0) -> "BumpFunction":
        return cls(((a, 0.0), ((a + b) / 2, height), (b, 0.0)))

    @classmethod
    def trapezoid(cls, a, b, c, d, height: float = 1.0) -> "BumpFunction":
        return cls(((a, 0.0), (b, height), (c, height), (d, 0.0)))

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.nodes])

    @property
    def ys(self) -> np.ndarray:
        return np.array([y for _, y in self.nodes])

    @property
    def support(self) -> tuple[float, float]:
        return self.nodes[0][0], self.nodes[-1][0]

    @property
    def sup_abs(self) -> float:
        return float(np.abs(self.ys).max())

    @property
    def is_zero(self) -> bool:
        return self.sup_abs == 0.0

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys, left=0.0, right=0.0)


class SpectrumSet:
    """A finite set of complex points standing for a spectrum.

    ``kind`` is ``"exact-eigenvalues"`` (step 0) or ``"sampled-range"``, where
    ``step`` bounds the distance between neighbouring samples along the
    sampled curve; it is the resolution of every distance query.
    """

    KINDS = ("exact-eigenvalues", "sampled-range")

    def __init__(self, points, kind: str = "exact-eigenvalues", step: float = 0.0):
        if kind not in self.KINDS:
            raise ValueError(f"unknown spectrum kind {kind!r}")
        pts = np.asarray(points, dtype=complex).ravel()
        self.points = pts[np.lexsort((pts.imag, pts.real))]
        self.kind = kind
        self.step = float(step)

    @classmethod
    def sampled_interval(cls, a: float, b: float, n: int = DEFAULT_GRID) -> "SpectrumSet":
        pts = np.linspace(a, b, n)
        return cls(pts, "sampled-range", (b - a) / max(n - 1, 1))

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"SpectrumSet({len(self)} points, kind={self.kind!r}, step={self.step:.3g})"

    @property
    def is_real(self) -> bool:
        if not len(self.points):
            return True
        scale = max(1.0, float(np.abs(self.points).max()))
        return bool(np.all(np.abs(self.points.imag) <= 1e-12 * scale))

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self.points.real.min()), float(self.points.real.max())

    def components(self) -> list[tuple[float, float]]:
        """Connected components at the set's resolution (real sets only)."""
        if not self.is_real:
            raise ValueError("components() needs a real spectrum set")
        x = np.unique(self.points.real)
        if not len(x):
            return []
        tol = self.step * (1 + 1e-9) + 1e-12
        cuts = np.flatnonzero(np.diff(x) > tol)
        starts = np.r_[0, cuts + 1]
        ends = np.r_[cuts, len(x) - 1]
        return [(float(x[s]), float(x[e])) for s, e in zip(starts, ends)]

    def distance(self, z) -> np.ndarray:
        """Distance from each query point to the set."""
        return _nearest(np.atleast_1d(np.asarray(z, dtype=complex)), self.points)

    def hausdorff(self, other: "SpectrumSet") -> float:
        if not len(self.points) or not len(other.points):
            return float("inf")
        return float(
            max(_nearest(self.points, other.points).max(), _nearest(other.points, self.points).max())
        )


def _nearest(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not len(b):
        return np.full(len(a), np.inf)
    if np.all(a.imag == 0) and np.all(b.imag == 0):
        bs = np.sort(b.real)
        idx = np.searchsorted(bs, a.real)
        lo = bs[np.clip(idx - 1, 0, len(bs) - 1)]
        hi = bs[np.clip(idx, 0, len(bs) - 1)]
        return np.minimum(np.abs(a.real - lo), np.abs(a.real - hi))
    tree = cKDTree(np.c_[b.real, b.imag])
    dist, _ = tree.query(np.c_[a.real, a.imag])
    return dist


@dataclass
class SpectralDecomposition:
    """Eigenpairs of a normal matrix in the orthonormal (unitary) basis.

    ``vectors`` has orthonormal columns.  When ``window`` is set only the
    eigenvalues inside that closed real interval were computed, and
    :meth:`apply` is exact only for functions vanishing outside it.
    """

    values: np.ndarray
    vectors: np.ndarray
    basis: tuple
    weights: np.ndarray
    hermitian: bool
    window: tuple[float, float] | None = None
    residual: float = 0.0

    @property
    def complete(self) -> bool:
        return self.window is None

    def function_values(self, kappa: Callable, coordinate: str = "real") -> np.ndarray:
        if self.hermitian or coordinate == "real":
            return kappa(self.values.real)
        if coordinate == "imag":
            return kappa(self.values.imag)
        raise ValueError(f"coordinate must be 'real' or 'imag', got {coordinate!r}")

    def apply_values(self, phi: np.ndarray) -> OperatorMatrix:
        V = self.vectors
        B = (V * phi[None, :]) @ V.conj().T
        return OperatorMatrix.from_unitary(self.basis, B, self.weights)

    def apply(self, kappa: Callable, coordinate: str = "real") -> OperatorMatrix:
        return self.apply_values(self.function_values(kappa, coordinate))


def _bandwidth(B) -> int:
    if sp.issparse(B):
        C = B.tocoo()
        return int(np.abs(C.row - C.col).max()) if C.nnz else 0
    rows, cols = np.nonzero(B)
    return int(np.abs(rows - cols).max()) if len(rows) else 0


def _lower_band(B, b: int) -> np.ndarray:
    n = B.shape[0]
    real = np.isrealobj(B) if not sp.issparse(B) else np.isrealobj(B.data)
    if not real:
        data = B.data if sp.issparse(B) else B
        real = not np.any(np.imag(data))
    band = np.zeros((b + 1, n), dtype=float if real else complex)
    for k in range(b + 1):
        diag = B.diagonal(-k) if sp.issparse(B) else np.diagonal(B, -k)
        band[k, : n - k] = diag.real if real else diag
    return band


def _tridiagonal(B, vectors: bool):
    """Hermitian tridiagonal solve; complex off-diagonals are gauged to real ones."""
    diag = (B.diagonal() if sp.issparse(B) else np.diagonal(B)).real.astype(float)
    off = B.diagonal(-1) if sp.issparse(B) else np.diagonal(B, -1)
    off = np.asarray(off)
    phase = None
    if np.iscomplexobj(off) and np.any(off.imag):
        # D^* B D is real for D = diag(prod of off-diagonal phases)
        mag = np.abs(off)
        unit = np.where(mag > 0, off / np.where(mag > 0, mag, 1), 1.0)
        phase = np.r_[1.0 + 0j, np.cumprod(unit)]
        off = mag
    off = off.real.astype(float)
    if not vectors:
        return sla.eigh_tridiagonal(diag, off, eigvals_only=True), None
    w, V = sla.eigh_tridiagonal(diag, off)
    if phase is not None:
        V = V * phase[:, None]
    return w, V


def decompose(
    H: OperatorMatrix,
    window: tuple[float, float] | None = None,
    vectors: bool = True,
) -> SpectralDecomposition:
    """Eigendecomposition of a normal operator matrix.

    Self-adjoint matrices use a banded or dense Hermitian solver and may be
    restricted to eigenvalues in ``window``; other normal matrices use the
    complex Schur form, which is diagonal for normal input.

    Raises
    ------
    NotNormalError
        If the commutator ``[B, B*]`` exceeds the normality tolerance.
    """
    B = H.unitary()
    n = H.n
    if n == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0)), H.basis, H.weights, True, window)
    hermitian = H.is_selfadjoint()
    if not hermitian and not H.is_normal():
        raise NotNormalError(f"commutator norm {H.commutator_norm():.3e} exceeds tolerance")
    if hermitian:
        b = _bandwidth(B)
        if n >= 64 and b <= 1:
            w, V = _tridiagonal(B, vectors)
            if window is not None:
                keep = (w >= window[0] - 1e-12) & (w <= window[1] + 1e-12)
                w = w[keep]
                V = V[:, keep] if V is not None else None
        elif n >= 64 and b <= n // 8:
            kw = {}
            if window is not None:
                kw = dict(select="v", select_range=(window[0] - 1e-12, window[1] + 1e-12))
            band = _lower_band(B, b)
            if vectors:
                w, V = sla.eig_banded(band, lower=True, **kw)
            else:
                w, V = sla.eig_banded(band, lower=True, eigvals_only=True, **kw), None
        else:
            Bd = B.toarray() if sp.issparse(B) else np.asarray(B)
            if not np.any(np.imag(Bd)):
                Bd = Bd.real
            Bd = (Bd + Bd.conj().T) / 2
            kw = {}
            if window is not None:
                kw = dict(subset_by_value=(window[0] - 1e-12, window[1] + 1e-12))
            if vectors:
                w, V = sla.eigh(Bd, **kw)
            else:
                w, V = sla.eigh(Bd, eigvals_only=True, **kw), None
        values = np.asarray(w, dtype=float)
    else:
        if window is not None:
            raise NotSelfAdjointError("eigenvalue windows need a self-adjoint matrix")
        Bd = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=complex)
        T, V = sla.schur(Bd.astype(complex), output="complex")
        off = np.abs(np.triu(T, 1)).max() if n > 1 else 0.0
        if off > 1e-8 * max(1.0, np.abs(T).max()):
            raise NotNormalError(f"Schur form not diagonal (off-diagonal {off:.3e})")
        values = np.diag(T).copy()
    dec = SpectralDecomposition(values, V, H.basis, H.weights, hermitian, window)
    if vectors and V is not None and V.shape[1]:
        R = B @ V - V * values[None, :]
        dec.residual = float(np.linalg.norm(R, axis=0).max())
        scale = max(1.0, H.norm_bound())
        if dec.residual > RESIDUAL_TOL * scale:
            raise RuntimeError(f"eigensolver residual {dec.residual:.3e} too large")
    return dec


def spectrum(H: OperatorMatrix) -> SpectrumSet:
    """All eigenvalues of a normal matrix, with multiplicity."""
    dec = decompose(H, vectors=H.n <= 2048)
    return SpectrumSet(dec.values, "exact-eigenvalues")


def functional_calculus(
    kappa: Callable, H: OperatorMatrix, coordinate: str = "real"
) -> OperatorMatrix:
    """``kappa(H)``; for non-self-adjoint normal ``H`` kappa acts on one real coordinate."""
    return decompose(H).apply(kappa, coordinate)


def evolution(H: OperatorMatrix, t: float) -> OperatorMatrix:
    """The unitary ``exp(itH)`` of a self-adjoint matrix."""
    dec = decompose(H)
    if not dec.hermitian:
        raise NotSelfAdjointError("evolution needs a self-adjoint matrix")
    return dec.apply_values(np.exp(1j * t * dec.values))


def essential_spectrum_union(spectra: Sequence[SpectrumSet]) -> SpectrumSet:
    """Closed union of boundary spectra; resolution is the coarsest input step."""
    if not spectra:
        return SpectrumSet([], "sampled-range", 0.0)
    if len(spectra) == 1:
        return spectra[0]
    pts = np.unique(np.concatenate([s.points for s in spectra]))
    return SpectrumSet(pts, "sampled-range", max(s.step for s in spectra))


def support_gap(kappa: BumpFunction, S: SpectrumSet) -> float:
    """Distance between ``supp(kappa)`` and ``S`` (0 when they meet)."""
    if not len(S.points):
        return float("inf")
    a, b = kappa.support
    re = S.points.real
    dx = np.where(re < a, a - re, np.where(re > b, re - b, 0.0))
    return float(np.hypot(dx, S.points.imag).min())


def sup_on(kappa: BumpFunction, S: SpectrumSet) -> float:
    """``max |kappa|`` over the real parts of the points of ``S``."""
    return float(np.abs(kappa(S.points.real)).max()) if len(S.points) else 0.0
