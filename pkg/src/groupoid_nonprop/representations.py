"""Regular and vector representations as labelled matrices.

An :class:`OperatorMatrix` acts on ``l^2(basis; weights)``.  Entries are given
in the delta basis; the weighted inner product is handled by the similarity
``B = W^{1/2} A W^{-1/2}``, after which all linear algebra is standard.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _backend
from .algebra import Kernel, UnitFunction, _left_weights
from .errors import NotPrincipalError, ParentMismatchError
from .groupoid import FiniteGroupoid

NORMAL_TOL = 1e-10


class OperatorMatrix:
    """Square matrix with labelled basis and positive basis weights.

    ``entries`` may be a dense array or a scipy sparse matrix (large banded
    operators are kept sparse).
    """

    __slots__ = ("basis", "entries", "weights")

    def __init__(self, basis: Sequence, entries, weights=None):
        self.basis = tuple(basis)
        n = len(self.basis)
        if sp.issparse(entries):
            entries = sp.csr_matrix(entries)
        else:
            entries = np.asarray(entries)
        if entries.shape != (n, n):
            raise ValueError(f"entries shape {entries.shape} does not match basis size {n}")
        self.entries = entries
        self.weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        if self.weights.shape != (n,) or np.any(self.weights <= 0):
            raise ValueError("weights must be positive, one per basis label")

    @classmethod
    def from_unitary(cls, basis, B, weights=None) -> "OperatorMatrix":
        """Build from the matrix in the orthonormal basis ``delta_i / sqrt(w_i)``."""
        if weights is None:
            return cls(basis, B)
        s = np.sqrt(np.asarray(weights, dtype=float))
        if sp.issparse(B):
            A = sp.diags(1 / s) @ B @ sp.diags(s)
        else:
            A = B / s[:, None] * s[None, :]
        return cls(basis, A, weights)

    @property
    def n(self) -> int:
        return len(self.basis)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    @property
    def has_unit_weights(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def dense(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else self.entries

    def unitary(self):
        """The operator in an orthonormal basis (dense or sparse like ``entries``)."""
        if self.has_unit_weights:
            return self.entries
        s = np.sqrt(self.weights)
        if self.is_sparse:
            return sp.diags(s) @ self.entries @ sp.diags(1 / s)
        return self.entries * s[:, None] / s[None, :]

    def adjoint(self) -> "OperatorMatrix":
        B = self.unitary()
        return OperatorMatrix.from_unitary(self.basis, B.conj().T, self.weights)

    def norm(self) -> float:
        """Operator norm on the weighted l^2 space."""
        B = self.unitary()
        if sp.issparse(B):
            if self.n <= 512:
                return float(np.linalg.norm(B.toarray(), 2))
            return float(spla.svds(B, k=1, return_singular_vectors=False)[0])
        if B.size == 0:
            return 0.0
        return float(np.linalg.norm(B.astype(complex), 2))

    def norm_bound(self) -> float:
        """Cheap upper bound ``sqrt(|B|_1 |B|_inf)`` on the operator norm."""
        B = self.unitary()
        if self.n == 0:
            return 0.0
        absB = abs(B)
        col = float(np.asarray(absB.sum(axis=0)).max())
        row = float(np.asarray(absB.sum(axis=1)).max())
        return float(np.sqrt(col * row))

    def commutator_norm(self) -> float:
        B = self.unitary()
        Bh = B.conj().T
        C = B @ Bh - Bh @ B
        if sp.issparse(C):
            return float(spla.norm(C))  # Frobenius, an upper bound
        return float(np.linalg.norm(C, 2)) if C.size else 0.0

    def is_normal(self, tol: float = NORMAL_TOL) -> bool:
        scale = max(1.0, self.norm_bound() ** 2)
        return self.commutator_norm() <= tol * scale

    def selfadjoint_defect(self) -> float:
        B = self.unitary()
        D = B - B.conj().T
        if sp.issparse(D):
            return float(abs(D).max()) if D.nnz else 0.0
        return float(np.abs(D).max()) if D.size else 0.0

    def is_selfadjoint(self, tol: float = NORMAL_TOL) -> bool:
        return self.selfadjoint_defect() <= tol * max(1.0, self.norm_bound())

    def _check(self, other: "OperatorMatrix"):
        if self.basis != other.basis or not np.array_equal(self.weights, other.weights):
            raise ParentMismatchError("operator matrices act on different spaces")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.basis, self.entries @ other.entries, self.weights)

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries + other.entries, self.weights)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries - other.entries, self.weights)

    def __mul__(self, scalar):
        return OperatorMatrix(self.basis, self.entries * scalar, self.weights)

    __rmul__ = __mul__

    def allclose(self, other: "OperatorMatrix", atol: float = 1e-10) -> bool:
        self._check(other)
        D = self.entries - other.entries
        D = D.toarray() if sp.issparse(D) else np.asarray(D, dtype=complex)
        return bool(np.all(np.abs(D) <= atol))

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"OperatorMatrix(n={self.n}, {kind})"


def regular_rep(g: FiniteGroupoid, x: str, f: Kernel) -> OperatorMatrix:
    """Matrix of ``u -> f * u`` on ``L^2(Xi_x; lambda_x)`` in the arrow basis of ``Xi_x``."""
    if f.parent is not g and f.parent != g:
        raise ParentMismatchError("kernel does not live on this groupoid")
    fiber = g.source_fibers[g.unit(x)]
    pos = np.full(g.n_arrows, -1, dtype=np.int64)
    pos[fiber] = np.arange(len(fiber))
    exact = f.exact and g.is_exact
    if exact:
        out = np.empty((len(fiber), len(fiber)), dtype=object)
        out[...] = 0
    else:
        out = np.zeros((len(fiber), len(fiber)), dtype=complex)
    left, right, prod = g.pairs
    vals = f.values if exact else f.values.astype(complex)
    _backend.regular_matrix(left, right, prod, pos, vals, _left_weights(g, exact), out)
    basis = tuple(g.arrows[i].id for i in fiber)
    return OperatorMatrix(basis, out, g.haar_float[fiber])


def transport(g: FiniteGroupoid, z: str) -> tuple[np.ndarray, tuple[str, ...]]:
    """The bijection ``r_z: Xi_z -> M`` as (arrow indices, unit labels), ordered by unit."""
    fiber = g.source_fibers[g.unit(z)]
    ranges = g.r[fiber]
    if len(set(ranges.tolist())) != len(ranges):
        raise NotPrincipalError(f"r restricted to the source fiber of {z} is not injective")
    order = np.argsort(ranges, kind="stable")
    return fiber[order], tuple(g.units[u] for u in ranges[order])


def vector_rep(f: Kernel, z: str) -> OperatorMatrix:
    """``Pi_0(f) = R_z^{-1} Pi_z(f) R_z`` on ``l^2(M; mu)`` with ``mu = r_z(lambda_z)``."""
    g = f.parent
    arrows, labels = transport(g, z)
    Pz = regular_rep(g, z, f)
    fiber = g.source_fibers[g.unit(z)]
    where = {int(a): i for i, a in enumerate(fiber)}
    perm = np.array([where[int(a)] for a in arrows], dtype=np.int64)
    entries = Pz.entries[np.ix_(perm, perm)]
    return OperatorMatrix(labels, entries, Pz.weights[perm])


def multiplier_mult(psi: UnitFunction, z: str) -> OperatorMatrix:
    """Multiplication by ``psi`` restricted to the orbit of ``z``, on the vector-rep space."""
    g = psi.parent
    arrows, labels = transport(g, z)
    vals = np.array([psi.values[g.unit(u)] for u in labels])
    if vals.dtype != object:
        vals = vals.astype(complex)
    return OperatorMatrix(labels, np.diag(vals), g.haar_float[arrows])


def diagonal(basis, values, weights=None) -> OperatorMatrix:
    return OperatorMatrix(basis, np.diag(np.asarray(values)), weights)
