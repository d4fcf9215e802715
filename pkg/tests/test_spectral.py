import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupoid_nonprop.errors import NotNormalError, NotSelfAdjointError
from groupoid_nonprop.representations import OperatorMatrix, diagonal
from groupoid_nonprop.spectral import (
    BumpFunction,
    SpectrumSet,
    decompose,
    essential_spectrum_union,
    evolution,
    functional_calculus,
    spectrum,
    sup_on,
    support_gap,
)

from .oracles import interval_union

seeds = st.integers(0, 100_000)


def _laplacian(n, sparse=False):
    import scipy.sparse as sp

    A = sp.diags([np.ones(n - 1), np.ones(n - 1)], [-1, 1]) if sparse else (np.eye(n, k=1) + np.eye(n, k=-1))
    return OperatorMatrix(range(n), A)


def _random_hermitian(rng, n, weights=None):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    B = A + A.conj().T
    return OperatorMatrix.from_unitary(range(n), B, weights)


# -- bump functions -----------------------------------------------------------------


def test_bump_validation_and_values():
    k = BumpFunction.trapezoid(1, 2, 3, 4)
    assert k.support == (1.0, 4.0)
    assert np.allclose(k([0, 1, 1.5, 2.5, 3.5, 5]), [0, 0, 0.5, 1, 0.5, 0])
    assert BumpFunction.hat(0, 2, 3.0)(1.0) == 3.0
    for bad in (((0, 0),), ((0, 0), (0, 1), (1, 0)), ((0, 1), (1, 0)), ((0, 0), (np.inf, 0))):
        with pytest.raises(ValueError):
            BumpFunction(bad)
    assert BumpFunction(((0, 0), (1, 0))).is_zero


# -- spectrum -----------------------------------------------------------------------


def test_identity_and_diagonal():
    assert np.allclose(spectrum(OperatorMatrix(range(4), np.eye(4))).points, 1)
    assert np.allclose(spectrum(diagonal("abc", [3.0, 1.0, 2.0])).points, [1, 2, 3])


@pytest.mark.parametrize("n,sparse", [(7, False), (80, False), (300, True)])
def test_free_laplacian_closed_form(n, sparse):
    ev = spectrum(_laplacian(n, sparse)).points.real
    exact = np.sort(2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    assert np.allclose(ev, exact, atol=1e-10)


def test_pentadiagonal_uses_banded_path():
    n = 200
    rng = np.random.default_rng(0)
    H = np.diag(rng.normal(size=n))
    for k in (1, 2):
        off = rng.normal(size=n - k) + 1j * rng.normal(size=n - k)
        H = H + np.diag(off, -k) + np.diag(off.conj(), k)
    got = spectrum(OperatorMatrix(range(n), H)).points.real
    assert np.allclose(got, np.linalg.eigvalsh(H), atol=1e-9)


def test_complex_tridiagonal_gauge():
    n = 100
    rng = np.random.default_rng(5)
    off = np.exp(1j * rng.uniform(0, 2 * np.pi, n - 1)) * rng.uniform(0.5, 2, n - 1)
    H = np.diag(rng.normal(size=n)) + np.diag(off, -1) + np.diag(off.conj(), 1)
    dec = decompose(OperatorMatrix(range(n), H))
    assert np.allclose(dec.values, np.linalg.eigvalsh(H), atol=1e-10)
    assert dec.residual <= 1e-8 * np.abs(H).sum(axis=1).max()


def test_weighted_spectrum_matches_similarity():
    rng = np.random.default_rng(9)
    w = rng.uniform(0.5, 3, 6)
    H = _random_hermitian(rng, 6, w)
    assert H.is_selfadjoint()
    B = H.unitary()
    assert np.allclose(spectrum(H).points.real, np.linalg.eigvalsh(B), atol=1e-10)


def test_normal_non_hermitian_and_non_normal():
    theta = 0.3
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    S = spectrum(OperatorMatrix("ab", R))
    assert np.allclose(sorted(S.points.imag), [-np.sin(theta), np.sin(theta)])
    with pytest.raises(NotNormalError):
        spectrum(OperatorMatrix("ab", np.array([[0.0, 1.0], [0.0, 0.0]])))
    with pytest.raises(NotSelfAdjointError):
        evolution(OperatorMatrix("ab", R), 1.0)


def test_window_restricts_eigenvalues():
    H = _laplacian(120)
    dec = decompose(H, window=(1.0, 3.0))
    assert not dec.complete
    assert np.all(dec.values >= 1.0) and len(dec.values) == np.sum(2 * np.cos(np.arange(1, 121) * np.pi / 121) >= 1)


# -- functional calculus -------------------------------------------------------------


def test_kappa_zero_on_spectrum():
    H = _laplacian(30)
    K = functional_calculus(BumpFunction.hat(3, 5), H)
    assert np.abs(K.dense()).max() == 0


def test_isolated_eigenvalue_projection():
    vals = np.array([0.0, 0.0, 1.0, 5.0])
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    H = OperatorMatrix(range(4), Q @ np.diag(vals) @ Q.T)
    P = functional_calculus(BumpFunction.trapezoid(-0.5, -0.2, 0.2, 0.5), H).dense()
    assert np.allclose(P @ P, P, atol=1e-10)
    assert np.allclose(P, Q[:, :2] @ Q[:, :2].T, atol=1e-10)


@given(seeds)
def test_spectral_mapping_and_norm(seed):
    rng = np.random.default_rng(seed)
    H = _random_hermitian(rng, 8, rng.uniform(0.5, 2, 8))
    kappa = BumpFunction(((-3, 0), (-1, 1.5), (0.5, -0.7), (2, 0.2), (4, 0)))
    K = functional_calculus(kappa, H)
    ev = spectrum(H).points.real
    mapped = np.sort(kappa(ev))
    assert np.allclose(np.sort(np.linalg.eigvalsh(K.unitary())), mapped, atol=1e-8)
    assert K.norm() == pytest.approx(np.abs(mapped).max(), abs=1e-12)
    assert (K @ H).allclose(H @ K, 1e-10)


@given(seeds)
def test_a_priori_multiplier_bound(seed):
    rng = np.random.default_rng(seed)
    H = _random_hermitian(rng, 10)
    kappa = BumpFunction.hat(-1, 2, 0.8)
    psi = rng.uniform(-1, 1, 10)
    K = functional_calculus(kappa, H)
    lhs = (diagonal(range(10), psi) @ K).norm()
    assert lhs <= np.abs(psi).max() * sup_on(kappa, spectrum(H)) * (1 + 1e-12)


@given(seeds, st.floats(-100, 100))
def test_evolution_unitary_and_commutes(seed, t):
    rng = np.random.default_rng(seed)
    H = _random_hermitian(rng, 6, rng.uniform(0.5, 2, 6))
    U = evolution(H, t).unitary()
    assert np.allclose(U @ U.conj().T, np.eye(6), atol=1e-10)
    K = functional_calculus(BumpFunction.hat(-2, 2), H).unitary()
    assert np.allclose(U @ K, K @ U, atol=1e-10)


# -- spectrum sets ---------------------------------------------------------------------


def test_union_examples():
    a = SpectrumSet.sampled_interval(-2, 2, 401)
    assert essential_spectrum_union([a]) is a
    u = essential_spectrum_union([a, SpectrumSet.sampled_interval(2, 6, 401)])
    assert u.components() == [(-2.0, 6.0)] == interval_union([(-2, 2), (2, 6)])
    v = essential_spectrum_union([SpectrumSet.sampled_interval(0, 1, 50), SpectrumSet.sampled_interval(3, 4, 50)])
    assert v.components() == [(0.0, 1.0), (3.0, 4.0)]
    assert v.step == pytest.approx(1 / 49)


def test_support_gap_examples():
    S = SpectrumSet.sampled_interval(-2, 2)
    assert support_gap(BumpFunction.hat(3, 5), S) == pytest.approx(1.0)
    assert support_gap(BumpFunction.hat(1, 5), S) == 0.0
    theta = np.linspace(0, 2 * np.pi, 4096)
    curve = SpectrumSet(2 * np.cos(theta), "sampled-range", float(np.abs(np.diff(2 * np.cos(theta))).max()))
    assert abs(support_gap(BumpFunction.hat(2.5, 3), curve) - 0.5) <= curve.step
    assert support_gap(BumpFunction.hat(0, 1), SpectrumSet([])) == np.inf


def test_hausdorff_and_distance():
    a = SpectrumSet([0, 1, 2])
    b = SpectrumSet([0.5, 2.0])
    assert a.hausdorff(b) == pytest.approx(0.5)
    assert np.allclose(a.distance([3, -1]), [1, 1])
    c = SpectrumSet([1j, -1j])
    assert c.distance(0)[0] == pytest.approx(1.0)
    assert not c.is_real
    with pytest.raises(ValueError):
        c.components()
    with pytest.raises(ValueError):
        SpectrumSet([0], kind="guess")
