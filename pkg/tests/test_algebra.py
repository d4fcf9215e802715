from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupoid_nonprop import _backend
from groupoid_nonprop.algebra import (
    Kernel,
    UnitFunction,
    convolve,
    cx_action,
    extend_by_zero,
    hahn_norm,
    involute,
    restrict,
)
from groupoid_nonprop.errors import NotInvariantError, ParentMismatchError
from groupoid_nonprop.groupoid import build_group_bundle, build_pair_groupoid, orbits
from groupoid_nonprop.sampling import random_groupoid, random_kernel, random_unit_function

from . import oracles

seeds = st.integers(0, 100_000)


def test_delta_products():
    g = build_pair_groupoid(3)
    a, b = Kernel.delta(g, "(0,1)"), Kernel.delta(g, "(1,2)")
    assert (a @ b).to_dict() == {"(0,2)": 1}
    assert (b @ a).to_dict() == {}
    assert (a @ Kernel.delta(g, "(1,0)")).to_dict() == {"(0,0)": 1}


def test_z2_group_convolution_matches_oracle():
    g = build_group_bundle(["n"], {"n": "Z/2"})
    e, s = g.arrows[0].id, g.arrows[1].id
    a, b = 1.5 - 0.5j, 0.25 + 2j
    f = Kernel.from_dict(g, {e: a, s: b})
    out = (f @ f).to_dict()
    assert out[e] == pytest.approx(a * a + b * b)
    assert out[s] == pytest.approx(2 * a * b)


@given(seeds)
def test_convolution_matches_formula(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 6, 30)
    f, h = random_kernel(rng, g), random_kernel(rng, g)
    ref = oracles.convolve(g, f.to_dict(), h.to_dict())
    got = convolve(f, h)
    for xi, v in ref.items():
        assert abs(got[xi] - v) <= 1e-12 * (1 + abs(v))


def test_convolution_parent_mismatch():
    with pytest.raises(ParentMismatchError):
        Kernel.zeros(build_pair_groupoid(2)) @ Kernel.zeros(build_pair_groupoid(3))


def test_involution_examples():
    g = build_pair_groupoid(2)
    assert involute(Kernel.delta(g, "(0,1)")).to_dict() == {"(1,0)": 1}
    sym = Kernel.from_dict(g, {"(0,1)": 2.0, "(1,0)": 2.0, "(0,0)": -1.0})
    assert involute(sym) == sym
    z = involute(Kernel.delta(g, "(0,1)", 1 + 1j))
    assert z.to_dict() == {"(1,0)": 1 - 1j}


@given(seeds)
def test_involution_is_involutive(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 6, 30)
    f = random_kernel(rng, g)
    assert involute(involute(f)) == f


def test_hahn_norm_examples():
    g = build_pair_groupoid(4)
    assert hahn_norm(Kernel.delta(g, "(1,2)")) == 1
    ones = Kernel(g, np.ones(g.n_arrows))
    assert hahn_norm(ones) == pytest.approx(oracles.hahn(g, ones.to_dict())) == pytest.approx(4)
    assert hahn_norm(Kernel.zeros(g)) == 0


@given(seeds)
def test_hahn_norm_matches_fiber_sums(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 8, 40)
    f = random_kernel(rng, g)
    assert hahn_norm(f) == pytest.approx(oracles.hahn(g, f.to_dict()), rel=1e-12)


@given(seeds)
def test_hahn_norm_submultiplicative_and_star_invariant(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 8, 40)
    f, h = random_kernel(rng, g), random_kernel(rng, g)
    assert hahn_norm(f @ h) <= hahn_norm(f) * hahn_norm(h) * (1 + 1e-12)
    assert hahn_norm(involute(f)) == pytest.approx(hahn_norm(f), rel=1e-14)


def test_exact_mode_is_rational():
    rng = np.random.default_rng(3)
    g = random_groupoid(rng, 6, 30, exact=True)
    f, h, k = (random_kernel(rng, g, exact=True) for _ in range(3))
    assert f.exact
    lhs, rhs = (f @ h) @ k, f @ (h @ k)
    assert all(isinstance(v, Fraction) for v in lhs.values)
    assert list(lhs.values) == list(rhs.values)
    assert list(involute(f @ h).values) == list((involute(h) @ involute(f)).values)
    assert isinstance(hahn_norm(f), Fraction)


def test_cx_action_examples():
    g = build_pair_groupoid(3)
    f = Kernel.delta(g, "(0,2)", 2.0)
    psi = UnitFunction.from_dict(g, {"0": 3.0, "1": 5.0, "2": 7.0})
    assert cx_action(UnitFunction.constant(g), f) == f
    assert cx_action(psi, f, "left").to_dict() == {"(0,2)": 6.0}
    assert cx_action(psi, f, "right").to_dict() == {"(0,2)": 14.0}
    with pytest.raises(ValueError):
        cx_action(psi, f, "middle")
    with pytest.raises(ParentMismatchError):
        cx_action(UnitFunction.constant(build_pair_groupoid(2)), f)


@given(seeds)
def test_double_centralizer_identities(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 8, 40)
    f, h = random_kernel(rng, g), random_kernel(rng, g)
    psi = random_unit_function(rng, g)
    # (psi f) * h = psi (f * h) and (f psi) * h = f * (psi h)
    assert (cx_action(psi, f, "left") @ h).isclose(cx_action(psi, f @ h, "left"), 1e-10)
    assert (cx_action(psi, f, "right") @ h).isclose(f @ cx_action(psi, h, "left"), 1e-10)
    assert (f @ cx_action(psi, h, "right")).isclose(cx_action(psi, f @ h, "right"), 1e-10)


def test_restrict_examples():
    g = build_pair_groupoid(2)
    f = Kernel.delta(g, "(0,1)")
    assert restrict(f, g.units) is f
    with pytest.raises(NotInvariantError):
        restrict(f, ["0"])


@given(seeds, st.data())
def test_restriction_is_contractive_morphism(seed, data):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 10, 50)
    parts = orbits(g)
    idx = data.draw(st.lists(st.sampled_from(range(len(parts))), unique=True, min_size=1))
    A = frozenset().union(*(parts[i] for i in idx))
    f, h = random_kernel(rng, g), random_kernel(rng, g)
    assert restrict(f @ h, A).isclose(restrict(f, A) @ restrict(h, A), 1e-12)
    assert restrict(involute(f), A) == involute(restrict(f, A))
    assert hahn_norm(restrict(f, A)) <= hahn_norm(f) * (1 + 1e-14)
    # extension by zero is a left inverse of restriction on kernels living over A
    back = extend_by_zero(restrict(f, A), g)
    assert restrict(back, A) == restrict(f, A)


def test_kernel_arithmetic_and_support():
    g = build_pair_groupoid(2)
    a = Kernel.from_dict(g, {"(0,1)": 1.0, "(1,1)": 2.0})
    b = Kernel.from_dict(g, {"(0,1)": -1.0})
    assert set((a + b).support) == {"(1,1)"}
    assert (a - a).support == ()
    assert (2 * a)["(1,1)"] == 4
    assert (-a)["(0,1)"] == -1
    with pytest.raises(ValueError):
        Kernel(g, np.zeros(3))


@pytest.mark.skipif("compiled" not in _backend.available(), reason="extension not built")
@given(seeds)
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 8, 60)
    f, h = random_kernel(rng, g), random_kernel(rng, g)
    prev = _backend.use_backend("python")
    try:
        slow = f @ h
    finally:
        _backend.use_backend(prev)
    assert (f @ h).isclose(slow, 1e-12)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _backend.use_backend("fortran")
