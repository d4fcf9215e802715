import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupoid_nonprop import _backend
from groupoid_nonprop.representations import regular_rep
from groupoid_nonprop.sampling import random_groupoid, random_kernel

compiled = pytest.mark.skipif("compiled" not in _backend.available(), reason="extension not built")


@pytest.fixture
def python_backend():
    prev = _backend.use_backend("python")
    yield
    _backend.use_backend(prev)


def test_python_backend_always_available():
    assert "python" in _backend.available()
    assert _backend.active() in _backend.available()


def test_use_backend_returns_previous(python_backend):
    assert _backend.active() == "python"
    assert _backend.use_backend("python") == "python"


@compiled
def test_compiled_is_default():
    assert _backend.active() == "compiled"


@compiled
@given(st.integers(0, 100_000))
def test_regular_rep_backends_agree(seed):
    rng = np.random.default_rng(seed)
    g = random_groupoid(rng, 8, 60)
    f = random_kernel(rng, g)
    fast = [regular_rep(g, x, f).dense() for x in g.units]
    prev = _backend.use_backend("python")
    try:
        slow = [regular_rep(g, x, f).dense() for x in g.units]
    finally:
        _backend.use_backend(prev)
    for a, b in zip(fast, slow):
        assert np.allclose(a, b, atol=1e-12)


def test_exact_values_use_python_kernels():
    rng = np.random.default_rng(2)
    g = random_groupoid(rng, 6, 30, exact=True)
    f = random_kernel(rng, g, exact=True)
    M = regular_rep(g, g.units[0], f).entries
    assert M.dtype == object
    assert _backend._impl(f.values) is _backend._pykernels


@compiled
def test_benchmark_runs():
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run([sys.executable, str(script), "--repeat", "1"], capture_output=True, text=True, check=True)
    lines = out.stdout.strip().splitlines()
    assert lines[0].startswith("operation") and len(lines) == 9
