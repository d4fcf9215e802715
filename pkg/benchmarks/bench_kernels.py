"""Compiled vs pure-Python kernels: convolution and regular-representation assembly.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per (operation, groupoid size) with the median time of each
backend and the speedup.  Both backends are checked to agree first.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from groupoid_nonprop import _backend
from groupoid_nonprop.algebra import convolve
from groupoid_nonprop.groupoid import transitive_groupoid
from groupoid_nonprop.groups import cyclic
from groupoid_nonprop.representations import regular_rep
from groupoid_nonprop.sampling import random_kernel


def _time(fn, repeat: int) -> float:
    return float(np.median(timeit.repeat(fn, number=1, repeat=repeat)))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if "compiled" not in _backend.available():
        print("compiled extension not built; only the Python backend is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'operation':<14}{'units':>6}{'arrows':>8}{'pairs':>9}{'compiled s':>13}{'python s':>11}{'speedup':>9}")
    for n, k in ((6, 2), (10, 3), (16, 4), (24, 4)):
        g = transitive_groupoid([str(i) for i in range(n)], cyclic(k))
        f, h = random_kernel(rng, g), random_kernel(rng, g)
        x = g.units[0]
        for name, op in (("convolve", lambda: convolve(f, h)), ("regular_rep", lambda: regular_rep(g, x, f))):
            _backend.use_backend("compiled")
            a = op()
            tc = _time(op, args.repeat)
            _backend.use_backend("python")
            b = op()
            tp = _time(op, args.repeat)
            _backend.use_backend("compiled")
            va = a.values if hasattr(a, "values") else a.entries
            vb = b.values if hasattr(b, "values") else b.entries
            assert np.allclose(va, vb, atol=1e-10), "backends disagree"
            print(f"{name:<14}{n:>6}{g.n_arrows:>8}{len(g.pairs[0]):>9}{tc:>13.5f}{tp:>11.5f}{tp / tc:>9.1f}")


if __name__ == "__main__":
    main()
