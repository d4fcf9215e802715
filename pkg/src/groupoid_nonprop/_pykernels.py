"""Reference implementations of the compiled loops (numpy and plain Python)."""

import numpy as np


def convolve_pairs(left, right, prod, f, g, wl, out):
    if out.dtype == object:
        for a, b, c in zip(left.tolist(), right.tolist(), prod.tolist()):
            out[c] += f[a] * g[b] * wl[a]
        return
    np.add.at(out, prod, f[left] * g[right] * wl[left])


def regular_matrix(left, right, prod, pos, f, wl, out):
    sel = pos[right] >= 0
    if out.dtype == object:
        for a, b, c in zip(left[sel].tolist(), right[sel].tolist(), prod[sel].tolist()):
            out[pos[c], pos[b]] += f[a] * wl[a]
        return
    a = left[sel]
    np.add.at(out, (pos[prod[sel]], pos[right[sel]]), f[a] * wl[a])
