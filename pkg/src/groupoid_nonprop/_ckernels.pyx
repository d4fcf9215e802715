# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over the composable-pair arrays of a finite groupoid."""

cimport numpy as cnp

cnp.import_array()


def convolve_pairs(const cnp.int64_t[::1] left,
                   const cnp.int64_t[::1] right,
                   const cnp.int64_t[::1] prod,
                   const double complex[::1] f,
                   const double complex[::1] g,
                   const double[::1] wl,
                   double complex[::1] out):
    cdef Py_ssize_t p, n = left.shape[0]
    cdef cnp.int64_t a
    for p in range(n):
        a = left[p]
        out[prod[p]] += f[a] * g[right[p]] * wl[a]


def regular_matrix(const cnp.int64_t[::1] left,
                   const cnp.int64_t[::1] right,
                   const cnp.int64_t[::1] prod,
                   const cnp.int64_t[::1] pos,
                   const double complex[::1] f,
                   const double[::1] wl,
                   double complex[:, ::1] out):
    cdef Py_ssize_t p, n = left.shape[0]
    cdef cnp.int64_t a, col
    for p in range(n):
        col = pos[right[p]]
        if col < 0:
            continue
        a = left[p]
        out[pos[prod[p]], col] += f[a] * wl[a]
