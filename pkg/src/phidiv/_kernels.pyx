# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels; see ``_kernels_py`` for the reference semantics."""
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline Py_ssize_t _bin(double u, const double* cdf, Py_ssize_t r) noexcept nogil:
    # first j with u < cdf[j], i.e. the number of cdf entries <= u;
    # cdf ends in inf so the answer is < r
    cdef Py_ssize_t lo = 0, n = r, half, j
    if r <= 16:
        # branchless scan: uniforms make search branches unpredictable
        for j in range(r - 1):
            lo += u >= cdf[j]
        return lo
    # branchless bisection, same reason
    while n > 1:
        half = n >> 1
        lo += (cdf[lo + half - 1] <= u) * half
        n -= half
    return lo + (cdf[lo] <= u)


def categorical_draws(uint64_t seed, Py_ssize_t n, cdf):
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t r = c.shape[0], i
    cdef uint64_t state = seed
    cdef double u
    with nogil:
        for i in range(n):
            state = state + GAMMA
            u = <double>(_mix(state) >> 11) * TWO_M53
            o[i] = _bin(u, &c[0], r)
    return out


def categorical_counts(seeds, Py_ssize_t n, cdf):
    cdef const uint64_t[::1] s = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef Py_ssize_t R = s.shape[0], r = c.shape[0], k, i
    counts = np.zeros((R, r), dtype=np.int64)
    cdef int64_t[:, ::1] out = counts
    cdef uint64_t state
    cdef double u
    if R == 0:
        return counts
    with nogil:
        for k in range(R):
            state = s[k]
            for i in range(n):
                state = state + GAMMA
                u = <double>(_mix(state) >> 11) * TWO_M53
                out[k, _bin(u, &c[0], r)] += 1
    return counts
