# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops.

Both functions must agree bit-for-bit with ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport fabs
from libc.stdint cimport uint64_t, int64_t
from numpy.random cimport bitgen_t

cnp.import_array()

cdef extern from "numpy/random/distributions.h":
    double random_standard_normal(bitgen_t *bitgen_state) nogil

cdef double TWO_M52 = 1.0 / 4503599627370496.0


def theta_counts(const uint64_t[:, ::1] raw, Py_ssize_t R, const double[:, ::1] probs):
    """Count ``U_j <= p_s`` over the first ``R`` words of each row."""
    cdef Py_ssize_t n = raw.shape[0]
    cdef Py_ssize_t ns = probs.shape[1]
    cdef Py_ssize_t i, j, s
    cdef double u
    out = np.zeros((n, ns), dtype=np.int64)
    cdef int64_t[:, ::1] counts = out
    with nogil:
        for i in range(n):
            for j in range(R):
                u = (<double>(raw[i, j] >> 12) + 0.5) * TWO_M52
                for s in range(ns):
                    if u <= probs[i, s]:
                        counts[i, s] += 1
    return out


def brownian_sup(bit_generator, Py_ssize_t n_paths, const double[::1] weights, double step_sd):
    """``max_i |B(t_i)| * weights[i]`` per path, Euler increments drawn in place."""
    cdef Py_ssize_t grid = weights.shape[0]
    cdef Py_ssize_t p, i
    cdef double b, v, best
    cdef bitgen_t *rng
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    out = np.empty(n_paths, dtype=np.float64)
    cdef double[::1] res = out
    with bit_generator.lock, nogil:
        for p in range(n_paths):
            b = 0.0
            best = 0.0
            for i in range(grid):
                b = b + random_standard_normal(rng) * step_sd
                v = fabs(b) * weights[i]
                if v > best:
                    best = v
            res[p] = best
    return out
