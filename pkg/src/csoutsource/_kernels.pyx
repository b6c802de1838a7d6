# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics must match ``_fallback`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


def max_pair_coherence(const double[:, ::1] cols):
    """Largest |<c_i, c_j>| over i < j for unit-norm rows of ``cols``."""
    cdef Py_ssize_t n = cols.shape[0], d = cols.shape[1]
    cdef Py_ssize_t i, j, k, d4 = d - d % 4
    cdef double acc, a0, a1, a2, a3, best = 0.0
    cdef const double* ri
    cdef const double* rj
    with nogil:
        for i in range(n):
            ri = &cols[i, 0]
            for j in range(i + 1, n):
                rj = &cols[j, 0]
                # four independent partial sums so the loop pipelines
                a0 = a1 = a2 = a3 = 0.0
                for k in range(0, d4, 4):
                    a0 = a0 + ri[k] * rj[k]
                    a1 = a1 + ri[k + 1] * rj[k + 1]
                    a2 = a2 + ri[k + 2] * rj[k + 2]
                    a3 = a3 + ri[k + 3] * rj[k + 3]
                acc = (a0 + a1) + (a2 + a3)
                for k in range(d4, d):
                    acc = acc + ri[k] * rj[k]
                acc = fabs(acc)
                if acc > best:
                    best = acc
    return best


def xor_chains(const unsigned char[::1] w, Py_ssize_t n):
    """Forward chain p, backward chain q and their XOR over n blocks of w."""
    cdef Py_ssize_t N = w.shape[0]
    cdef Py_ssize_t step = N // n
    cdef Py_ssize_t i, k
    cdef unsigned char acc
    p_arr = np.empty(n, dtype=np.uint8)
    q_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] p = p_arr
    cdef unsigned char[::1] q = q_arr
    with nogil:
        acc = 0
        for i in range(n):
            for k in range(i * step, (i + 1) * step):
                acc = acc ^ (w[k] & 1)
            p[i] = acc
        acc = 0
        for i in range(n):
            for k in range((n - 1 - i) * step, (n - i) * step):
                acc = acc ^ (w[k] & 1)
            q[i] = acc
    return p_arr, q_arr, p_arr ^ q_arr


def fisher_yates(const long long[::1] draws):
    """Shuffle ``arange(len(draws) + 1)``; ``draws[t]`` is the swap index for i = N-1-t."""
    cdef Py_ssize_t N = draws.shape[0] + 1
    cdef Py_ssize_t i, j
    cdef long long tmp
    out = np.arange(N, dtype=np.int64)
    cdef long long[::1] perm = out
    with nogil:
        for i in range(N - 1, 0, -1):
            j = <Py_ssize_t> draws[N - 1 - i]
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
    return out


def hamming(const unsigned char[::1] a, const unsigned char[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef Py_ssize_t count = 0
    with nogil:
        for i in range(n):
            count += (a[i] ^ b[i]) & 1
    return count
