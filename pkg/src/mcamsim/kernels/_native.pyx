# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels.

Sums run over word positions in index order so results are bit-identical to
the numpy fallback.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint64_t

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def lut_scores(const double[:, ::1] lut, const int32_t[:, ::1] queries, const int32_t[:, ::1] rows):
    cdef Py_ssize_t nq = queries.shape[0], nr = rows.shape[0], w = queries.shape[1]
    cdef Py_ssize_t q, r, j
    cdef double acc
    out = np.empty((nq, nr), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for q in range(nq):
            for r in range(nr):
                acc = 0.0
                for j in range(w):
                    acc = acc + lut[queries[q, j], rows[r, j]]
                o[q, r] = acc
    return out


def table_scores(const double[:, :, ::1] tables, const int32_t[:, ::1] queries):
    cdef Py_ssize_t nq = queries.shape[0], nr = tables.shape[0], w = tables.shape[1]
    cdef Py_ssize_t q, r, j
    cdef double acc
    out = np.empty((nq, nr), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for q in range(nq):
            for r in range(nr):
                acc = 0.0
                for j in range(w):
                    acc = acc + tables[r, j, queries[q, j]]
                o[q, r] = acc
    return out


def hamming_scores(const uint64_t[:, ::1] qbits, const uint64_t[:, ::1] rbits):
    cdef Py_ssize_t nq = qbits.shape[0], nr = rbits.shape[0], nw = qbits.shape[1]
    cdef Py_ssize_t q, r, k
    cdef int64_t acc
    out = np.empty((nq, nr), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    with nogil:
        for q in range(nq):
            for r in range(nr):
                acc = 0
                for k in range(nw):
                    acc += __builtin_popcountll(qbits[q, k] ^ rbits[r, k])
                o[q, r] = acc
    return out


def first_argmin(const double[:, ::1] scores):
    cdef Py_ssize_t nq = scores.shape[0], nr = scores.shape[1], q, r, best
    out = np.empty(nq, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for q in range(nq):
            best = 0
            for r in range(1, nr):
                if scores[q, r] < scores[q, best]:
                    best = r
            o[q] = best
    return out
