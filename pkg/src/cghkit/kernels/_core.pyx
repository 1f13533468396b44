# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled incremental-update kernels; see the package docstring for the contract."""

from libc.math cimport sqrt
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


cdef inline double _cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def delta_error(cplx[::1] replay_m, double[::1] target_m,
                cplx[::1] row_tw, cplx[::1] col_tw,
                cnp.int32_t[::1] mu, cnp.int32_t[::1] mv,
                cplx delta):
    cdef Py_ssize_t i, count = replay_m.shape[0]
    cdef cplx w, updated
    cdef double d0, d1, total = 0.0
    with nogil:
        for i in range(count):
            w = row_tw[mu[i]] * col_tw[mv[i]]
            updated = replay_m[i] + delta * w
            d0 = _cabs(replay_m[i]) - target_m[i]
            d1 = _cabs(updated) - target_m[i]
            total += d1 * d1 - d0 * d0
    return total


def commit_update(cplx[::1] replay_m,
                  cplx[::1] row_tw, cplx[::1] col_tw,
                  cnp.int32_t[::1] mu, cnp.int32_t[::1] mv,
                  cplx delta):
    cdef Py_ssize_t i, count = replay_m.shape[0]
    with nogil:
        for i in range(count):
            replay_m[i] = replay_m[i] + delta * (row_tw[mu[i]] * col_tw[mv[i]])


def best_delta(cplx[::1] replay_m, double[::1] target_m,
               cplx[::1] row_tw, cplx[::1] col_tw,
               cnp.int32_t[::1] mu, cnp.int32_t[::1] mv,
               cplx[::1] deltas):
    cdef Py_ssize_t i, j, count = replay_m.shape[0], levels = deltas.shape[0]
    cdef Py_ssize_t best_index = -1
    cdef double best_change = 0.0, change, d1
    cdef cplx delta
    # The pixel's twiddle factors and the baseline distances are shared by
    # every candidate level; hoist them out of the level loop.
    cdef cplx *w = <cplx *> malloc(count * sizeof(cplx))
    cdef double *d0 = <double *> malloc(count * sizeof(double))
    if w == NULL or d0 == NULL:
        free(w)
        free(d0)
        raise MemoryError()
    try:
        with nogil:
            for i in range(count):
                w[i] = row_tw[mu[i]] * col_tw[mv[i]]
                d1 = _cabs(replay_m[i]) - target_m[i]
                d0[i] = d1 * d1
            for j in range(levels):
                delta = deltas[j]
                if delta.real == 0.0 and delta.imag == 0.0:
                    continue
                change = 0.0
                for i in range(count):
                    d1 = _cabs(replay_m[i] + delta * w[i]) - target_m[i]
                    change += d1 * d1 - d0[i]
                if change < best_change:
                    best_change = change
                    best_index = j
    finally:
        free(w)
        free(d0)
    return best_index, best_change
