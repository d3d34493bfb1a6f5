# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np
from libc.math cimport fabs, fmax, sqrt


def qr_reduce(a_in, y_in):
    cdef double[:, ::1] a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef double[::1] y = np.array(y_in, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = a.shape[0], p = a.shape[1]
    cdef Py_ssize_t i, j, c, m = min(n, p)
    cdef double normx, scale, vv, beta, s, tail
    cdef double[::1] v = np.empty(n, dtype=np.float64)

    for j in range(m):
        scale = 0.0
        for i in range(j, n):
            scale = fmax(scale, fabs(a[i, j]))
        if scale == 0.0:
            continue
        normx = 0.0
        for i in range(j, n):
            v[i] = a[i, j] / scale
            normx += v[i] * v[i]
        normx = sqrt(normx)
        v[j] -= -normx if v[j] >= 0.0 else normx
        vv = 0.0
        for i in range(j, n):
            vv += v[i] * v[i]
        beta = 2.0 / vv
        for c in range(j, p):
            s = 0.0
            for i in range(j, n):
                s += v[i] * a[i, c]
            s *= beta
            for i in range(j, n):
                a[i, c] -= s * v[i]
        s = 0.0
        for i in range(j, n):
            s += v[i] * y[i]
        s *= beta
        for i in range(j, n):
            y[i] -= s * v[i]

    r = np.triu(np.asarray(a)[:p, :p]) if n >= p else np.triu(np.asarray(a))
    z = np.asarray(y)[:p].copy()
    tail = 0.0
    for i in range(p, n):
        tail += y[i] * y[i]
    return r, z, tail


def group_sum_count(ids_in, values_in):
    cdef long long[::1] ids = np.ascontiguousarray(ids_in, dtype=np.int64)
    cdef double[:, ::1] values = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t n = ids.shape[0], m = values.shape[1]
    cdef Py_ssize_t i, c, g = 0
    if n == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros((0, m)),
                np.zeros(0, dtype=np.int64))
    cdef Py_ssize_t ngroups = 1
    for i in range(1, n):
        if ids[i] < ids[i - 1]:
            raise ValueError("group ids must be sorted")
        if ids[i] != ids[i - 1]:
            ngroups += 1
    uids_arr = np.empty(ngroups, dtype=np.int64)
    sums_arr = np.zeros((ngroups, m), dtype=np.float64)
    counts_arr = np.zeros(ngroups, dtype=np.int64)
    cdef long long[::1] uids = uids_arr
    cdef double[:, ::1] sums = sums_arr
    cdef long long[::1] counts = counts_arr
    uids[0] = ids[0]
    for i in range(n):
        if i > 0 and ids[i] != ids[i - 1]:
            g += 1
            uids[g] = ids[i]
        counts[g] += 1
        for c in range(m):
            sums[g, c] += values[i, c]
    return uids_arr, sums_arr, counts_arr


def group_max(ids_in, values_in):
    cdef long long[::1] ids = np.ascontiguousarray(ids_in, dtype=np.int64)
    cdef double[::1] values = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t i, g = 0
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    cdef Py_ssize_t ngroups = 1
    for i in range(1, n):
        if ids[i] < ids[i - 1]:
            raise ValueError("group ids must be sorted")
        if ids[i] != ids[i - 1]:
            ngroups += 1
    uids_arr = np.empty(ngroups, dtype=np.int64)
    maxes_arr = np.empty(ngroups, dtype=np.float64)
    cdef long long[::1] uids = uids_arr
    cdef double[::1] maxes = maxes_arr
    uids[0] = ids[0]
    maxes[0] = values[0]
    for i in range(1, n):
        if ids[i] != ids[i - 1]:
            g += 1
            uids[g] = ids[i]
            maxes[g] = values[i]
        elif values[i] > maxes[g]:
            maxes[g] = values[i]
    return uids_arr, maxes_arr
