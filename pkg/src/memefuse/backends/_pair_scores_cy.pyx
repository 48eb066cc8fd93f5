# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled gated pairwise score kernel.

Streams the (m, n, d) sigmoid expansion row by row, so peak memory is
O(d) instead of O(m*n*d).  The backward pass recomputes the activations
rather than caching them.  Interface mirrors ``pair_scores_np``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

NAME = "compiled"


cdef inline double _sig(double z) nogil:
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    cdef double e = exp(z)
    return e / (1.0 + e)


def forward(cnp.ndarray xw_in, yu_in, cnp.ndarray b_in, cnp.ndarray v_in,
            double c, int n):
    cdef double[:, ::1] xw = np.ascontiguousarray(xw_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef double[::1] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef Py_ssize_t m = xw.shape[0]
    cdef Py_ssize_t d = xw.shape[1]
    cdef cnp.ndarray s_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] s = s_arr
    cdef double[:, ::1] yu
    cdef Py_ssize_t p, j, k
    cdef double acc

    if yu_in is None:
        with nogil:
            for p in range(m):
                acc = c
                for k in range(d):
                    acc += _sig(xw[p, k] + b[k]) * v[k]
                for j in range(n):
                    s[p, j] = acc
        return s_arr, ("nou", xw_in)

    yu = np.ascontiguousarray(yu_in, dtype=np.float64)
    with nogil:
        for p in range(m):
            for j in range(n):
                acc = c
                for k in range(d):
                    acc += _sig(xw[p, k] + yu[j, k] + b[k]) * v[k]
                s[p, j] = acc
    return s_arr, ("pair", xw_in, yu_in)


def backward(ctx, cnp.ndarray v_in, cnp.ndarray ds_in, cnp.ndarray b_in):
    cdef double[::1] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef double[:, ::1] ds = np.ascontiguousarray(ds_in, dtype=np.float64)
    cdef double[:, ::1] xw
    cdef double[:, ::1] yu
    cdef Py_ssize_t m, n, d, p, j, k
    cdef double h, dz, g, dc = 0.0
    cdef cnp.ndarray dxw_arr, dyu_arr, db_arr, dv_arr
    cdef double[:, ::1] dxw
    cdef double[:, ::1] dyu
    cdef double[::1] db
    cdef double[::1] dv
    cdef double gsum

    if ctx[0] == "nou":
        xw = np.ascontiguousarray(ctx[1], dtype=np.float64)
        m = xw.shape[0]
        d = xw.shape[1]
        n = ds.shape[1]
        dxw_arr = np.zeros((m, d), dtype=np.float64)
        db_arr = np.zeros(d, dtype=np.float64)
        dv_arr = np.zeros(d, dtype=np.float64)
        dxw = dxw_arr
        db = db_arr
        dv = dv_arr
        with nogil:
            for p in range(m):
                gsum = 0.0
                for j in range(n):
                    gsum += ds[p, j]
                dc += gsum
                for k in range(d):
                    h = _sig(xw[p, k] + b[k])
                    dz = gsum * v[k] * h * (1.0 - h)
                    dxw[p, k] = dz
                    db[k] += dz
                    dv[k] += gsum * h
        return dxw_arr, None, db_arr, dv_arr, dc

    xw = np.ascontiguousarray(ctx[1], dtype=np.float64)
    yu = np.ascontiguousarray(ctx[2], dtype=np.float64)
    m = xw.shape[0]
    n = yu.shape[0]
    d = xw.shape[1]
    dxw_arr = np.zeros((m, d), dtype=np.float64)
    dyu_arr = np.zeros((n, d), dtype=np.float64)
    db_arr = np.zeros(d, dtype=np.float64)
    dv_arr = np.zeros(d, dtype=np.float64)
    dxw = dxw_arr
    dyu = dyu_arr
    db = db_arr
    dv = dv_arr
    with nogil:
        for p in range(m):
            for j in range(n):
                g = ds[p, j]
                dc += g
                for k in range(d):
                    h = _sig(xw[p, k] + yu[j, k] + b[k])
                    dz = g * v[k] * h * (1.0 - h)
                    dxw[p, k] += dz
                    dyu[j, k] += dz
                    db[k] += dz
                    dv[k] += g * h
    return dxw_arr, dyu_arr, db_arr, dv_arr, dc
