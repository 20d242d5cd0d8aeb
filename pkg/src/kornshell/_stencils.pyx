# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels: one-axis second-order differences + transposes.

Same contract as ``_stencils_py`` (see that module for the stencil
definitions); selected at import time by ``kornshell.backend``.
"""

import numpy as np


def diff3(double[:, :, ::1] a, int axis, double inv2d):
    cdef Py_ssize_t n0 = a.shape[0], n1 = a.shape[1], n2 = a.shape[2]
    cdef Py_ssize_t i, j, k, m
    if axis == 0:
        m = n0
    elif axis == 1:
        m = n1
    else:
        m = n2
    if m < 3:
        raise ValueError("differencing needs at least 3 nodes on the axis")
    out_arr = np.empty((n0, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    if axis == 0:
        for j in range(n1):
            for k in range(n2):
                out[0, j, k] = (-3.0 * a[0, j, k] + 4.0 * a[1, j, k] - a[2, j, k]) * inv2d
                out[n0 - 1, j, k] = (3.0 * a[n0 - 1, j, k] - 4.0 * a[n0 - 2, j, k] + a[n0 - 3, j, k]) * inv2d
        for i in range(1, n0 - 1):
            for j in range(n1):
                for k in range(n2):
                    out[i, j, k] = (a[i + 1, j, k] - a[i - 1, j, k]) * inv2d
    elif axis == 1:
        for i in range(n0):
            for k in range(n2):
                out[i, 0, k] = (-3.0 * a[i, 0, k] + 4.0 * a[i, 1, k] - a[i, 2, k]) * inv2d
                out[i, n1 - 1, k] = (3.0 * a[i, n1 - 1, k] - 4.0 * a[i, n1 - 2, k] + a[i, n1 - 3, k]) * inv2d
            for j in range(1, n1 - 1):
                for k in range(n2):
                    out[i, j, k] = (a[i, j + 1, k] - a[i, j - 1, k]) * inv2d
    else:
        for i in range(n0):
            for j in range(n1):
                out[i, j, 0] = (-3.0 * a[i, j, 0] + 4.0 * a[i, j, 1] - a[i, j, 2]) * inv2d
                out[i, j, n2 - 1] = (3.0 * a[i, j, n2 - 1] - 4.0 * a[i, j, n2 - 2] + a[i, j, n2 - 3]) * inv2d
                for k in range(1, n2 - 1):
                    out[i, j, k] = (a[i, j, k + 1] - a[i, j, k - 1]) * inv2d
    return out_arr


def diff3_adjoint(double[:, :, ::1] y, int axis, double inv2d):
    cdef Py_ssize_t n0 = y.shape[0], n1 = y.shape[1], n2 = y.shape[2]
    cdef Py_ssize_t i, j, k, m
    if axis == 0:
        m = n0
    elif axis == 1:
        m = n1
    else:
        m = n2
    if m < 3:
        raise ValueError("differencing needs at least 3 nodes on the axis")
    out_arr = np.zeros((n0, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    if axis == 0:
        for i in range(1, n0 - 1):
            for j in range(n1):
                for k in range(n2):
                    out[i - 1, j, k] -= y[i, j, k]
                    out[i + 1, j, k] += y[i, j, k]
        for j in range(n1):
            for k in range(n2):
                out[0, j, k] -= 3.0 * y[0, j, k]
                out[1, j, k] += 4.0 * y[0, j, k]
                out[2, j, k] -= y[0, j, k]
                out[n0 - 1, j, k] += 3.0 * y[n0 - 1, j, k]
                out[n0 - 2, j, k] -= 4.0 * y[n0 - 1, j, k]
                out[n0 - 3, j, k] += y[n0 - 1, j, k]
    elif axis == 1:
        for i in range(n0):
            for j in range(1, n1 - 1):
                for k in range(n2):
                    out[i, j - 1, k] -= y[i, j, k]
                    out[i, j + 1, k] += y[i, j, k]
            for k in range(n2):
                out[i, 0, k] -= 3.0 * y[i, 0, k]
                out[i, 1, k] += 4.0 * y[i, 0, k]
                out[i, 2, k] -= y[i, 0, k]
                out[i, n1 - 1, k] += 3.0 * y[i, n1 - 1, k]
                out[i, n1 - 2, k] -= 4.0 * y[i, n1 - 1, k]
                out[i, n1 - 3, k] += y[i, n1 - 1, k]
    else:
        for i in range(n0):
            for j in range(n1):
                for k in range(1, n2 - 1):
                    out[i, j, k - 1] -= y[i, j, k]
                    out[i, j, k + 1] += y[i, j, k]
                out[i, j, 0] -= 3.0 * y[i, j, 0]
                out[i, j, 1] += 4.0 * y[i, j, 0]
                out[i, j, 2] -= y[i, j, 0]
                out[i, j, n2 - 1] += 3.0 * y[i, j, n2 - 1]
                out[i, j, n2 - 2] -= 4.0 * y[i, j, n2 - 1]
                out[i, j, n2 - 3] += y[i, j, n2 - 1]
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                out[i, j, k] *= inv2d
    return out_arr
