# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the two hot loops: symbol detection and the
penalized packing objective. Mirrors `_ref.py` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def detect(const double[:, ::1] y, const double[:, ::1] points):
    """Minimum-distance detection; ties go to the smallest index."""
    cdef Py_ssize_t b = y.shape[0]
    cdef Py_ssize_t n = y.shape[1]
    cdef Py_ssize_t m = points.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(b, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = out
    cdef Py_ssize_t i, j, k, best
    cdef double d2, best_d2, diff
    for i in range(b):
        best = 0
        best_d2 = 0.0
        for j in range(m):
            d2 = 0.0
            for k in range(n):
                diff = y[i, k] - points[j, k]
                d2 = d2 + diff * diff
            if j == 0 or d2 < best_d2:
                best_d2 = d2
                best = j
        idx[i] = best
    return out


def penalty_value_grad(const double[::1] x, Py_ssize_t m, double mu,
                       int objective_code, double dmin_sq):
    """Penalized packing objective and analytic gradient (see `_ref.py`)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.zeros(3 * m)
    cdef double[::1] grad = grad_arr
    cdef Py_ssize_t i, j
    cdef double value = 0.0
    cdef double dx, dy, dz, hinge, coef, cone, neg
    cdef double xi0, xi1, xi2

    if objective_code == 0:
        for i in range(3 * m):
            value += x[i] * x[i]
            grad[i] += 2.0 / m * x[i]
        value /= m
    else:
        for i in range(m):
            value += x[3 * i]
            grad[3 * i] += 1.0 / m
        value /= m

    for i in range(m):
        for j in range(i + 1, m):
            dx = x[3 * i] - x[3 * j]
            dy = x[3 * i + 1] - x[3 * j + 1]
            dz = x[3 * i + 2] - x[3 * j + 2]
            hinge = dmin_sq - (dx * dx + dy * dy + dz * dz)
            if hinge > 0.0:
                value += mu * hinge * hinge
                coef = -4.0 * mu * hinge
                grad[3 * i] += coef * dx
                grad[3 * i + 1] += coef * dy
                grad[3 * i + 2] += coef * dz
                grad[3 * j] -= coef * dx
                grad[3 * j + 1] -= coef * dy
                grad[3 * j + 2] -= coef * dz

    for i in range(m):
        xi0 = x[3 * i]
        xi1 = x[3 * i + 1]
        xi2 = x[3 * i + 2]
        cone = 2.0 * (xi1 * xi1 + xi2 * xi2) - xi0 * xi0
        if cone > 0.0:
            value += mu * cone * cone
            grad[3 * i] += -4.0 * mu * cone * xi0
            grad[3 * i + 1] += 8.0 * mu * cone * xi1
            grad[3 * i + 2] += 8.0 * mu * cone * xi2
        if xi0 < 0.0:
            neg = -xi0
            value += mu * neg * neg
            grad[3 * i] += -2.0 * mu * neg
    return value, grad_arr
