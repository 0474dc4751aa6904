# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled element kernels; drop-in replacement for python_backend.

Same contracts and operation order as the numpy fallback, just scalar loops
over the element batch.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

name = "compiled"


def line_rows(P):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] L = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.empty((m, 6))
    cdef Py_ssize_t k, c
    cdef double dx, dy, dz, ln, inv
    for k in range(m):
        dx = Pc[k, 0, 0] - Pc[k, 1, 0]
        dy = Pc[k, 0, 1] - Pc[k, 1, 1]
        dz = Pc[k, 0, 2] - Pc[k, 1, 2]
        ln = sqrt(dx * dx + dy * dy + dz * dz)
        L[k] = ln
        inv = 1.0 / ln if ln != 0.0 else 0.0
        G[k, 0] = dx * inv
        G[k, 1] = dy * inv
        G[k, 2] = dz * inv
        G[k, 3] = -dx * inv
        G[k, 4] = -dy * inv
        G[k, 5] = -dz * inv
    return L, G


def tri_rows(P):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = Pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.empty((m, 9))
    cdef Py_ssize_t k
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double nx, ny, nz, nn, inv
    cdef double ax, ay, az
    for k in range(m):
        e1x = Pc[k, 1, 0] - Pc[k, 0, 0]
        e1y = Pc[k, 1, 1] - Pc[k, 0, 1]
        e1z = Pc[k, 1, 2] - Pc[k, 0, 2]
        e2x = Pc[k, 2, 0] - Pc[k, 0, 0]
        e2y = Pc[k, 2, 1] - Pc[k, 0, 1]
        e2z = Pc[k, 2, 2] - Pc[k, 0, 2]
        nx = e1y * e2z - e1z * e2y
        ny = e1z * e2x - e1x * e2z
        nz = e1x * e2y - e1y * e2x
        nn = sqrt(nx * nx + ny * ny + nz * nz)
        S[k] = 0.5 * nn
        inv = 1.0 / nn if nn != 0.0 else 0.0
        nx *= inv
        ny *= inv
        nz *= inv
        # r - q
        ax = Pc[k, 2, 0] - Pc[k, 1, 0]
        ay = Pc[k, 2, 1] - Pc[k, 1, 1]
        az = Pc[k, 2, 2] - Pc[k, 1, 2]
        G[k, 0] = 0.5 * (ny * az - nz * ay)
        G[k, 1] = 0.5 * (nz * ax - nx * az)
        G[k, 2] = 0.5 * (nx * ay - ny * ax)
        # p - r
        ax = Pc[k, 0, 0] - Pc[k, 2, 0]
        ay = Pc[k, 0, 1] - Pc[k, 2, 1]
        az = Pc[k, 0, 2] - Pc[k, 2, 2]
        G[k, 3] = 0.5 * (ny * az - nz * ay)
        G[k, 4] = 0.5 * (nz * ax - nx * az)
        G[k, 5] = 0.5 * (nx * ay - ny * ax)
        # q - p
        ax = Pc[k, 1, 0] - Pc[k, 0, 0]
        ay = Pc[k, 1, 1] - Pc[k, 0, 1]
        az = Pc[k, 1, 2] - Pc[k, 0, 2]
        G[k, 6] = 0.5 * (ny * az - nz * ay)
        G[k, 7] = 0.5 * (nz * ax - nx * az)
        G[k, 8] = 0.5 * (nx * ay - ny * ax)
    return S, G


def omega_line(P, stiffness, rest_metric):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] E = np.ascontiguousarray(stiffness, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] R = np.ascontiguousarray(rest_metric, dtype=np.float64)
    cdef Py_ssize_t m = Pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rows = np.empty((m, 6))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scale = np.empty(m)
    cdef Py_ssize_t k
    cdef double ux, uy, uz, g11, inv, T, measure, f
    for k in range(m):
        ux = Pc[k, 1, 0] - Pc[k, 0, 0]
        uy = Pc[k, 1, 1] - Pc[k, 0, 1]
        uz = Pc[k, 1, 2] - Pc[k, 0, 2]
        g11 = ux * ux + uy * uy + uz * uz
        det[k] = g11
        scale[k] = sqrt(g11)
        if g11 != 0.0:
            inv = 1.0 / g11
            T = E[k] * inv * (g11 - R[k, 0, 0]) * inv
            measure = scale[k]
            f = measure * T
        else:
            f = 0.0
        rows[k, 0] = -f * ux
        rows[k, 1] = -f * uy
        rows[k, 2] = -f * uz
        rows[k, 3] = f * ux
        rows[k, 4] = f * uy
        rows[k, 5] = f * uz
    return rows, det, scale


def omega_tri(P, stiffness, rest_metric):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] E = np.ascontiguousarray(stiffness, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] R = np.ascontiguousarray(rest_metric, dtype=np.float64)
    cdef Py_ssize_t m = Pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rows = np.empty((m, 9))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scale = np.empty(m)
    cdef Py_ssize_t k, c
    cdef double u0[3]
    cdef double u1[3]
    cdef double g11, g12, g22, d, i11, i12, i22
    cdef double e11, e12, e22, a11, a12, a21, a22
    cdef double T11, T12, T21, T22, measure
    cdef double v0c, v1c
    for k in range(m):
        for c in range(3):
            u0[c] = Pc[k, 1, c] - Pc[k, 0, c]
            u1[c] = Pc[k, 2, c] - Pc[k, 1, c]
        g11 = u0[0] * u0[0] + u0[1] * u0[1] + u0[2] * u0[2]
        g12 = u0[0] * u1[0] + u0[1] * u1[1] + u0[2] * u1[2]
        g22 = u1[0] * u1[0] + u1[1] * u1[1] + u1[2] * u1[2]
        d = g11 * g22 - g12 * g12
        det[k] = d
        scale[k] = sqrt(g11 if g11 > g22 else g22)
        if d != 0.0:
            i11 = g22 / d
            i12 = -g12 / d
            i22 = g11 / d
            e11 = g11 - R[k, 0, 0]
            e12 = g12 - R[k, 0, 1]
            e22 = g22 - R[k, 1, 1]
            a11 = i11 * e11 + i12 * e12
            a12 = i11 * e12 + i12 * e22
            a21 = i12 * e11 + i22 * e12
            a22 = i12 * e12 + i22 * e22
            T11 = E[k] * (a11 * i11 + a12 * i12)
            T12 = E[k] * (a11 * i12 + a12 * i22)
            T21 = E[k] * (a21 * i11 + a22 * i12)
            T22 = E[k] * (a21 * i12 + a22 * i22)
            measure = 0.5 * sqrt(d)
        else:
            T11 = T12 = T21 = T22 = 0.0
            measure = 0.0
        for c in range(3):
            v0c = measure * (T11 * u0[c] + T12 * u1[c])
            v1c = measure * (T21 * u0[c] + T22 * u1[c])
            rows[k, c] = -v0c
            rows[k, 3 + c] = v0c - v1c
            rows[k, 6 + c] = v1c
    return rows, det, scale


def omega_tet(P, stiffness, rest_metric):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] E = np.ascontiguousarray(stiffness, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] R = np.ascontiguousarray(rest_metric, dtype=np.float64)
    cdef Py_ssize_t m = Pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rows = np.empty((m, 12))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scale = np.empty(m)
    cdef Py_ssize_t k, c
    cdef double u0[3]
    cdef double u1[3]
    cdef double u2[3]
    cdef double g11, g12, g13, g22, g23, g33, d, s
    cdef double i11, i12, i13, i22, i23, i33
    cdef double e11, e12, e13, e22, e23, e33
    cdef double a11, a12, a13, a21, a22, a23, a31, a32, a33
    cdef double T11, T12, T13, T21, T22, T23, T31, T32, T33
    cdef double measure, v0c, v1c, v2c
    for k in range(m):
        for c in range(3):
            u0[c] = Pc[k, 1, c] - Pc[k, 0, c]
            u1[c] = Pc[k, 2, c] - Pc[k, 1, c]
            u2[c] = Pc[k, 3, c] - Pc[k, 2, c]
        g11 = u0[0] * u0[0] + u0[1] * u0[1] + u0[2] * u0[2]
        g22 = u1[0] * u1[0] + u1[1] * u1[1] + u1[2] * u1[2]
        g33 = u2[0] * u2[0] + u2[1] * u2[1] + u2[2] * u2[2]
        g12 = u0[0] * u1[0] + u0[1] * u1[1] + u0[2] * u1[2]
        g13 = u0[0] * u2[0] + u0[1] * u2[1] + u0[2] * u2[2]
        g23 = u1[0] * u2[0] + u1[1] * u2[1] + u1[2] * u2[2]
        d = (
            g11 * (g22 * g33 - g23 * g23)
            - g12 * (g12 * g33 - g23 * g13)
            + g13 * (g12 * g23 - g22 * g13)
        )
        det[k] = d
        s = g11 if g11 > g22 else g22
        if g33 > s:
            s = g33
        scale[k] = sqrt(s)
        if d != 0.0:
            i11 = (g22 * g33 - g23 * g23) / d
            i12 = (g13 * g23 - g12 * g33) / d
            i13 = (g12 * g23 - g13 * g22) / d
            i22 = (g11 * g33 - g13 * g13) / d
            i23 = (g12 * g13 - g11 * g23) / d
            i33 = (g11 * g22 - g12 * g12) / d
            e11 = g11 - R[k, 0, 0]
            e12 = g12 - R[k, 0, 1]
            e13 = g13 - R[k, 0, 2]
            e22 = g22 - R[k, 1, 1]
            e23 = g23 - R[k, 1, 2]
            e33 = g33 - R[k, 2, 2]
            a11 = i11 * e11 + i12 * e12 + i13 * e13
            a12 = i11 * e12 + i12 * e22 + i13 * e23
            a13 = i11 * e13 + i12 * e23 + i13 * e33
            a21 = i12 * e11 + i22 * e12 + i23 * e13
            a22 = i12 * e12 + i22 * e22 + i23 * e23
            a23 = i12 * e13 + i22 * e23 + i23 * e33
            a31 = i13 * e11 + i23 * e12 + i33 * e13
            a32 = i13 * e12 + i23 * e22 + i33 * e23
            a33 = i13 * e13 + i23 * e23 + i33 * e33
            T11 = E[k] * (a11 * i11 + a12 * i12 + a13 * i13)
            T12 = E[k] * (a11 * i12 + a12 * i22 + a13 * i23)
            T13 = E[k] * (a11 * i13 + a12 * i23 + a13 * i33)
            T21 = E[k] * (a21 * i11 + a22 * i12 + a23 * i13)
            T22 = E[k] * (a21 * i12 + a22 * i22 + a23 * i23)
            T23 = E[k] * (a21 * i13 + a22 * i23 + a23 * i33)
            T31 = E[k] * (a31 * i11 + a32 * i12 + a33 * i13)
            T32 = E[k] * (a31 * i12 + a32 * i22 + a33 * i23)
            T33 = E[k] * (a31 * i13 + a32 * i23 + a33 * i33)
            measure = sqrt(d) / 6.0
        else:
            T11 = T12 = T13 = T21 = T22 = T23 = T31 = T32 = T33 = 0.0
            measure = 0.0
        for c in range(3):
            v0c = measure * (T11 * u0[c] + T12 * u1[c] + T13 * u2[c])
            v1c = measure * (T21 * u0[c] + T22 * u1[c] + T23 * u2[c])
            v2c = measure * (T31 * u0[c] + T32 * u1[c] + T33 * u2[c])
            rows[k, c] = -v0c
            rows[k, 3 + c] = v0c - v1c
            rows[k, 6 + c] = v1c - v2c
            rows[k, 9 + c] = v2c
    return rows, det, scale
