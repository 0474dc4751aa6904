"""Numpy implementations of the batched element kernels.

Each function takes an (m, nodes, 3) coordinate block for one homogeneous
group of elements and returns per-element measures and/or local gradient
rows. Index arithmetic is unrolled by hand (the matrices are at most 3x3),
which keeps the operation order identical to the compiled kernels and avoids
LAPACK calls on tiny matrices.

Local row layout: 3 consecutive components (x, y, z) per element node, nodes
in element order.
"""

from __future__ import annotations

import numpy as np

name = "python"


def line_rows(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lengths and length-gradient rows for a batch of line elements.

    Returns (L, G) with L of shape (m,) and G of shape (m, 6); G holds
    (p - q)/L on the first node and its negative on the second.
    """
    P = np.ascontiguousarray(P, dtype=float)
    d = P[:, 0, :] - P[:, 1, :]
    L = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = d * (1.0 / L)[:, None]
    G = np.concatenate([u, -u], axis=1)
    return L, G


def tri_rows(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Areas and area-gradient rows for a batch of triangle elements.

    Returns (S, G) with G of shape (m, 9): per node, half the cross product
    of the unit normal with the opposite edge.
    """
    P = np.ascontiguousarray(P, dtype=float)
    p, q, r = P[:, 0, :], P[:, 1, :], P[:, 2, :]
    N = np.cross(q - p, r - p)
    nn = np.sqrt(N[:, 0] ** 2 + N[:, 1] ** 2 + N[:, 2] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = N * (1.0 / nn)[:, None]
    G = np.empty((P.shape[0], 9))
    G[:, 0:3] = 0.5 * np.cross(unit, r - q)
    G[:, 3:6] = 0.5 * np.cross(unit, p - r)
    G[:, 6:9] = 0.5 * np.cross(unit, q - p)
    return 0.5 * nn, G


def omega_line(
    P: np.ndarray, stiffness: np.ndarray, rest_metric: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Internal-force rows for elastic line elements under the zero-Poisson law.

    Returns (rows, det, scale): rows (m, 6), the metric determinant and the
    max base-vector norm used for degeneracy checks.
    """
    P = np.ascontiguousarray(P, dtype=float)
    u = P[:, 1, :] - P[:, 0, :]
    g11 = u[:, 0] ** 2 + u[:, 1] ** 2 + u[:, 2] ** 2
    det = g11
    scale = np.sqrt(g11)
    measure = scale  # L = sqrt(det)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / g11
        # raised stress T^{11} = E * g^{11} e g^{11}
        T = stiffness * inv * (g11 - rest_metric[:, 0, 0]) * inv
        v = (measure * T)[:, None] * u
    rows = np.concatenate([-v, v], axis=1)
    return rows, det, scale


def _metric2(u0, u1):
    g11 = u0[:, 0] ** 2 + u0[:, 1] ** 2 + u0[:, 2] ** 2
    g12 = u0[:, 0] * u1[:, 0] + u0[:, 1] * u1[:, 1] + u0[:, 2] * u1[:, 2]
    g22 = u1[:, 0] ** 2 + u1[:, 1] ** 2 + u1[:, 2] ** 2
    return g11, g12, g22


def omega_tri(
    P: np.ndarray, stiffness: np.ndarray, rest_metric: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Internal-force rows for elastic triangles; see omega_line."""
    P = np.ascontiguousarray(P, dtype=float)
    u0 = P[:, 1, :] - P[:, 0, :]
    u1 = P[:, 2, :] - P[:, 1, :]
    g11, g12, g22 = _metric2(u0, u1)
    det = g11 * g22 - g12 * g12
    scale = np.sqrt(np.maximum(g11, g22))
    with np.errstate(divide="ignore", invalid="ignore"):
        # explicit 2x2 inverse
        i11, i12, i22 = g22 / det, -g12 / det, g11 / det
        e11 = g11 - rest_metric[:, 0, 0]
        e12 = g12 - rest_metric[:, 0, 1]
        e22 = g22 - rest_metric[:, 1, 1]
        # A = g^-1 e, T = E * A g^-1 (raised, symmetric)
        a11 = i11 * e11 + i12 * e12
        a12 = i11 * e12 + i12 * e22
        a21 = i12 * e11 + i22 * e12
        a22 = i12 * e12 + i22 * e22
        T11 = stiffness * (a11 * i11 + a12 * i12)
        T12 = stiffness * (a11 * i12 + a12 * i22)
        T21 = stiffness * (a21 * i11 + a22 * i12)
        T22 = stiffness * (a21 * i12 + a22 * i22)
        measure = 0.5 * np.sqrt(det)
        # v_i = sum_j T^{ij} u_j, scaled by the element measure
        v0 = measure[:, None] * (T11[:, None] * u0 + T12[:, None] * u1)
        v1 = measure[:, None] * (T21[:, None] * u0 + T22[:, None] * u1)
    rows = np.empty((P.shape[0], 9))
    rows[:, 0:3] = -v0
    rows[:, 3:6] = v0 - v1
    rows[:, 6:9] = v1
    return rows, det, scale


def omega_tet(
    P: np.ndarray, stiffness: np.ndarray, rest_metric: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Internal-force rows for elastic tetrahedra; see omega_line."""
    P = np.ascontiguousarray(P, dtype=float)
    u0 = P[:, 1, :] - P[:, 0, :]
    u1 = P[:, 2, :] - P[:, 1, :]
    u2 = P[:, 3, :] - P[:, 2, :]
    g11 = u0[:, 0] ** 2 + u0[:, 1] ** 2 + u0[:, 2] ** 2
    g22 = u1[:, 0] ** 2 + u1[:, 1] ** 2 + u1[:, 2] ** 2
    g33 = u2[:, 0] ** 2 + u2[:, 1] ** 2 + u2[:, 2] ** 2
    g12 = u0[:, 0] * u1[:, 0] + u0[:, 1] * u1[:, 1] + u0[:, 2] * u1[:, 2]
    g13 = u0[:, 0] * u2[:, 0] + u0[:, 1] * u2[:, 1] + u0[:, 2] * u2[:, 2]
    g23 = u1[:, 0] * u2[:, 0] + u1[:, 1] * u2[:, 1] + u1[:, 2] * u2[:, 2]
    det = (
        g11 * (g22 * g33 - g23 * g23)
        - g12 * (g12 * g33 - g23 * g13)
        + g13 * (g12 * g23 - g22 * g13)
    )
    scale = np.sqrt(np.maximum(np.maximum(g11, g22), g33))
    with np.errstate(divide="ignore", invalid="ignore"):
        # explicit 3x3 inverse via the adjugate of the symmetric metric
        i11 = (g22 * g33 - g23 * g23) / det
        i12 = (g13 * g23 - g12 * g33) / det
        i13 = (g12 * g23 - g13 * g22) / det
        i22 = (g11 * g33 - g13 * g13) / det
        i23 = (g12 * g13 - g11 * g23) / det
        i33 = (g11 * g22 - g12 * g12) / det
        e11 = g11 - rest_metric[:, 0, 0]
        e12 = g12 - rest_metric[:, 0, 1]
        e13 = g13 - rest_metric[:, 0, 2]
        e22 = g22 - rest_metric[:, 1, 1]
        e23 = g23 - rest_metric[:, 1, 2]
        e33 = g33 - rest_metric[:, 2, 2]
        # A = g^-1 e
        a11 = i11 * e11 + i12 * e12 + i13 * e13
        a12 = i11 * e12 + i12 * e22 + i13 * e23
        a13 = i11 * e13 + i12 * e23 + i13 * e33
        a21 = i12 * e11 + i22 * e12 + i23 * e13
        a22 = i12 * e12 + i22 * e22 + i23 * e23
        a23 = i12 * e13 + i22 * e23 + i23 * e33
        a31 = i13 * e11 + i23 * e12 + i33 * e13
        a32 = i13 * e12 + i23 * e22 + i33 * e23
        a33 = i13 * e13 + i23 * e23 + i33 * e33
        # T = E * A g^-1 (raised, symmetric)
        T11 = stiffness * (a11 * i11 + a12 * i12 + a13 * i13)
        T12 = stiffness * (a11 * i12 + a12 * i22 + a13 * i23)
        T13 = stiffness * (a11 * i13 + a12 * i23 + a13 * i33)
        T21 = stiffness * (a21 * i11 + a22 * i12 + a23 * i13)
        T22 = stiffness * (a21 * i12 + a22 * i22 + a23 * i23)
        T23 = stiffness * (a21 * i13 + a22 * i23 + a23 * i33)
        T31 = stiffness * (a31 * i11 + a32 * i12 + a33 * i13)
        T32 = stiffness * (a31 * i12 + a32 * i22 + a33 * i23)
        T33 = stiffness * (a31 * i13 + a32 * i23 + a33 * i33)
        measure = np.sqrt(det) / 6.0
        v0 = measure[:, None] * (
            T11[:, None] * u0 + T12[:, None] * u1 + T13[:, None] * u2
        )
        v1 = measure[:, None] * (
            T21[:, None] * u0 + T22[:, None] * u1 + T23[:, None] * u2
        )
        v2 = measure[:, None] * (
            T31[:, None] * u0 + T32[:, None] * u1 + T33[:, None] * u2
        )
    rows = np.empty((P.shape[0], 12))
    rows[:, 0:3] = -v0
    rows[:, 3:6] = v0 - v1
    rows[:, 6:9] = v1 - v2
    rows[:, 9:12] = v2
    return rows, det, scale
