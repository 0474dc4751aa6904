"""Central finite-difference oracles for verifying analytic gradient rows.

Used by the test suite and by the ``check-gradients`` CLI command. The step
is scaled per coordinate, h_i = base * max(1, |x_i|), balancing truncation
against rounding for double precision.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

DEFAULT_STEP = 1e-6


def central_diff(f: Callable[[np.ndarray], float], x, base: float = DEFAULT_STEP) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = base * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (f(xp) - f(xm)) / (2.0 * h)
    return grad


def central_diff_vector(
    f: Callable[[np.ndarray], np.ndarray], x, base: float = DEFAULT_STEP
) -> np.ndarray:
    """Jacobian of a vector function by central differences, rows = outputs."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = base * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2.0 * h)
    return jac


def relative_error(a, b, floor: float = 1e-12) -> float:
    """Norm of the difference over the larger norm, floored for zero pairs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), floor)
    return float(np.linalg.norm(a - b)) / denom


def omega_fd_row(positions, kind: str, stiffness: float, rest_metric) -> np.ndarray:
    """Independent evaluation of one elastic element's force row.

    The row is not the gradient of any scalar for 2D/3D elements, so a
    plain FD of an energy is impossible. What can be checked independently
    is the one derivative inside the formula: this recomputes the row as
    half the measure times the stress contracted with *finite-difference*
    metric gradients (stress and measure frozen at the evaluation point).
    """
    from .forces import constitutive_linear
    from .geometry import element_geometry

    pos = np.asarray(positions, dtype=float)
    count = pos.shape[0]
    geom = element_geometry(pos, kind)
    stress = constitutive_linear(geom, rest_metric, stiffness)
    nd = geom.dim
    row = np.zeros(3 * count)
    for i in range(nd):
        for j in range(nd):
            def metric_ij(flat, i=i, j=j):
                return element_geometry(flat.reshape(count, 3), kind).metric[i, j]

            fd = central_diff(metric_ij, pos.ravel())
            row += 0.5 * geom.measure * stress.raised[i, j] * fd
    return row
