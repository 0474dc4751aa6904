"""Equality constraints on element lengths: Jacobian/residual assembly, the
least-norm multiplier estimate and the relaxed residual correction.

The multipliers are obtained from the minimum-norm solution of
lambda . J = -grad_w, which makes the constrained gradient unique and equal
to the projection of grad_w onto the tangent space of the constraint
surface. The correction step -J^+ r lives in the orthogonal complement, so
descent and constraint restoration act on decoupled subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .geometry import DegenerateElementError
from .model import ElementTables, Model, build_tables

PIVOT_RTOL = 1e-12
TIKHONOV_FACTOR = 1e-10


@dataclass
class ConstraintSystem:
    jacobian: np.ndarray        # (r, n), row k = length gradient of element k
    residual: np.ndarray        # (r,), current length minus target
    element_ids: np.ndarray     # (r,), ascending
    multipliers: np.ndarray | None = None

    @property
    def r(self) -> int:
        return self.jacobian.shape[0]


def build_constraints(
    model: Model, x, tables: ElementTables | None = None
) -> ConstraintSystem:
    """Jacobian and residual of the length constraints at positions x."""
    if tables is None:
        tables = build_tables(model)
    group = tables.constrained
    if len(group) == 0:
        raise ValueError("model has no constrained elements")
    x = np.asarray(x, dtype=float)
    X = tables.coords(x)
    kernel = backends.active_backend()
    L, G = kernel.line_rows(X[group.conn])
    if np.any(L <= 1e-12):
        eid = int(group.ids[int(np.argmax(L <= 1e-12))])
        raise DegenerateElementError(f"element {eid}: zero-length constrained line")
    J = np.zeros((len(group), tables.n))
    keep = group.dofs >= 0
    rows = np.repeat(np.arange(len(group)), keep.sum(axis=1))
    J[rows, group.dofs[keep]] = G[keep]
    return ConstraintSystem(
        jacobian=J, residual=L - group.target, element_ids=group.ids.copy()
    )


def _cholesky_spd(G: np.ndarray) -> np.ndarray | None:
    """Lower Cholesky factor, or None when a pivot falls under the threshold."""
    r = G.shape[0]
    limit = PIVOT_RTOL * float(np.max(np.diag(G))) if r else 0.0
    L = np.zeros_like(G)
    for i in range(r):
        s = G[i, i] - np.dot(L[i, :i], L[i, :i])
        if s < limit or s <= 0.0:
            return None
        L[i, i] = np.sqrt(s)
        for j in range(i + 1, r):
            L[j, i] = (G[j, i] - np.dot(L[j, :i], L[i, :i])) / L[i, i]
    return L


def _solve_gram(J: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve (J J^T) y = b, shifting the diagonal when the factorization
    detects near-singularity. Returns (y, regularized)."""
    r = J.shape[0]
    G = J @ J.T
    L = _cholesky_spd(G)
    regularized = False
    if L is None:
        regularized = True
        trace = float(np.trace(G))
        if trace <= 0.0:
            # all-zero Jacobian: no useful direction, report zeros
            return np.zeros(r), True
        L = _cholesky_spd(G + (TIKHONOV_FACTOR * trace / r) * np.eye(r))
        if L is None:
            return np.zeros(r), True
    z = np.zeros(r)
    for i in range(r):
        z[i] = (b[i] - np.dot(L[i, :i], z[:i])) / L[i, i]
    y = np.zeros(r)
    for i in range(r - 1, -1, -1):
        y[i] = (z[i] - np.dot(L[i + 1 :, i], y[i + 1 :])) / L[i, i]
    return y, regularized


def least_norm_solve(J: np.ndarray, b) -> tuple[np.ndarray, bool]:
    """Least-norm solution J^T (J J^T)^{-1} b of the underdetermined system
    J y = b. Returns (y, regularized)."""
    J = np.asarray(J, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape != (J.shape[0],):
        raise ValueError(f"right-hand side must have length {J.shape[0]}")
    y, regularized = _solve_gram(J, b)
    return J.T @ y, regularized


def dual_estimate(
    grad_w: np.ndarray, system: ConstraintSystem
) -> tuple[np.ndarray, np.ndarray]:
    """Multipliers and constrained gradient for an objective gradient row.

    The multipliers solve lambda (J J^T) = -(grad_w J^T); the returned
    gradient grad_w + lambda J is tangent to the constraint surface. The
    multipliers stay explicit: they are the member reaction forces.
    """
    grad_w = np.asarray(grad_w, dtype=float)
    J = system.jacobian
    if grad_w.shape != (J.shape[1],):
        raise ValueError(f"gradient row must have length {J.shape[1]}")
    y, _ = _solve_gram(J, J @ grad_w)
    lam = -y
    grad = grad_w + lam @ J
    system.multipliers = lam
    return lam, grad


def residual_correction(x, system: ConstraintSystem, relax: float) -> np.ndarray:
    """One relaxed least-norm restoration step toward the constraint surface."""
    if not 0 < relax <= 1:
        raise ValueError(f"relax factor must be in (0, 1], got {relax}")
    x = np.asarray(x, dtype=float)
    step, _ = least_norm_solve(system.jacobian, system.residual)
    return x - relax * step
