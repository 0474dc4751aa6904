"""Constitutive law, per-element virtual-work rows and the assembled
discrete equilibrium row.

The assembled row omega sums every elastic element's contribution and
subtracts the nodal load row; a static solution is omega = 0. No element
energy is assumed to exist behind omega, so convergence is always monitored
on |omega|, never on an energy value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .geometry import DegenerateElementError, ElementGeometry, SparseRow
from .model import ElementGroup, ElementTables, Model, build_tables

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class StressTensor:
    mixed: np.ndarray   # T^i_k, generally not symmetric
    raised: np.ndarray  # T^ij = T^i_k g^kj, symmetric
    strain: np.ndarray  # g_lk - rest metric


@dataclass(frozen=True)
class AssembledForce:
    omega: np.ndarray
    grad_norm: float


def constitutive_linear(
    geom: ElementGeometry, rest_metric, stiffness: float
) -> StressTensor:
    """Linear zero-Poisson material: mixed stress E g^il (g_lk - rest_lk)."""
    rest = np.asarray(rest_metric, dtype=float)
    nd = geom.dim
    if rest.shape != (nd, nd):
        raise ValueError(f"rest metric shape {rest.shape} does not match {nd}D element")
    strain = geom.metric - rest
    mixed = stiffness * (geom.inverse_metric @ strain)
    raised = mixed @ geom.inverse_metric
    asym = float(np.max(np.abs(raised - raised.T)))
    if asym > _SYMMETRY_TOL * max(1.0, float(np.max(np.abs(raised)))):
        raise RuntimeError(f"raised stress lost symmetry (deviation {asym:.3e})")
    return StressTensor(mixed=mixed, raised=raised, strain=strain)


def element_omega(
    geom: ElementGeometry, stress: StressTensor, grads
) -> SparseRow:
    """Virtual-work row of one element: half the measure times the raised
    stress contracted with the metric gradients.

    With a unit mixed stress this reproduces the gradient of the element
    measure exactly, for all three element dimensions.
    """
    nd = geom.dim
    acc: dict[int, float] = {}
    for i in range(nd):
        for j in range(nd):
            coeff = 0.5 * geom.measure * stress.raised[i, j]
            row = grads[i][j]
            for k, v in zip(row.indices, row.values):
                acc[k] = acc.get(k, 0.0) + coeff * v
    indices = tuple(sorted(acc))
    return SparseRow(indices=indices, values=tuple(acc[k] for k in indices))


def _check_degenerate(group: ElementGroup, det: np.ndarray, scale: np.ndarray, nd: int):
    bad = det <= 1e-12 * scale ** (2 * nd)
    if np.any(bad):
        eid = int(group.ids[int(np.argmax(bad))])
        raise DegenerateElementError(
            f"element {eid}: degenerate (det(metric)={det[np.argmax(bad)]:.3e})"
        )


def assemble_omega(
    model: Model, x, tables: ElementTables | None = None
) -> AssembledForce:
    """Assembled equilibrium row over the free DOFs at positions x.

    Elements are accumulated in ascending-id order, so repeated runs on the
    same input are bit-identical.
    """
    if tables is None:
        tables = build_tables(model)
    x = np.asarray(x, dtype=float)
    if x.shape != (tables.n,):
        raise ValueError(f"position vector length mismatch: expected {tables.n}")
    X = tables.coords(x)
    kernel = backends.active_backend()
    out = np.zeros(tables.n)

    for group, fn, nd in (
        (tables.elastic_lines, kernel.omega_line, 1),
        (tables.elastic_tris, kernel.omega_tri, 2),
        (tables.elastic_tets, kernel.omega_tet, 3),
    ):
        if len(group) == 0:
            continue
        rows, det, scale = fn(X[group.conn], group.stiffness, group.rest_metric)
        _check_degenerate(group, det, scale, nd)
        tables.accumulate(out, group, rows)

    out -= tables.load_row
    return AssembledForce(omega=out, grad_norm=float(np.linalg.norm(out)))
