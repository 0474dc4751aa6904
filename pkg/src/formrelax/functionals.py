"""Form-finding objective over the functional elements and its gradient.

The objective sums weighted powers of element measures: length elements
enter as w L^p with p = 2 or 4, area elements as w S^2. Mixed length/area
models are evaluated by the same routine.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import backends
from .geometry import DegenerateElementError
from .model import ElementTables, Model, build_tables, validate_model


@dataclass(frozen=True)
class FunctionalValue:
    pi: float
    grad: np.ndarray
    grad_norm: float


def eval_pi(model: Model, x, tables: ElementTables | None = None) -> FunctionalValue:
    """Objective value and dense gradient row at positions x."""
    if tables is None:
        tables = build_tables(model)
    x = np.asarray(x, dtype=float)
    if x.shape != (tables.n,):
        raise ValueError(f"position vector length mismatch: expected {tables.n}")
    X = tables.coords(x)
    kernel = backends.active_backend()
    pi = 0.0
    grad = np.zeros(tables.n)

    lines = tables.functional_lines
    if len(lines):
        L, G = kernel.line_rows(X[lines.conn])
        if np.any(L <= 1e-12):
            eid = int(lines.ids[int(np.argmax(L <= 1e-12))])
            raise DegenerateElementError(f"element {eid}: zero-length line")
        p = lines.power.astype(float)
        pi += float(np.sum(lines.weight * L**p))
        coeff = p * lines.weight * L ** (p - 1.0)
        tables.accumulate(grad, lines, coeff[:, None] * G)

    tris = tables.functional_tris
    if len(tris):
        S, G = kernel.tri_rows(X[tris.conn])
        if np.any(S <= 5e-13):
            eid = int(tris.ids[int(np.argmax(S <= 5e-13))])
            raise DegenerateElementError(f"element {eid}: zero-area triangle")
        pi += float(np.sum(tris.weight * S**2))
        tables.accumulate(grad, tris, (2.0 * tris.weight * S)[:, None] * G)

    return FunctionalValue(pi=pi, grad=grad, grad_norm=float(np.linalg.norm(grad)))


def update_weight(model: Model, element_id: int, weight: float) -> Model:
    """New model with one functional element's weight replaced."""
    el = model.element_by_id(element_id)
    if el.role != "functional":
        raise ValueError(f"element {element_id} has role '{el.role}', not functional")
    if weight < 0:
        raise ValueError(f"weight must be >= 0, got {weight}")
    elements = tuple(
        replace(e, weight=float(weight)) if e.id == element_id else e
        for e in model.elements
    )
    return validate_model(replace(model, elements=elements))
