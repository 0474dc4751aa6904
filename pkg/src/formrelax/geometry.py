"""Per-element geometry: base vectors, metric, explicit tiny inverses,
measures and the closed-form gradient rows.

Everything here works on one element at a time and is the reference the
batched backends are tested against. Conventions: an element of dimension N
(line, triangle, tetrahedron) has N+1 nodes p_1..p_{N+1}; its base vectors
are g_i = p_i - p_{i+1}, the metric is g_ij = g_i . g_j, and the measure is
sqrt(det g) times 1, 1/2 or 1/6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DofMap, Node, NODES_PER_KIND

DEGENERACY_RTOL = 1e-12


class DegenerateElementError(ValueError):
    """Element has (numerically) zero measure; the inverse metric blows up."""


@dataclass(frozen=True)
class ElementGeometry:
    base_vectors: np.ndarray    # (N, 3)
    metric: np.ndarray          # (N, N)
    inverse_metric: np.ndarray  # (N, N)
    det: float
    measure: float              # L, S or V

    @property
    def dim(self) -> int:
        return self.metric.shape[0]


@dataclass(frozen=True)
class SparseRow:
    """Row vector over the unknowns, supported on one element's free DOFs."""

    indices: tuple[int, ...]
    values: tuple[float, ...]

    def to_dense(self, n: int) -> np.ndarray:
        row = np.zeros(n)
        row[list(self.indices)] = self.values
        return row

    def dot(self, x: np.ndarray) -> float:
        return float(sum(v * x[i] for i, v in zip(self.indices, self.values)))


_MEASURE_FACTOR = {1: 1.0, 2: 0.5, 3: 1.0 / 6.0}


def _explicit_inverse(metric: np.ndarray, det: float) -> np.ndarray:
    """Closed-form inverse for 1x1, 2x2 and 3x3 matrices."""
    nd = metric.shape[0]
    if nd == 1:
        return np.array([[1.0 / metric[0, 0]]])
    if nd == 2:
        return (
            np.array(
                [
                    [metric[1, 1], -metric[0, 1]],
                    [-metric[1, 0], metric[0, 0]],
                ]
            )
            / det
        )
    # 3x3: columns are cross products of pairs of metric columns
    c1, c2, c3 = metric[:, 0], metric[:, 1], metric[:, 2]
    inv = np.column_stack([np.cross(c2, c3), np.cross(c3, c1), np.cross(c1, c2)]) / det
    return inv


def element_geometry(positions, kind: str) -> ElementGeometry:
    """Base vectors, metric, explicit inverse and measure of one element."""
    pos = np.asarray(positions, dtype=float)
    width = NODES_PER_KIND[kind]
    if pos.shape != (width, 3):
        raise ValueError(f"{kind} takes {width} positions, got shape {pos.shape}")
    nd = width - 1
    base = pos[:-1] - pos[1:]
    metric = base @ base.T
    det = float(np.linalg.det(metric))
    scale = float(np.max(np.linalg.norm(base, axis=1)))
    if det <= DEGENERACY_RTOL * scale ** (2 * nd):
        raise DegenerateElementError(
            f"degenerate {kind}: det(metric)={det:.3e} at scale {scale:.3e}"
        )
    return ElementGeometry(
        base_vectors=base,
        metric=metric,
        inverse_metric=_explicit_inverse(metric, det),
        det=det,
        measure=_MEASURE_FACTOR[nd] * float(np.sqrt(det)),
    )


def _sparse_from_nodes(
    nodes: tuple[Node, ...], per_node: np.ndarray, dofmap: DofMap
) -> SparseRow:
    """Assemble (node, 3-vector) gradient pieces into a row, dropping fixed DOFs."""
    indices: list[int] = []
    values: list[float] = []
    for node, vec in zip(nodes, per_node):
        dofs = dofmap.indices_for_node(node.id)
        if dofs is None:
            continue
        indices.extend(dofs)
        values.extend(float(v) for v in vec)
    return SparseRow(indices=tuple(indices), values=tuple(values))


def grad_length(p: Node, q: Node, dofmap: DofMap) -> SparseRow:
    """Gradient of the segment length over the two nodes' free DOFs."""
    pv, qv = np.asarray(p.pos, dtype=float), np.asarray(q.pos, dtype=float)
    d = pv - qv
    length = float(np.linalg.norm(d))
    if length <= 1e-12:
        raise DegenerateElementError("zero-length line element")
    return _sparse_from_nodes((p, q), np.stack([d / length, -d / length]), dofmap)


def grad_area(p: Node, q: Node, r: Node, dofmap: DofMap) -> SparseRow:
    """Gradient of the triangle area.

    The per-node pieces are (1/2) n x (opposite edge) with n the unit normal;
    a displacement orthogonal to the element plane produces no area change.
    """
    pv = np.asarray(p.pos, dtype=float)
    qv = np.asarray(q.pos, dtype=float)
    rv = np.asarray(r.pos, dtype=float)
    normal = np.cross(qv - pv, rv - pv)
    nnorm = float(np.linalg.norm(normal))
    if nnorm <= 1e-12:
        raise DegenerateElementError("zero-area triangle element")
    unit = normal / nnorm
    pieces = 0.5 * np.stack(
        [np.cross(unit, rv - qv), np.cross(unit, pv - rv), np.cross(unit, qv - pv)]
    )
    return _sparse_from_nodes((p, q, r), pieces, dofmap)


def grad_metric(nodes, kind: str, dofmap: DofMap) -> list[list[SparseRow]]:
    """Gradient rows of every metric component g_ij of one element.

    The (i, j) component couples four node/axis slots: writing u_i for the
    edge p_{i+1} - p_i, node i+1 gains +u_j, node i gains -u_j, node j+1
    gains +u_i and node j gains -u_i (accumulated when indices coincide, so
    the diagonal doubles). The result is symmetric in (i, j) by construction.
    """
    nodes = tuple(nodes)
    width = NODES_PER_KIND[kind]
    if len(nodes) != width:
        raise ValueError(f"{kind} takes {width} nodes, got {len(nodes)}")
    pos = np.asarray([nd.pos for nd in nodes], dtype=float)
    nd_dim = width - 1
    edges = pos[1:] - pos[:-1]  # u_i = p_{i+1} - p_i

    rows: list[list[SparseRow]] = []
    for i in range(nd_dim):
        row_i: list[SparseRow] = []
        for j in range(nd_dim):
            per_node = np.zeros((width, 3))
            per_node[i + 1] += edges[j]
            per_node[i] -= edges[j]
            per_node[j + 1] += edges[i]
            per_node[j] -= edges[i]
            row_i.append(_sparse_from_nodes(nodes, per_node, dofmap))
        rows.append(row_i)
    return rows


# Independent measure formulas, used by tests as oracles for the metric route.

def line_length(p, q) -> float:
    return float(np.linalg.norm(np.subtract(p, q)))


def triangle_area(p, q, r) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(np.subtract(q, p), np.subtract(r, p))))


def tetrahedron_volume(p1, p2, p3, p4) -> float:
    a = np.subtract(p2, p1)
    b = np.subtract(p3, p1)
    c = np.subtract(p4, p1)
    return abs(float(np.dot(a, np.cross(b, c)))) / 6.0
