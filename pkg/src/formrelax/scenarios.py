"""Parametric generators for the benchmark model families.

Each generator emits an ordinary model document: a radial cable net with
five fixed perimeter points, prism tensegrities (the classic 3-strut unit
and its k-strut ring generalization), a hanging elastic membrane, box-mesh
cantilever and buckling bars, and a mast-plus-membrane mixed model. Numeric
parameters have defaults matching the published experiments where those are
known; geometry that is available only as a figure uses a documented layout
instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Element, Load, Model, Node, SolverParams, validate_model

KINDS = (
    "cable_net",
    "simplex_tensegrity",
    "ring_tensegrity",
    "handkerchief",
    "cantilever",
    "buckling_bar",
    "cable_membrane_mixed",
)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    params: dict = field(default_factory=dict)


def generate(spec: ScenarioSpec) -> Model:
    if spec.kind not in KINDS:
        raise ValueError(f"unknown scenario kind '{spec.kind}'")
    builder = globals()[f"_build_{spec.kind}"]
    model = builder(**spec.params)
    return validate_model(model)


def scenario_counts(model: Model) -> dict:
    """Summary counts for generator output (printed by the CLI)."""
    roles: dict[str, int] = {}
    for el in model.elements:
        roles[el.role] = roles.get(el.role, 0) + 1
    return {
        "nodes": len(model.nodes),
        "fixed_nodes": sum(1 for n in model.nodes if n.fixed),
        "elements": len(model.elements),
        "by_role": roles,
        "loads": len(model.loads),
    }


# ---------------------------------------------------------------------------
# cable net
# ---------------------------------------------------------------------------


def _build_cable_net(
    spokes: int = 20,
    rings: int = 5,
    radius: float = 5.0,
    height: float = 3.0,
    weight: float = 1.0,
    boundary_factor: float = 1.0,
) -> Model:
    """Radial/ring net spanned between 5 fixed perimeter points.

    Layout: regular pentagon of fixed anchors at the given radius with
    alternating heights 0 and `height`; `spokes` radial chains of `rings`
    free nodes each, closed by ring cables. With the defaults this gives
    spokes*(2*rings+1) = 220 members. `boundary_factor` scales the weight of
    the outermost ring and the anchor segments.
    """
    if spokes % 5:
        raise ValueError("spokes must be a multiple of 5 (five anchors)")
    if rings < 1:
        raise ValueError("rings must be >= 1")
    nodes = [Node(0, (0.0, 0.0, 0.0), False)]  # center
    nid = 1
    ring_ids = []
    for i in range(1, rings + 1):
        r = radius * i / (rings + 1)
        row = []
        for s in range(spokes):
            a = 2.0 * math.pi * s / spokes
            nodes.append(Node(nid, (r * math.cos(a), r * math.sin(a), 0.0), False))
            row.append(nid)
            nid += 1
        ring_ids.append(row)
    anchor_ids = []
    for k in range(5):
        a = 2.0 * math.pi * k / 5
        z = 0.0 if k % 2 == 0 else height
        nodes.append(Node(nid, (radius * math.cos(a), radius * math.sin(a), z), True))
        anchor_ids.append(nid)
        nid += 1

    elements = []
    eid = 0

    def cable(a, b, w):
        nonlocal eid
        elements.append(Element(eid, "line", (a, b), "functional", weight=w, power=2))
        eid += 1

    for s in range(spokes):
        cable(0, ring_ids[0][s], weight)
    for i in range(rings - 1):
        for s in range(spokes):
            cable(ring_ids[i][s], ring_ids[i + 1][s], weight)
    per_anchor = spokes // 5
    for s in range(spokes):
        cable(ring_ids[-1][s], anchor_ids[s // per_anchor], weight * boundary_factor)
    for i in range(rings):
        w = weight * (boundary_factor if i == rings - 1 else 1.0)
        for s in range(spokes):
            cable(ring_ids[i][s], ring_ids[i][(s + 1) % spokes], w)

    return Model(
        nodes=tuple(nodes),
        elements=tuple(elements),
        solver=SolverParams(method="three_term", alpha=0.2),
    )


# ---------------------------------------------------------------------------
# tensegrities
# ---------------------------------------------------------------------------


def _build_ring_tensegrity(
    struts: int = 6,
    target: float = 10.0,
    weight: float = 1.0,
    radius: float = 4.0,
    height: float = 7.0,
) -> Model:
    """Prism tensegrity ring: k struts between two k-gon cable rings.

    Bottom nodes 1..k, top nodes k+1..2k; strut i runs from bottom node i to
    the top node one position ahead. Cables (both rings and the verticals)
    take the quartic length objective; strut lengths are constrained.
    """
    if struts < 3:
        raise ValueError("a ring tensegrity needs at least 3 struts")
    k = struts
    nodes = []
    for i in range(k):
        a = 2.0 * math.pi * i / k
        nodes.append(Node(1 + i, (radius * math.cos(a), radius * math.sin(a), 0.0), False))
    for i in range(k):
        a = 2.0 * math.pi * i / k + math.pi / k
        nodes.append(
            Node(1 + k + i, (radius * math.cos(a), radius * math.sin(a), height), False)
        )
    bottom = list(range(1, k + 1))
    top = list(range(k + 1, 2 * k + 1))

    elements = []
    eid = 0
    for i in range(k):  # cables first, then struts: ids grouped by role
        elements.append(Element(eid, "line", (bottom[i], bottom[(i + 1) % k]),
                                "functional", weight=weight, power=4))
        eid += 1
    for i in range(k):
        elements.append(Element(eid, "line", (top[i], top[(i + 1) % k]),
                                "functional", weight=weight, power=4))
        eid += 1
    for i in range(k):
        elements.append(Element(eid, "line", (bottom[i], top[i]),
                                "functional", weight=weight, power=4))
        eid += 1
    for i in range(k):
        elements.append(Element(eid, "line", (bottom[i], top[(i + 1) % k]),
                                "constrained", target=target))
        eid += 1

    return Model(
        nodes=tuple(nodes),
        elements=tuple(elements),
        solver=SolverParams(method="three_term", alpha=0.2),
    )


def _build_simplex_tensegrity(target: float = 10.0, weight: float = 1.0) -> Model:
    """Three-strut prism: bottom triangle 1-2-3, top 4-5-6, struts
    {1-5, 2-6, 3-4}, cables = both triangle edge sets plus the verticals."""
    return _build_ring_tensegrity(struts=3, target=target, weight=weight)


# ---------------------------------------------------------------------------
# elastic membrane
# ---------------------------------------------------------------------------


def _build_handkerchief(
    size: float = 8.0,
    divisions: int = 8,
    load: float = 0.1,
    stiffness: float = 50.0,
    corners: int = 1,
) -> Model:
    """Square elastic sheet hanged by one or two corners under dead load.

    Triangulated `divisions` x `divisions` grid; the rest metric is the flat
    initial shape, every free node carries a z-load of -`load`.
    """
    if corners not in (1, 2):
        raise ValueError("corners must be 1 or 2")
    n1 = divisions + 1
    h = size / divisions
    hang = {(0, 0)} if corners == 1 else {(0, 0), (divisions, 0)}
    nodes = []
    index = {}
    nid = 0
    for j in range(n1):
        for i in range(n1):
            index[(i, j)] = nid
            nodes.append(Node(nid, (i * h, j * h, 0.0), (i, j) in hang))
            nid += 1
    elements = []
    eid = 0
    for j in range(divisions):
        for i in range(divisions):
            a, b = index[(i, j)], index[(i + 1, j)]
            c, d = index[(i + 1, j + 1)], index[(i, j + 1)]
            for tri in ((a, b, c), (a, c, d)):
                elements.append(
                    Element(eid, "triangle", tri, "elastic", stiffness=stiffness)
                )
                eid += 1
    loads = tuple(
        Load(n.id, (0.0, 0.0, -load)) for n in nodes if not n.fixed
    )
    return Model(
        nodes=tuple(nodes),
        elements=tuple(elements),
        loads=loads,
        solver=SolverParams(method="three_term", alpha=0.2, grad_tol=1e-2),
    )


# ---------------------------------------------------------------------------
# box meshes: cantilever and buckling bar
# ---------------------------------------------------------------------------

# Kuhn subdivision of a unit cell into 6 tetrahedra sharing the main
# diagonal; conforming across neighboring cells.
_CUBE_TETS = (
    ((0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)),
    ((0, 0, 0), (1, 0, 0), (1, 0, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 1, 1)),
    ((0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)),
)


def _box_mesh(cells, spacing, fixed_plane):
    """Node grid and tet connectivity for a box of (nx, ny, nz) unit cells.

    fixed_plane is a predicate on integer grid coordinates marking clamped
    nodes.
    """
    nx, ny, nz = cells
    index = {}
    nodes = []
    nid = 0
    for k in range(nz + 1):
        for j in range(ny + 1):
            for i in range(nx + 1):
                index[(i, j, k)] = nid
                nodes.append(
                    Node(nid, (i * spacing, j * spacing, k * spacing),
                         fixed_plane(i, j, k))
                )
                nid += 1
    tets = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                for corners in _CUBE_TETS:
                    tets.append(
                        tuple(index[(i + di, j + dj, k + dk)] for di, dj, dk in corners)
                    )
    return nodes, tets, index


def _build_cantilever(
    length: int = 12,
    section: int = 2,
    stiffness: float = 50.0,
    load: float = 0.05,
) -> Model:
    """Horizontal bar of unit-cube cells (length x section x section),
    clamped at one end, dead load -z on every free node."""
    nodes, tets, _ = _box_mesh(
        (length, section, section), 1.0, lambda i, j, k: i == 0
    )
    elements = tuple(
        Element(eid, "tetrahedron", conn, "elastic", stiffness=stiffness)
        for eid, conn in enumerate(tets)
    )
    loads = tuple(Load(n.id, (0.0, 0.0, -load)) for n in nodes if not n.fixed)
    return Model(
        nodes=tuple(nodes), elements=elements, loads=loads,
        solver=SolverParams(method="three_term", alpha=0.2, grad_tol=1e-2),
    )


def _build_buckling_bar(
    height: int = 12,
    section: int = 2,
    stiffness: float = 50.0,
    load: float = 0.126,
    noise: float = 0.01,
    seed: int = 0,
) -> Model:
    """Vertical bar clamped at the base, axially loaded on its top nodes.

    Free-node coordinates get a small seeded perturbation so the ideal bar
    has an imperfection to buckle through; the rest metric is measured on
    the perturbed shape.
    """
    nodes, tets, index = _box_mesh(
        (section, section, height), 1.0, lambda i, j, k: k == 0
    )
    rng = np.random.default_rng(seed)
    perturbed = []
    for n in nodes:
        if n.fixed:
            perturbed.append(n)
        else:
            jitter = rng.uniform(-noise, noise, 3)
            perturbed.append(
                Node(n.id, tuple(c + d for c, d in zip(n.pos, jitter)), False)
            )
    top = [
        index[(i, j, height)] for j in range(section + 1) for i in range(section + 1)
    ]
    elements = tuple(
        Element(eid, "tetrahedron", conn, "elastic", stiffness=stiffness)
        for eid, conn in enumerate(tets)
    )
    loads = tuple(Load(nid, (0.0, 0.0, -load)) for nid in top)
    return Model(
        nodes=tuple(perturbed), elements=elements, loads=loads,
        solver=SolverParams(method="three_term", alpha=0.2, grad_tol=1e-2),
    )


# ---------------------------------------------------------------------------
# mixed cable/membrane model
# ---------------------------------------------------------------------------


def _build_cable_membrane_mixed(
    panels: int = 6,
    radius: float = 4.0,
    inner_radius: float = 1.5,
    target: float = 3.0,
    cable_weight: float = 1.0,
    membrane_weight: float = 1.0,
) -> Model:
    """Mast-supported tent: quartic cables, quadratic membrane panels and
    one constrained mast strut from the fixed base to the free apex."""
    if panels < 3:
        raise ValueError("need at least 3 panels")
    k = panels
    nodes = [Node(0, (0.0, 0.0, 0.0), True)]  # mast base
    outer = []
    for i in range(k):
        a = 2.0 * math.pi * i / k
        nodes.append(Node(1 + i, (radius * math.cos(a), radius * math.sin(a), 0.0), True))
        outer.append(1 + i)
    inner = []
    for i in range(k):
        a = 2.0 * math.pi * (i + 0.5) / k
        nodes.append(
            Node(1 + k + i,
                 (inner_radius * math.cos(a), inner_radius * math.sin(a), 0.6 * target),
                 False)
        )
        inner.append(1 + k + i)
    apex = 1 + 2 * k
    nodes.append(Node(apex, (0.0, 0.0, 0.9 * target), False))

    elements = []
    eid = 0
    for i in range(k):  # ridge cables to the apex
        elements.append(Element(eid, "line", (inner[i], apex), "functional",
                                weight=cable_weight, power=4))
        eid += 1
    for i in range(k):  # inner ring cables
        elements.append(Element(eid, "line", (inner[i], inner[(i + 1) % k]),
                                "functional", weight=cable_weight, power=4))
        eid += 1
    for i in range(k):  # membrane panels between the fixed ring and the inner ring
        a, b = outer[i], outer[(i + 1) % k]
        c, d = inner[i], inner[(i + 1) % k]
        elements.append(Element(eid, "triangle", (a, b, c), "functional",
                                weight=membrane_weight, power=2))
        eid += 1
        elements.append(Element(eid, "triangle", (b, d, c), "functional",
                                weight=membrane_weight, power=2))
        eid += 1
    elements.append(Element(eid, "line", (0, apex), "constrained", target=target))

    return Model(
        nodes=tuple(nodes),
        elements=tuple(elements),
        solver=SolverParams(method="three_term", alpha=0.1),
    )
