import numpy as np
import pytest

from formrelax.model import DofMap, Element, Load, Model, Node, SolverParams, validate_model


def nodes_at(positions, fixed=()):
    """Node tuple with sequential ids; indices listed in `fixed` are pinned."""
    return tuple(
        Node(id=i, pos=tuple(float(c) for c in p), fixed=(i in fixed))
        for i, p in enumerate(positions)
    )


def dofmap_of(nodes):
    return DofMap(Model(nodes=tuple(nodes), elements=()))


def two_cable_model():
    """One free node tied to two fixed anchors by unit-weight cables."""
    nodes = (
        Node(0, (-1.0, 0.0, 0.0), True),
        Node(1, (1.0, 0.0, 0.0), True),
        Node(2, (0.3, 0.7, 0.0), False),
    )
    elements = (
        Element(0, "line", (0, 2), "functional", weight=1.0, power=2),
        Element(1, "line", (1, 2), "functional", weight=1.0, power=2),
    )
    return validate_model(Model(nodes=nodes, elements=elements))


def random_positions(rng, count, span=5.0, min_measure=0.3):
    """Random element corner positions, rejecting nearly degenerate sets."""
    from formrelax.geometry import line_length, tetrahedron_volume, triangle_area

    while True:
        pos = rng.uniform(-span, span, (count, 3))
        if count == 2 and line_length(pos[0], pos[1]) > min_measure:
            return pos
        if count == 3 and triangle_area(*pos) > min_measure:
            return pos
        if count == 4 and tetrahedron_volume(*pos) > min_measure:
            return pos


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
