import json

import numpy as np
import pytest

from formrelax.model import (
    Element,
    Load,
    Model,
    ModelFormatError,
    ModelSemanticsError,
    Node,
    SolverParams,
    dof_map,
    gather_positions,
    parse_model,
    scatter_positions,
    serialize_model,
    validate_model,
)

MINIMAL = """
{"nodes": [{"id": 0, "pos": [0, 0, 0], "fixed": true},
           {"id": 1, "pos": [3, 4, 0], "fixed": false}],
 "elements": [{"id": 0, "kind": "line", "nodes": [0, 1],
               "role": "functional", "weight": 1.0, "power": 2}],
 "loads": []}
"""


def test_parse_minimal_model():
    m = parse_model(MINIMAL)
    assert len(m.nodes) == 2
    assert dof_map(m).n == 3


def test_parse_applies_solver_defaults():
    m = parse_model(MINIMAL)
    assert m.solver.alpha == 0.2
    assert m.solver.damping == 0.98
    assert m.solver.constraint_relax == 0.5


def test_parse_reports_syntax_position():
    with pytest.raises(ModelFormatError, match=r"line \d+ column \d+"):
        parse_model('{"nodes": [,]}')


def test_dangling_node_reference():
    doc = json.loads(MINIMAL)
    doc["elements"][0]["nodes"] = [0, 99]
    with pytest.raises(ModelSemanticsError, match="unknown node 99"):
        parse_model(json.dumps(doc))


def test_wrong_role_fields_rejected():
    doc = json.loads(MINIMAL)
    doc["elements"][0]["target"] = 5.0  # functional element with a target
    with pytest.raises(ModelSemanticsError, match="not valid for role"):
        parse_model(json.dumps(doc))


def test_bad_power_rejected():
    doc = json.loads(MINIMAL)
    doc["elements"][0]["power"] = 3
    with pytest.raises(ModelSemanticsError, match="power 3"):
        parse_model(json.dumps(doc))


def test_area_power_four_rejected():
    doc = json.loads(MINIMAL)
    doc["nodes"].append({"id": 2, "pos": [0, 1, 0], "fixed": False})
    doc["elements"] = [
        {"id": 0, "kind": "triangle", "nodes": [0, 1, 2], "role": "functional",
         "weight": 1.0, "power": 4}
    ]
    with pytest.raises(ModelSemanticsError, match="power 4"):
        parse_model(json.dumps(doc))


def test_functional_tetrahedron_rejected():
    doc = json.loads(MINIMAL)
    doc["nodes"] += [
        {"id": 2, "pos": [0, 1, 0], "fixed": False},
        {"id": 3, "pos": [0, 0, 1], "fixed": False},
    ]
    doc["elements"] = [
        {"id": 0, "kind": "tetrahedron", "nodes": [0, 1, 2, 3],
         "role": "functional", "weight": 1.0}
    ]
    with pytest.raises(ModelSemanticsError, match="functional"):
        parse_model(json.dumps(doc))


def test_no_free_dofs_rejected():
    doc = json.loads(MINIMAL)
    for nd in doc["nodes"]:
        nd["fixed"] = True
    with pytest.raises(ModelSemanticsError, match="free degrees of freedom"):
        parse_model(json.dumps(doc))


def test_constraint_rank_precondition():
    # 3 free DOFs but 3 constraints: constraint count must stay below n
    doc = {
        "nodes": [
            {"id": 0, "pos": [0, 0, 0], "fixed": True},
            {"id": 1, "pos": [1, 0, 0], "fixed": True},
            {"id": 2, "pos": [0, 1, 0], "fixed": True},
            {"id": 3, "pos": [1, 1, 1], "fixed": False},
        ],
        "elements": [
            {"id": k, "kind": "line", "nodes": [k, 3], "role": "constrained",
             "target": 1.0}
            for k in range(3)
        ],
    }
    with pytest.raises(ModelSemanticsError, match="constraint"):
        parse_model(json.dumps(doc))


def test_load_on_fixed_node_rejected():
    doc = json.loads(MINIMAL)
    doc["loads"] = [{"node": 0, "force": [0, 0, -1]}]
    with pytest.raises(ModelSemanticsError, match="fixed node 0"):
        parse_model(json.dumps(doc))


def test_elastic_rest_metric_defaults_to_initial_shape():
    doc = json.loads(MINIMAL)
    doc["elements"][0] = {
        "id": 0, "kind": "line", "nodes": [0, 1], "role": "elastic",
        "stiffness": 50.0,
    }
    m = parse_model(json.dumps(doc))
    assert m.elements[0].rest_metric == ((25.0,),)


def test_rest_metric_must_be_spd():
    doc = json.loads(MINIMAL)
    doc["elements"][0] = {
        "id": 0, "kind": "line", "nodes": [0, 1], "role": "elastic",
        "stiffness": 50.0, "rest_metric": [[-1.0]],
    }
    with pytest.raises(ModelSemanticsError, match="positive definite"):
        parse_model(json.dumps(doc))


# ---------------------------------------------------------------------------
# DOF map and gather/scatter
# ---------------------------------------------------------------------------


def test_dofmap_single_free_node():
    m = Model(nodes=(Node(7, (1.0, 2.0, 3.0), False),), elements=())
    dm = dof_map(m)
    assert dm.index(7, "x") == 0
    assert dm.index(7, "y") == 1
    assert dm.index(7, "z") == 2


def test_dofmap_ordering_by_node_id():
    m = Model(
        nodes=(Node(5, (0.0, 0.0, 0.0), False), Node(3, (0.0, 0.0, 0.0), False)),
        elements=(),
    )
    dm = dof_map(m)
    assert [dm.index(3, a) for a in "xyz"] == [0, 1, 2]
    assert [dm.index(5, a) for a in "xyz"] == [3, 4, 5]


def test_dofmap_is_bijection():
    m = parse_model(MINIMAL)
    dm = dof_map(m)
    seen = {dm.index(nid, ax) for nid in dm.free_node_ids for ax in "xyz"}
    assert seen == set(range(dm.n))


def test_gather_positions():
    m = parse_model(MINIMAL)
    assert list(gather_positions(m, dof_map(m))) == [3.0, 4.0, 0.0]


def test_scatter_gather_round_trip():
    m = parse_model(MINIMAL)
    dm = dof_map(m)
    assert scatter_positions(m, dm, gather_positions(m, dm)) == m
    x = np.array([1.5, -2.0, 7.0])
    m2 = scatter_positions(m, dm, x)
    assert list(gather_positions(m2, dm)) == [1.5, -2.0, 7.0]


def test_scatter_never_touches_fixed_nodes():
    m = parse_model(MINIMAL)
    m2 = scatter_positions(m, dof_map(m), np.array([9.0, 9.0, 9.0]))
    assert m2.nodes[0].pos == (0.0, 0.0, 0.0)


def test_scatter_length_mismatch():
    m = parse_model(MINIMAL)
    with pytest.raises(ValueError, match="length mismatch"):
        scatter_positions(m, dof_map(m), np.zeros(4))


# ---------------------------------------------------------------------------
# Serialization round trip
# ---------------------------------------------------------------------------


def test_serialize_parse_round_trip_bit_exact(rng):
    nodes = [Node(0, (0.1234567890123456, -7.5, 2.0), True)]
    for i in range(1, 9):
        nodes.append(Node(i, tuple(rng.uniform(-5, 5, 3)), False))
    elements = [
        Element(0, "line", (0, 1), "functional", weight=1.25, power=4),
        Element(1, "line", (1, 2), "constrained", target=2.5),
        Element(2, "triangle", (2, 3, 4), "functional", weight=0.5, power=2),
        Element(3, "triangle", (3, 4, 5), "elastic", stiffness=50.0,
                rest_metric=((2.0, 0.1), (0.1, 1.0))),
        Element(4, "tetrahedron", (5, 6, 7, 8), "elastic", stiffness=3.0),
    ]
    loads = (Load(4, (0.0, 0.0, -0.1)),)
    m = validate_model(
        Model(nodes=tuple(nodes), elements=tuple(elements), loads=loads,
              solver=SolverParams(alpha=0.05, max_steps=123))
    )
    assert parse_model(serialize_model(m)) == m


def test_round_trip_many_random_models(rng):
    for _ in range(25):
        count = rng.integers(2, 7)
        nodes = tuple(
            Node(int(i), tuple(rng.uniform(-5, 5, 3)), bool(i == 0))
            for i in range(count)
        )
        elements = tuple(
            Element(int(j), "line", (int(j % (count - 1)), int(count - 1)),
                    "functional", weight=float(rng.uniform(0, 2)), power=2)
            for j in range(count - 1)
        )
        m = validate_model(Model(nodes=nodes, elements=elements))
        assert parse_model(serialize_model(m)) == m
