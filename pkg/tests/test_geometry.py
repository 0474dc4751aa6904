import numpy as np
import pytest

from formrelax.geometry import (
    DegenerateElementError,
    element_geometry,
    grad_area,
    grad_length,
    grad_metric,
    line_length,
    tetrahedron_volume,
    triangle_area,
)
from formrelax.gradcheck import central_diff, relative_error

from conftest import dofmap_of, nodes_at, random_positions

KINDS = {"line": 2, "triangle": 3, "tetrahedron": 4}


# ---------------------------------------------------------------------------
# element_geometry
# ---------------------------------------------------------------------------


def test_line_three_four_five():
    g = element_geometry([(0, 0, 0), (3, 4, 0)], "line")
    assert g.metric[0, 0] == 25.0
    assert g.inverse_metric[0, 0] == 0.04
    assert g.measure == 5.0


def test_triangle_unit_right():
    g = element_geometry([(0, 0, 0), (1, 0, 0), (0, 1, 0)], "triangle")
    assert np.array_equal(g.base_vectors, [[-1, 0, 0], [1, -1, 0]])
    assert np.array_equal(g.metric, [[1, -1], [-1, 2]])
    assert g.det == 1.0
    assert g.measure == 0.5


def test_tetrahedron_reference():
    g = element_geometry([(1, 0, 0), (0, 0, 0), (0, 1, 0), (0, 0, 1)], "tetrahedron")
    assert np.array_equal(g.base_vectors, [[1, 0, 0], [0, -1, 0], [0, 1, -1]])
    assert g.det == 1.0
    assert g.measure == pytest.approx(1 / 6, rel=1e-15)


@pytest.mark.parametrize("kind,count", KINDS.items())
def test_inverse_metric_is_explicit_inverse(rng, kind, count):
    for _ in range(200):
        pos = random_positions(rng, count)
        g = element_geometry(pos, kind)
        eye = g.inverse_metric @ g.metric
        scaled = np.abs(eye - np.eye(count - 1))
        assert scaled.max() < 1e-12 * max(1.0, np.abs(g.metric).max() * np.abs(g.inverse_metric).max())


@pytest.mark.parametrize("kind,count", KINDS.items())
def test_measure_matches_direct_formula(rng, kind, count):
    oracle = {2: line_length, 3: triangle_area, 4: tetrahedron_volume}[count]
    # volume floor 1.0 keeps sliver tets out: the Gram-determinant route
    # cancels ~half the mantissa on those and 1e-12 would be unfair
    floor = 1.0 if count == 4 else 0.3
    for _ in range(200):
        pos = random_positions(rng, count, min_measure=floor)
        g = element_geometry(pos, kind)
        assert g.measure == pytest.approx(oracle(*pos), rel=1e-12)


def test_degenerate_line_raises():
    with pytest.raises(DegenerateElementError):
        element_geometry([(1, 2, 3), (1, 2, 3)], "line")


def test_degenerate_triangle_raises():
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0, 0), (1, 1, 1), (2, 2, 2)], "triangle")


def test_degenerate_flat_tetrahedron_raises():
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)], "tetrahedron")


def test_degeneracy_threshold_scales_with_element_size():
    # a tiny but well-shaped element must not be flagged
    g = element_geometry([(0, 0, 0), (1e-5, 0, 0), (0, 1e-5, 0)], "triangle")
    assert g.measure == pytest.approx(0.5e-10, rel=1e-12)


# ---------------------------------------------------------------------------
# gradient rows
# ---------------------------------------------------------------------------


def test_grad_length_both_free():
    nodes = nodes_at([(0, 0, 0), (3, 4, 0)])
    row = grad_length(nodes[0], nodes[1], dofmap_of(nodes))
    assert row.indices == (0, 1, 2, 3, 4, 5)
    assert np.allclose(row.values, [-0.6, -0.8, 0, 0.6, 0.8, 0], atol=0)


def test_grad_length_fixed_end_dropped():
    nodes = nodes_at([(0, 0, 0), (1, 0, 0)], fixed={0})
    row = grad_length(nodes[0], nodes[1], dofmap_of(nodes))
    assert row.indices == (0, 1, 2)
    assert row.values == (1.0, 0.0, 0.0)


def test_grad_length_zero_length_raises():
    nodes = nodes_at([(1, 1, 1), (1, 1, 1)])
    with pytest.raises(DegenerateElementError):
        grad_length(nodes[0], nodes[1], dofmap_of(nodes))


def test_grad_area_unit_right_triangle():
    nodes = nodes_at([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
    row = grad_area(*nodes, dofmap_of(nodes))
    assert np.allclose(
        row.to_dense(9), [-0.5, -0.5, 0, 0.5, 0, 0, 0, 0.5, 0], atol=1e-15
    )


def test_grad_area_normal_displacement_is_neutral(rng):
    for _ in range(50):
        pos = random_positions(rng, 3)
        nodes = nodes_at(pos)
        row = grad_area(*nodes, dofmap_of(nodes)).to_dense(9)
        normal = np.cross(pos[1] - pos[0], pos[2] - pos[0])
        normal /= np.linalg.norm(normal)
        for corner in range(3):
            delta = np.zeros(9)
            delta[3 * corner : 3 * corner + 3] = normal
            assert abs(row @ delta) < 1e-12 * np.abs(row).max()


def test_grad_metric_line_is_chain_rule_of_length():
    nodes = nodes_at([(0, 0, 0), (3, 4, 0)])
    dm = dofmap_of(nodes)
    rows = grad_metric(nodes, "line", dm)
    assert np.allclose(rows[0][0].to_dense(6), [-6, -8, 0, 6, 8, 0], atol=0)
    # chain rule: grad(g11) = 2 L grad(L)
    gl = grad_length(nodes[0], nodes[1], dm).to_dense(6)
    assert np.allclose(rows[0][0].to_dense(6), 2 * 5.0 * gl, atol=1e-12)


@pytest.mark.parametrize("kind,count", KINDS.items())
def test_grad_metric_symmetric_exactly(rng, kind, count):
    for _ in range(20):
        nodes = nodes_at(random_positions(rng, count))
        rows = grad_metric(nodes, kind, dofmap_of(nodes))
        nd = count - 1
        for i in range(nd):
            for j in range(nd):
                assert rows[i][j] == rows[j][i]


# ---------------------------------------------------------------------------
# finite-difference verification
# ---------------------------------------------------------------------------


def fd_check_rows(kind, count, rng, trials):
    """Worst relative FD error over measure and metric gradients."""
    worst = 0.0
    for _ in range(trials):
        pos = random_positions(rng, count)
        nodes = nodes_at(pos)
        dm = dofmap_of(nodes)
        flat = pos.ravel()

        if kind == "line":
            row = grad_length(nodes[0], nodes[1], dm).to_dense(dm.n)
            fd = central_diff(lambda v: line_length(v[0:3], v[3:6]), flat)
            worst = max(worst, relative_error(row, fd))
        elif kind == "triangle":
            row = grad_area(*nodes, dm).to_dense(dm.n)
            fd = central_diff(lambda v: triangle_area(v[0:3], v[3:6], v[6:9]), flat)
            worst = max(worst, relative_error(row, fd))

        rows = grad_metric(nodes, kind, dm)
        nd = count - 1
        for i in range(nd):
            for j in range(nd):
                def metric_ij(v, i=i, j=j):
                    from formrelax.geometry import element_geometry
                    return element_geometry(v.reshape(count, 3), kind).metric[i, j]

                fd = central_diff(metric_ij, flat)
                worst = max(worst, relative_error(rows[i][j].to_dense(dm.n), fd))
    return worst


@pytest.mark.parametrize("kind,count", KINDS.items())
def test_gradients_match_finite_differences(rng, kind, count):
    assert fd_check_rows(kind, count, rng, trials=40) < 1e-6


@pytest.mark.parametrize("kind,count", KINDS.items())
def test_translation_invariance(rng, kind, count):
    """Row components summed over the element's nodes vanish per axis."""
    for _ in range(50):
        pos = random_positions(rng, count)
        nodes = nodes_at(pos)
        dm = dofmap_of(nodes)
        rows = []
        if kind == "line":
            rows.append(grad_length(nodes[0], nodes[1], dm).to_dense(dm.n))
        if kind == "triangle":
            rows.append(grad_area(*nodes, dm).to_dense(dm.n))
        for block in grad_metric(nodes, kind, dm):
            rows.extend(r.to_dense(dm.n) for r in block)
        for row in rows:
            per_axis = row.reshape(count, 3).sum(axis=0)
            assert np.abs(per_axis).max() < 1e-12 * max(1.0, np.abs(row).max())
