"""The compiled kernels and the numpy fallback must be interchangeable."""

import numpy as np
import pytest

from formrelax.backends import backend_name, compiled_backend, python_backend
from formrelax.geometry import element_geometry, grad_area, grad_length

from conftest import dofmap_of, nodes_at, random_positions

compiled = compiled_backend()
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def random_batch(rng, count, m=64):
    P = np.stack([random_positions(rng, count) for _ in range(m)])
    E = rng.uniform(0.5, 50.0, m)
    rest = np.stack(
        [element_geometry(random_positions(rng, count), "line" if count == 2
                          else "triangle" if count == 3 else "tetrahedron").metric
         for _ in range(m)]
    )
    return P, E, rest


@needs_compiled
def test_backends_agree_on_line_rows(rng):
    P, _, _ = random_batch(rng, 2)
    L1, G1 = python_backend.line_rows(P)
    L2, G2 = compiled.line_rows(P)
    assert np.array_equal(L1, L2)
    assert np.array_equal(G1, G2)


@needs_compiled
def test_backends_agree_on_tri_rows(rng):
    P, _, _ = random_batch(rng, 3)
    S1, G1 = python_backend.tri_rows(P)
    S2, G2 = compiled.tri_rows(P)
    assert np.array_equal(S1, S2)
    assert np.array_equal(G1, G2)


@needs_compiled
@pytest.mark.parametrize("count,fn", [(2, "omega_line"), (3, "omega_tri"), (4, "omega_tet")])
def test_backends_agree_on_elastic_rows(rng, count, fn):
    P, E, rest = random_batch(rng, count)
    r1, d1, s1 = getattr(python_backend, fn)(P, E, rest)
    r2, d2, s2 = getattr(compiled, fn)(P, E, rest)
    assert np.array_equal(d1, d2)
    assert np.array_equal(s1, s2)
    # identical operation order: worst case a few ulp
    assert np.allclose(r1, r2, rtol=1e-14, atol=1e-300)


def test_batch_line_rows_match_reference(rng):
    P, _, _ = random_batch(rng, 2, m=16)
    L, G = python_backend.line_rows(P)
    for k in range(16):
        nodes = nodes_at(P[k])
        row = grad_length(nodes[0], nodes[1], dofmap_of(nodes))
        assert np.allclose(G[k], row.to_dense(6), rtol=1e-14, atol=1e-300)
        assert L[k] == pytest.approx(element_geometry(P[k], "line").measure, rel=1e-14)


def test_batch_tri_rows_match_reference(rng):
    P, _, _ = random_batch(rng, 3, m=16)
    S, G = python_backend.tri_rows(P)
    for k in range(16):
        nodes = nodes_at(P[k])
        row = grad_area(*nodes, dofmap_of(nodes))
        assert np.allclose(G[k], row.to_dense(9), rtol=1e-13, atol=1e-300)


def test_active_backend_name():
    assert backend_name() in ("python", "compiled")


def test_env_var_forces_python_backend(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c",
         "import formrelax; print(formrelax.backend_name())"],
        env={"FORMRELAX_BACKEND": "python", "PATH": "/usr/bin:/bin"},
        capture_output=True, text=True,
    )
    assert out.stdout.strip() == "python"
