"""Compare the compiled element kernels against the numpy fallback.

The backend is chosen at import time, so each measurement runs in a fresh
subprocess with FORMRELAX_BACKEND set. Reported numbers are solver steps
per second on two representative models: the 220-member cable net
(functional lines) and a 2304-tet buckling bar (elastic tetrahedra).

Usage: python benchmarks/bench_backends.py [--steps 2000]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import formrelax
from formrelax.model import Element, Load, Model, Node, SolverParams, validate_model
from formrelax.scenarios import ScenarioSpec, generate, _box_mesh
from formrelax.solver import Relaxation

steps = int(sys.argv[1])

def bar_fine():
    nodes, tets, index = _box_mesh((4, 4, 24), 0.5, lambda i, j, k: k == 0)
    elements = tuple(
        Element(e, "tetrahedron", c, "elastic", stiffness=50.0)
        for e, c in enumerate(tets)
    )
    top = [index[(i, j, 24)] for j in range(5) for i in range(5)]
    loads = tuple(Load(n, (0.0, 0.0, -0.05)) for n in top)
    return validate_model(Model(
        nodes=tuple(nodes), elements=elements, loads=loads,
        solver=SolverParams(alpha=0.05, grad_tol=1e-12, max_steps=10**9),
    ))

results = {"backend": formrelax.backend_name()}
for name, model, seed in (
    ("cable_net_220", generate(ScenarioSpec("cable_net")), 1),
    ("buckling_bar_2304_tets", bar_fine(), None),
):
    session = Relaxation(model, seed=seed)
    for _ in range(50):  # warmup
        session.advance()
    t0 = time.perf_counter()
    for _ in range(steps):
        session.advance()
    dt = time.perf_counter() - t0
    results[name] = steps / dt
print(json.dumps(results))
"""


def measure(backend: str, steps: int) -> dict:
    env = dict(os.environ, FORMRELAX_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(steps)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args()

    rows = []
    for backend in ("python", "compiled"):
        try:
            rows.append(measure(backend, args.steps))
        except subprocess.CalledProcessError as exc:
            print(f"{backend}: failed ({exc.stderr.strip().splitlines()[-1]})")
    if not rows:
        return 1

    names = [k for k in rows[0] if k != "backend"]
    print(f"{'model':<28}" + "".join(f"{r['backend']:>14}" for r in rows) + "  speedup")
    for name in names:
        line = f"{name:<28}" + "".join(f"{r[name]:>12.0f}/s" for r in rows)
        if len(rows) == 2:
            line += f"  {rows[1][name] / rows[0][name]:>6.2f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
