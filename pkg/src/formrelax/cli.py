"""Batch command line: solve models, verify gradients, generate scenario
files and launch the steering service.

Exit codes are the process-level contract: 0 success, 1 error, 2 solver ran
out of steps without converging.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import backends
from .constraints import build_constraints, dual_estimate
from .forces import assemble_omega, constitutive_linear
from .functionals import eval_pi
from .geometry import (
    DegenerateElementError,
    element_geometry,
    grad_area,
    grad_length,
    grad_metric,
)
from .gradcheck import central_diff, omega_fd_row, relative_error
from .model import (
    Model,
    ModelError,
    build_tables,
    dof_map,
    gather_positions,
    model_to_dict,
    parse_model,
    serialize_model,
)
from .scenarios import KINDS, ScenarioSpec, generate, scenario_counts
from .solver import DivergenceError, Relaxation, history_csv


def _load_model(path: str) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def _element_report(model: Model, x) -> list[dict]:
    tables = build_tables(model)
    X = tables.coords(np.asarray(x, dtype=float))
    rows = []
    lam_by_id = {}
    if len(tables.constrained):
        system = build_constraints(model, x, tables)
        grad = np.zeros(tables.n)
        if tables.has_functional:
            grad += eval_pi(model, x, tables).grad
        if tables.has_elastic or tables.has_loads:
            grad += assemble_omega(model, x, tables).omega
        lam, _ = dual_estimate(grad, system)
        lam_by_id = {int(i): float(v) for i, v in zip(system.element_ids, lam)}
    for el in model.elements:
        pos = [X[tables.row_of_id[nid]] for nid in el.node_ids]
        entry: dict = {"id": el.id, "kind": el.kind, "role": el.role}
        try:
            geom = element_geometry(pos, el.kind)
        except DegenerateElementError:
            entry["degenerate"] = True
            rows.append(entry)
            continue
        entry["measure"] = geom.measure
        if el.role == "functional":
            if el.kind == "line":
                entry["force"] = el.power * el.weight * geom.measure ** (el.power - 1)
            else:
                entry["force"] = 2.0 * el.weight * geom.measure
        elif el.role == "constrained":
            entry["force"] = lam_by_id.get(el.id)
            entry["target"] = el.target
        else:
            stress = constitutive_linear(geom, el.rest_metric, el.stiffness)
            entry["stress_mixed"] = [list(map(float, r)) for r in stress.mixed]
        rows.append(entry)
    return rows


def cmd_solve(args) -> int:
    model = _load_model(args.model)
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.method is not None:
        overrides["method"] = args.method
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    if args.grad_tol is not None:
        overrides["grad_tol"] = args.grad_tol
    if args.residual_tol is not None:
        overrides["residual_tol"] = args.residual_tol
    if overrides:
        model = replace(model, solver=replace(model.solver, **overrides))

    started = time.perf_counter()
    session = Relaxation(model, seed=args.seed)
    status = session.run()
    elapsed = time.perf_counter() - started

    last = session.last_entry
    report = {
        "status": status,
        "steps": session.state.step,
        "terminal": {
            "pi": last.pi,
            "grad_norm": last.grad_norm,
            "residual_norm": last.residual_norm,
            "alpha": last.alpha,
        },
        "multipliers": None
        if session.multipliers is None
        else [float(v) for v in session.multipliers],
        "seed": args.seed,
        "method": session.params.method,
        "wall_time_s": elapsed,
        "backend": backends.backend_name(),
        "parameter_changes": [
            {"step": s, "name": n, "value": v} for s, n, v in session.param_log
        ],
        "elements": _element_report(session.model, session.state.x),
    }
    solved = session.final_model()
    if args.out:
        Path(args.out).write_text(
            json.dumps({"model": model_to_dict(solved), "report": report}, indent=1),
            encoding="utf-8",
        )
    if args.history:
        Path(args.history).write_text(
            history_csv(session.state.history), encoding="utf-8"
        )
    print(
        f"{status}: {session.state.step} steps, |gradient|={last.grad_norm:.6g}, "
        f"|residual|={last.residual_norm:.6g}"
        + (f", objective={last.pi:.6g}" if last.pi is not None else "")
    )
    return 0 if status == "converged" else 2


# ---------------------------------------------------------------------------
# check-gradients
# ---------------------------------------------------------------------------


def cmd_check_gradients(args) -> int:
    model = _load_model(args.model)
    if args.trials <= 0:
        print("warning: --trials 0, nothing checked")
        return 0
    dm = dof_map(model)
    tables = build_tables(model)
    x0 = gather_positions(model, dm)
    rng = np.random.default_rng(args.seed)
    nodes_by_id = {n.id: n for n in model.nodes}
    worst: dict[str, float] = {}
    degenerate: list[tuple[int, int]] = []

    def note(category: str, err: float) -> None:
        worst[category] = max(worst.get(category, 0.0), err)

    for trial in range(args.trials):
        # trial 0 checks the model's own configuration, later trials jitter it
        x = x0 if trial == 0 else x0 + rng.uniform(-0.1, 0.1, dm.n)
        X = tables.coords(x)

        def node_positions(el):
            return [X[tables.row_of_id[nid]] for nid in el.node_ids]

        for el in model.elements:
            pos = np.asarray(node_positions(el))
            nodes = [
                replace(nodes_by_id[nid], pos=tuple(map(float, p)))
                for nid, p in zip(el.node_ids, pos)
            ]
            local = type(dm)(Model(nodes=tuple(nodes), elements=()))
            if local.n == 0:
                continue
            try:
                if el.kind == "line":
                    row = grad_length(nodes[0], nodes[1], local).to_dense(local.n)
                    fd = _fd_local(pos, nodes, local, "line", "measure")
                    note("length_gradient", relative_error(row, fd))
                elif el.kind == "triangle":
                    row = grad_area(*nodes, local).to_dense(local.n)
                    fd = _fd_local(pos, nodes, local, "triangle", "measure")
                    note("area_gradient", relative_error(row, fd))
                blocks = grad_metric(nodes, el.kind, local)
                nd = len(blocks)
                for i in range(nd):
                    for j in range(nd):
                        fd = _fd_local(pos, nodes, local, el.kind, (i, j))
                        note(
                            "metric_gradient",
                            relative_error(blocks[i][j].to_dense(local.n), fd),
                        )
                if el.role == "elastic":
                    full = omega_fd_row(pos, el.kind, el.stiffness, el.rest_metric)
                    row = _omega_local(pos, nodes, local, el)
                    fd = _restrict(full, nodes, local)
                    note("elastic_row", relative_error(row, fd))
            except DegenerateElementError:
                degenerate.append((trial, el.id))
                continue

        if tables.has_functional:
            try:
                fv = eval_pi(model, x, tables)
                fd = central_diff(lambda v: eval_pi(model, v, tables).pi, x)
                note("objective_gradient", relative_error(fv.grad, fd))
            except DegenerateElementError:
                pass  # offending element already reported by the loop above

    for trial, eid in degenerate[:10]:
        print(f"degenerate: element {eid} in trial {trial} (skipped)")
    tol = 1e-5
    failed = False
    for category in sorted(worst):
        status = "ok" if worst[category] < tol else "FAIL"
        failed |= worst[category] >= tol
        print(f"{category}: worst relative error {worst[category]:.3e} [{status}]")
    return 1 if failed else 0


def _free_by_id(nodes):
    """Free-node element slots ordered by node id, matching DOF ordering."""
    return sorted(
        (i for i, nd in enumerate(nodes) if not nd.fixed), key=lambda i: nodes[i].id
    )


def _fd_local(pos, nodes, local_dm, kind, what):
    """FD gradient over the element's free DOFs of a measure or metric entry."""
    free = _free_by_id(nodes)

    def value(flat):
        p = pos.copy()
        p[free] = flat.reshape(-1, 3)
        g = element_geometry(p, kind)
        return g.measure if what == "measure" else g.metric[what[0], what[1]]

    return central_diff(value, pos[free].ravel())


def _restrict(full_row, nodes, local_dm):
    """Keep only free-node components of a full per-element row."""
    keep = []
    for i in _free_by_id(nodes):
        keep.extend(range(3 * i, 3 * i + 3))
    return np.asarray(full_row)[keep]


def _omega_local(pos, nodes, local_dm, el):
    from .forces import element_omega

    geom = element_geometry(pos, el.kind)
    stress = constitutive_linear(geom, el.rest_metric, el.stiffness)
    grads = grad_metric(nodes, el.kind, local_dm)
    return element_omega(geom, stress, grads).to_dense(local_dm.n)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

_GENERATE_FLAGS = (
    ("spokes", int), ("rings", int), ("radius", float), ("height", float),
    ("weight", float), ("boundary_factor", float), ("target", float),
    ("struts", int), ("size", float), ("divisions", int), ("load", float),
    ("stiffness", float), ("corners", int), ("length", int), ("section", int),
    ("noise", float), ("seed", int), ("panels", int), ("inner_radius", float),
    ("cable_weight", float), ("membrane_weight", float),
)


def cmd_generate(args) -> int:
    params = {
        name: getattr(args, name)
        for name, _ in _GENERATE_FLAGS
        if getattr(args, name) is not None
    }
    try:
        model = generate(ScenarioSpec(args.kind, params))
    except TypeError as exc:
        raise ModelError(f"bad parameter for '{args.kind}': {exc}") from None
    Path(args.out).write_text(serialize_model(model), encoding="utf-8")
    summary = {"kind": args.kind, "out": args.out, **scenario_counts(model)}
    print(json.dumps(summary, indent=1))
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def cmd_serve(args) -> int:
    import asyncio

    from . import steering

    model = _load_model(args.model) if args.model else None
    static = Path(args.static) if args.static else None
    if static is not None and not static.is_dir():
        raise ModelError(f"static directory not found: {static}")
    print(f"steering service on ws://{args.host}:{args.port}/session")
    try:
        asyncio.run(
            steering.serve(args.port, model=model, host=args.host, static_dir=static)
        )
    except KeyboardInterrupt:
        pass
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formrelax",
        description="form finding and large-deformation statics by relaxation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="relax a model file to equilibrium")
    p.add_argument("model")
    p.add_argument("--alpha", type=float)
    p.add_argument("--method", choices=["two_term", "three_term"])
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--grad-tol", type=float, dest="grad_tol")
    p.add_argument("--residual-tol", type=float, dest="residual_tol")
    p.add_argument("--seed", type=int, help="random initial positions in [-2.5, 2.5]")
    p.add_argument("--out", help="write solved model + report JSON here")
    p.add_argument("--history", help="write per-step history CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-gradients", help="compare analytic rows against FD")
    p.add_argument("model")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_gradients)

    p = sub.add_parser("generate", help="emit a benchmark scenario model file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--out", required=True)
    for name, typ in _GENERATE_FLAGS:
        p.add_argument(f"--{name.replace('_', '-')}", type=typ, dest=name)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the interactive steering service")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--model", help="model file preloaded into new sessions")
    p.add_argument("--static", help="directory with the browser UI build")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DivergenceError, OSError) as exc:
        # ValueError covers model/semantic errors, degenerate elements and
        # out-of-range scenario parameters
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
