"""Fixed-step relaxation loop: normalized search direction, the plain and
the momentum-damped update recursions, per-step constraint restoration,
termination and history capture.

Both recursions use a constant step factor instead of a line search; the
step factor (and everything else) can be changed between steps, which is
how interactive steering works. The momentum vector is zeroed whenever the
step factor, weights, constraint targets or fixed nodes change, so stale
momentum never leaks across a parameter change.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import build_constraints, dual_estimate, residual_correction
from .forces import assemble_omega
from .functionals import eval_pi, update_weight
from .model import (
    DofMap,
    Model,
    SolverParams,
    build_tables,
    gather_positions,
    scatter_positions,
    validate_model,
)

ZERO_GRAD_CUTOFF = 1e-14


class DivergenceError(RuntimeError):
    """The iteration produced non-finite state."""


@dataclass(frozen=True)
class HistoryEntry:
    step: int
    pi: float | None
    grad_norm: float
    residual_norm: float
    alpha: float


@dataclass(frozen=True)
class Direction:
    vec: np.ndarray
    converged: bool


@dataclass
class SolverState:
    x: np.ndarray
    q: np.ndarray
    step: int = 0
    history: list[HistoryEntry] = field(default_factory=list)
    params: SolverParams = field(default_factory=SolverParams)


def search_direction(grad: np.ndarray) -> Direction:
    """Normalized gradient column, or a zero direction once the norm is
    numerically zero."""
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        worst = int(np.nanargmax(np.abs(grad)))
        raise DivergenceError(
            f"non-finite gradient (worst DOF {worst}: {grad[worst]!r})"
        )
    norm = float(np.linalg.norm(grad))
    if norm <= ZERO_GRAD_CUTOFF:
        return Direction(vec=np.zeros_like(grad), converged=True)
    return Direction(vec=grad / norm, converged=False)


def two_term_step(state: SolverState, direction: Direction, alpha: float | None = None) -> SolverState:
    """Plain normalized-descent update: x moves alpha against the direction."""
    alpha = state.params.alpha if alpha is None else alpha
    state.x = state.x - alpha * direction.vec
    state.step += 1
    return state


def three_term_step(
    state: SolverState,
    direction: Direction,
    alpha: float | None = None,
    damping: float | None = None,
) -> SolverState:
    """Momentum update: q <- damping q - alpha r, then x <- x + alpha q."""
    alpha = state.params.alpha if alpha is None else alpha
    damping = state.params.damping if damping is None else damping
    state.q = damping * state.q - alpha * direction.vec
    state.x = state.x + alpha * state.q
    state.step += 1
    return state


class Relaxation:
    """One steerable solver session over a model.

    Owns the unknown vector, the momentum vector and the history. Parameter
    mutators may be called between steps; they are the hooks the steering
    service drives.
    """

    def __init__(
        self,
        model: Model,
        x0=None,
        seed: int | None = None,
        init_range: float = 2.5,
    ):
        self.model = validate_model(model)
        self.tables = build_tables(self.model)
        self.seed = seed
        if x0 is not None:
            x = np.array(x0, dtype=float)
            if x.shape != (self.tables.n,):
                raise ValueError(f"x0 must have length {self.tables.n}")
        elif seed is not None:
            rng = np.random.default_rng(seed)
            x = rng.uniform(-init_range, init_range, self.tables.n)
        else:
            x = gather_positions(self.model, self.tables.dofmap)
        self.state = SolverState(
            x=x, q=np.zeros(self.tables.n), params=self.model.solver
        )
        self.multipliers: np.ndarray | None = None
        self.converged_at: int | None = None
        self.regularized = False
        self.param_log: list[tuple[int, str, object]] = []
        self._grad: np.ndarray | None = None

    # -- evaluation --------------------------------------------------------

    @property
    def params(self) -> SolverParams:
        return self.state.params

    @property
    def converged(self) -> bool:
        return self.converged_at is not None

    @property
    def dofmap(self) -> DofMap:
        return self.tables.dofmap

    @property
    def last_entry(self) -> HistoryEntry | None:
        return self.state.history[-1] if self.state.history else None

    def _evaluate(self) -> tuple[float | None, np.ndarray, float]:
        """Objective (when functional elements exist), constrained gradient
        row and residual norm at the current positions."""
        t = self.tables
        pi = None
        grad = np.zeros(t.n)
        if t.has_functional:
            fv = eval_pi(self.model, self.state.x, t)
            pi = fv.pi
            grad += fv.grad
        if t.has_elastic or t.has_loads:
            af = assemble_omega(self.model, self.state.x, t)
            grad += af.omega
        res_norm = 0.0
        if len(t.constrained):
            system = build_constraints(self.model, self.state.x, t)
            lam, grad = dual_estimate(grad, system)
            self.multipliers = lam
            res_norm = float(np.linalg.norm(system.residual))
        return pi, grad, res_norm

    def _measure(self) -> HistoryEntry:
        if not np.all(np.isfinite(self.state.x)):
            worst = int(np.nanargmax(np.abs(self.state.x)))
            raise DivergenceError(
                f"non-finite positions at step {self.state.step} (DOF {worst});"
                " a smaller alpha usually fixes this"
            )
        pi, grad, res_norm = self._evaluate()
        self._grad = grad
        entry = HistoryEntry(
            step=self.state.step,
            pi=pi,
            grad_norm=float(np.linalg.norm(grad)),
            residual_norm=res_norm,
            alpha=self.state.params.alpha,
        )
        self.state.history.append(entry)
        p = self.state.params
        if entry.grad_norm < p.grad_tol and entry.residual_norm < p.residual_tol:
            if self.converged_at is None:
                self.converged_at = self.state.step
        return entry

    # -- stepping ----------------------------------------------------------

    def advance(self) -> HistoryEntry:
        """One solver iteration: update positions, restore constraints,
        measure and record. Does nothing once converged."""
        if self._grad is None and self.state.history:
            # a parameter change invalidated the cached gradient
            _, self._grad, _ = self._evaluate()
        if not self.state.history:
            self._measure()
        if self.converged:
            return self.state.history[-1]

        direction = search_direction(self._grad)
        if self.state.params.method == "two_term":
            two_term_step(self.state, direction)
        else:
            three_term_step(self.state, direction)
        if len(self.tables.constrained):
            system = build_constraints(self.model, self.state.x, self.tables)
            self.state.x = residual_correction(
                self.state.x, system, self.state.params.constraint_relax
            )
        return self._measure()

    def run(self) -> str:
        """Iterate to convergence or the step budget.

        Returns "converged" or "max_steps". The history always contains the
        terminal state.
        """
        if not self.state.history:
            self._measure()
        while not self.converged and self.state.step < self.state.params.max_steps:
            self.advance()
        return "converged" if self.converged else "max_steps"

    # -- steering hooks ------------------------------------------------------

    def _reset_momentum(self) -> None:
        self.state.q = np.zeros_like(self.state.q)
        self._grad = None
        self.converged_at = None

    def _swap_model(self, model: Model) -> None:
        self.model = validate_model(model)
        self.tables = build_tables(self.model)
        self._reset_momentum()

    def set_param(self, name: str, value: float) -> None:
        if name not in ("alpha", "damping", "constraint_relax"):
            raise ValueError(f"unknown solver parameter '{name}'")
        value = float(value)
        if name == "alpha" and not value > 0:
            raise ValueError("alpha must be > 0")
        if name in ("damping", "constraint_relax") and not 0 < value <= 1:
            raise ValueError(f"{name} must be in (0, 1]")
        self.state.params = replace(self.state.params, **{name: value})
        self.param_log.append((self.state.step, name, value))
        if name == "alpha":
            self._reset_momentum()

    def set_weight(self, element_id: int, weight: float) -> None:
        self._swap_model(update_weight(self.model, element_id, weight))
        self.param_log.append((self.state.step, f"weight[{element_id}]", float(weight)))

    def set_target(self, element_id: int, target: float) -> None:
        el = self.model.element_by_id(element_id)
        if el.role != "constrained":
            raise ValueError(f"element {element_id} has role '{el.role}', not constrained")
        if not target > 0:
            raise ValueError(f"target must be > 0, got {target}")
        elements = tuple(
            replace(e, target=float(target)) if e.id == element_id else e
            for e in self.model.elements
        )
        self._swap_model(replace(self.model, elements=elements))
        self.param_log.append((self.state.step, f"target[{element_id}]", float(target)))

    def move_fixed_node(self, node_id: int, pos) -> None:
        node = self.model.node_by_id(node_id)
        if not node.fixed:
            raise ValueError(f"node {node_id} is free; only fixed nodes can be moved")
        pos = tuple(float(v) for v in pos)
        if len(pos) != 3:
            raise ValueError("position must have 3 components")
        nodes = tuple(
            replace(n, pos=pos) if n.id == node_id else n for n in self.model.nodes
        )
        self._swap_model(replace(self.model, nodes=nodes))
        self.param_log.append((self.state.step, f"fixed_node[{node_id}]", pos))

    def randomize(self, seed: int, init_range: float = 2.5) -> None:
        rng = np.random.default_rng(seed)
        self.state.x = rng.uniform(-init_range, init_range, self.tables.n)
        self.seed = seed
        self._reset_momentum()
        self.param_log.append((self.state.step, "randomize", (int(seed), float(init_range))))

    # -- export --------------------------------------------------------------

    def final_model(self) -> Model:
        return scatter_positions(self.model, self.tables.dofmap, self.state.x)


def run(
    model: Model, x0=None, seed: int | None = None, init_range: float = 2.5
) -> tuple[Model, SolverState, str]:
    """Relax a model to convergence or the step budget.

    x0 may be an explicit vector; otherwise a seeded uniform initialization
    over [-init_range, init_range]^3 is used when a seed is given, and the
    model's own positions when not. Returns (final model, state, status).
    """
    session = Relaxation(model, x0=x0, seed=seed, init_range=init_range)
    status = session.run()
    return session.final_model(), session.state, status


def history_csv(history) -> str:
    """History as CSV; the pi column is empty for runs without an objective."""
    out = io.StringIO()
    out.write("step,pi,grad_norm,residual_norm,alpha\n")
    for e in history:
        pi = "" if e.pi is None else repr(e.pi)
        out.write(f"{e.step},{pi},{e.grad_norm!r},{e.residual_norm!r},{e.alpha!r}\n")
    return out.getvalue()
