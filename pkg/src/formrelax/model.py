"""Model data structure, degree-of-freedom indexing and JSON (de)serialization.

A model is an immutable description of a pin-jointed / simplex-element
structure: nodes (free or fixed), elements with one of three roles, nodal
loads and solver parameters. The unknown vector ``x`` holds the Cartesian
coordinates of the free nodes, ordered by ascending node id and then axis
x, y, z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

KINDS = ("line", "triangle", "tetrahedron")
ROLES = ("functional", "elastic", "constrained")
METHODS = ("two_term", "three_term")

# nodes per element kind
NODES_PER_KIND = {"line": 2, "triangle": 3, "tetrahedron": 4}

DEFAULT_ALPHA = 0.2
DEFAULT_DAMPING = 0.98
DEFAULT_CONSTRAINT_RELAX = 0.5
DEFAULT_MAX_STEPS = 20000
DEFAULT_GRAD_TOL = 1e-3
DEFAULT_RESIDUAL_TOL = 1e-6


class ModelError(ValueError):
    """Base class for model file problems."""


class ModelFormatError(ModelError):
    """Malformed document (bad JSON, missing keys, wrong types)."""


class ModelSemanticsError(ModelError):
    """Well-formed document that violates a model invariant."""


@dataclass(frozen=True)
class Node:
    id: int
    pos: tuple[float, float, float]
    fixed: bool = False


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    node_ids: tuple[int, ...]
    role: str
    weight: float | None = None        # functional
    power: int | None = None           # functional (lines: 2 or 4, triangles: 2)
    stiffness: float | None = None     # elastic
    rest_metric: tuple[tuple[float, ...], ...] | None = None  # elastic
    target: float | None = None        # constrained

    @property
    def dim(self) -> int:
        return NODES_PER_KIND[self.kind] - 1


@dataclass(frozen=True)
class Load:
    node_id: int
    force: tuple[float, float, float]


@dataclass(frozen=True)
class SolverParams:
    method: str = "three_term"
    alpha: float = DEFAULT_ALPHA
    damping: float = DEFAULT_DAMPING
    constraint_relax: float = DEFAULT_CONSTRAINT_RELAX
    max_steps: int = DEFAULT_MAX_STEPS
    grad_tol: float = DEFAULT_GRAD_TOL
    residual_tol: float = DEFAULT_RESIDUAL_TOL


@dataclass(frozen=True)
class Model:
    nodes: tuple[Node, ...]
    elements: tuple[Element, ...]
    loads: tuple[Load, ...] = ()
    solver: SolverParams = field(default_factory=SolverParams)

    def node_by_id(self, node_id: int) -> Node:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(f"unknown node {node_id}")

    def element_by_id(self, element_id: int) -> Element:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise KeyError(f"unknown element {element_id}")


class DofMap:
    """Bijection between (free node id, axis) and index in the unknown vector.

    Ordering is deterministic: ascending node id, then axis x, y, z.
    """

    AXES = ("x", "y", "z")

    def __init__(self, model: Model):
        self.free_node_ids: tuple[int, ...] = tuple(
            sorted(n.id for n in model.nodes if not n.fixed)
        )
        self._index = {
            (nid, ax): 3 * i + a
            for i, nid in enumerate(self.free_node_ids)
            for a, ax in enumerate(self.AXES)
        }
        self.n = 3 * len(self.free_node_ids)

    def index(self, node_id: int, axis: str) -> int:
        return self._index[(node_id, axis)]

    def node_axis(self, k: int) -> tuple[int, str]:
        return self.free_node_ids[k // 3], self.AXES[k % 3]

    def indices_for_node(self, node_id: int) -> tuple[int, int, int] | None:
        """DOF indices (x, y, z) for a node, or None if the node is fixed."""
        key = (node_id, "x")
        if key not in self._index:
            return None
        base = self._index[key]
        return (base, base + 1, base + 2)

    def __eq__(self, other) -> bool:
        return isinstance(other, DofMap) and self.free_node_ids == other.free_node_ids

    def __hash__(self) -> int:
        return hash(self.free_node_ids)


def dof_map(model: Model) -> DofMap:
    return DofMap(model)


def gather_positions(model: Model, dofmap: DofMap) -> np.ndarray:
    """Free-node coordinates as the unknown vector x (length n)."""
    by_id = {n.id: n for n in model.nodes}
    x = np.empty(dofmap.n)
    for i, nid in enumerate(dofmap.free_node_ids):
        x[3 * i : 3 * i + 3] = by_id[nid].pos
    return x


def scatter_positions(model: Model, dofmap: DofMap, x) -> Model:
    """New model with free-node positions replaced by x. Fixed nodes untouched."""
    x = np.asarray(x, dtype=float)
    if x.shape != (dofmap.n,):
        raise ValueError(
            f"position vector length mismatch: expected {dofmap.n}, got {x.size}"
        )
    row = {nid: i for i, nid in enumerate(dofmap.free_node_ids)}
    nodes = tuple(
        n if n.fixed else replace(n, pos=tuple(float(v) for v in x[3 * row[n.id] : 3 * row[n.id] + 3]))
        for n in model.nodes
    )
    return replace(model, nodes=nodes)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_ROLE_FIELDS = {
    "functional": ("weight", "power"),
    "elastic": ("stiffness", "rest_metric"),
    "constrained": ("target",),
}
_ALL_ROLE_FIELDS = ("weight", "power", "stiffness", "rest_metric", "target")


def _initial_metric(model: Model, el: Element) -> tuple[tuple[float, ...], ...]:
    """Metric of an element measured on the model's initial positions."""
    pos = [model.node_by_id(nid).pos for nid in el.node_ids]
    nd = el.dim
    base = [np.subtract(pos[i], pos[i + 1]) for i in range(nd)]
    return tuple(
        tuple(float(np.dot(base[i], base[j])) for j in range(nd)) for i in range(nd)
    )


def _check_rest_metric(el: Element) -> None:
    nd = el.dim
    m = el.rest_metric
    if len(m) != nd or any(len(row) != nd for row in m):
        raise ModelSemanticsError(
            f"element {el.id}: rest_metric must be {nd}x{nd}"
        )
    a = np.asarray(m, dtype=float)
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, abs(a).max())):
        raise ModelSemanticsError(f"element {el.id}: rest_metric not symmetric")
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise ModelSemanticsError(
            f"element {el.id}: rest_metric not positive definite"
        ) from None


def validate_model(model: Model) -> Model:
    """Check all model invariants; returns the model with defaults filled in.

    The only default materialized here is the elastic rest metric, which is
    measured on the initial shape when the file omits it.
    """
    ids = [n.id for n in model.nodes]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ModelSemanticsError(f"duplicate node id {dup[0]}")
    for n in model.nodes:
        if n.id < 0:
            raise ModelSemanticsError(f"node {n.id}: id must be >= 0")
        if len(n.pos) != 3 or not all(math.isfinite(c) for c in n.pos):
            raise ModelSemanticsError(f"node {n.id}: position must be 3 finite values")

    node_ids = set(ids)
    free_ids = {n.id for n in model.nodes if not n.fixed}
    n_free = 3 * len(free_ids)
    if n_free == 0:
        raise ModelSemanticsError("model has no free degrees of freedom")

    eids = [e.id for e in model.elements]
    if len(set(eids)) != len(eids):
        dup = sorted({i for i in eids if eids.count(i) > 1})
        raise ModelSemanticsError(f"duplicate element id {dup[0]}")

    patched: list[Element] = []
    n_constrained = 0
    for el in model.elements:
        if el.kind not in KINDS:
            raise ModelSemanticsError(f"element {el.id}: unknown kind '{el.kind}'")
        if el.role not in ROLES:
            raise ModelSemanticsError(f"element {el.id}: unknown role '{el.role}'")
        need = NODES_PER_KIND[el.kind]
        if len(el.node_ids) != need:
            raise ModelSemanticsError(
                f"element {el.id}: {el.kind} takes {need} nodes, got {len(el.node_ids)}"
            )
        if len(set(el.node_ids)) != len(el.node_ids):
            raise ModelSemanticsError(f"element {el.id}: repeated node in element")
        for nid in el.node_ids:
            if nid not in node_ids:
                raise ModelSemanticsError(f"element {el.id}: unknown node {nid}")

        allowed = _ROLE_FIELDS[el.role]
        for name in _ALL_ROLE_FIELDS:
            if name not in allowed and getattr(el, name) is not None:
                raise ModelSemanticsError(
                    f"element {el.id}: field '{name}' not valid for role '{el.role}'"
                )

        if el.role == "functional":
            if el.kind == "tetrahedron":
                raise ModelSemanticsError(
                    f"element {el.id}: tetrahedra cannot take the functional role"
                )
            if el.weight is None or el.weight < 0:
                raise ModelSemanticsError(
                    f"element {el.id}: functional role needs weight >= 0"
                )
            power = 2 if el.power is None else el.power
            valid = (2, 4) if el.kind == "line" else (2,)
            if power not in valid:
                raise ModelSemanticsError(
                    f"element {el.id}: power {power} not supported for {el.kind}"
                )
            el = replace(el, power=power)
        elif el.role == "elastic":
            if el.stiffness is None or not el.stiffness > 0:
                raise ModelSemanticsError(
                    f"element {el.id}: elastic role needs stiffness > 0"
                )
            if el.rest_metric is None:
                el = replace(el, rest_metric=_initial_metric(model, el))
            _check_rest_metric(el)
        else:  # constrained
            if el.kind != "line":
                raise ModelSemanticsError(
                    f"element {el.id}: only line elements can be constrained"
                )
            if el.target is None or not el.target > 0:
                raise ModelSemanticsError(
                    f"element {el.id}: constrained role needs target > 0"
                )
            n_constrained += 1
        patched.append(el)

    if n_constrained >= n_free:
        raise ModelSemanticsError(
            f"{n_constrained} constraints but only {n_free} free degrees of freedom;"
            " the constraint rows must be fewer than the unknowns"
        )

    for ld in model.loads:
        if ld.node_id not in node_ids:
            raise ModelSemanticsError(f"load references unknown node {ld.node_id}")
        if ld.node_id not in free_ids:
            raise ModelSemanticsError(f"load references fixed node {ld.node_id}")
        if len(ld.force) != 3 or not all(math.isfinite(c) for c in ld.force):
            raise ModelSemanticsError(
                f"load on node {ld.node_id}: force must be 3 finite values"
            )

    sp = model.solver
    if sp.method not in METHODS:
        raise ModelSemanticsError(f"unknown solver method '{sp.method}'")
    if not sp.alpha > 0:
        raise ModelSemanticsError("solver alpha must be > 0")
    if not 0 < sp.damping <= 1:
        raise ModelSemanticsError("solver damping must be in (0, 1]")
    if not 0 < sp.constraint_relax <= 1:
        raise ModelSemanticsError("solver constraint_relax must be in (0, 1]")
    if sp.max_steps < 0:
        raise ModelSemanticsError("solver max_steps must be >= 0")
    if not sp.grad_tol > 0 or not sp.residual_tol > 0:
        raise ModelSemanticsError("solver tolerances must be > 0")

    return replace(model, elements=tuple(patched))


# ---------------------------------------------------------------------------
# JSON document I/O
# ---------------------------------------------------------------------------

def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ModelFormatError(f"{where}: missing required key '{key}'")
    return obj[key]


def _tuple3(value, where: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ModelFormatError(f"{where}: expected 3 numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ModelFormatError(f"{where}: expected 3 numbers") from None


def parse_model(text: str) -> Model:
    """Parse and validate a model document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ModelFormatError("top level must be a JSON object")

    nodes = []
    for i, nd in enumerate(doc.get("nodes", [])):
        where = f"nodes[{i}]"
        if not isinstance(nd, dict):
            raise ModelFormatError(f"{where}: expected an object")
        nodes.append(
            Node(
                id=int(_require(nd, "id", where)),
                pos=_tuple3(_require(nd, "pos", where), f"{where}.pos"),
                fixed=bool(nd.get("fixed", False)),
            )
        )

    elements = []
    for i, ed in enumerate(doc.get("elements", [])):
        where = f"elements[{i}]"
        if not isinstance(ed, dict):
            raise ModelFormatError(f"{where}: expected an object")
        rest = ed.get("rest_metric")
        if rest is not None:
            try:
                rest = tuple(tuple(float(v) for v in row) for row in rest)
            except (TypeError, ValueError):
                raise ModelFormatError(f"{where}.rest_metric: expected a matrix") from None
        elements.append(
            Element(
                id=int(_require(ed, "id", where)),
                kind=str(_require(ed, "kind", where)),
                node_ids=tuple(int(v) for v in _require(ed, "nodes", where)),
                role=str(_require(ed, "role", where)),
                weight=None if ed.get("weight") is None else float(ed["weight"]),
                power=None if ed.get("power") is None else int(ed["power"]),
                stiffness=None if ed.get("stiffness") is None else float(ed["stiffness"]),
                rest_metric=rest,
                target=None if ed.get("target") is None else float(ed["target"]),
            )
        )

    loads = []
    for i, ld in enumerate(doc.get("loads", [])):
        where = f"loads[{i}]"
        if not isinstance(ld, dict):
            raise ModelFormatError(f"{where}: expected an object")
        loads.append(
            Load(
                node_id=int(_require(ld, "node", where)),
                force=_tuple3(_require(ld, "force", where), f"{where}.force"),
            )
        )

    sd = doc.get("solver", {})
    if not isinstance(sd, dict):
        raise ModelFormatError("solver: expected an object")
    solver = SolverParams(
        method=str(sd.get("method", "three_term")),
        alpha=float(sd.get("alpha", DEFAULT_ALPHA)),
        damping=float(sd.get("damping", DEFAULT_DAMPING)),
        constraint_relax=float(sd.get("constraint_relax", DEFAULT_CONSTRAINT_RELAX)),
        max_steps=int(sd.get("max_steps", DEFAULT_MAX_STEPS)),
        grad_tol=float(sd.get("grad_tol", DEFAULT_GRAD_TOL)),
        residual_tol=float(sd.get("residual_tol", DEFAULT_RESIDUAL_TOL)),
    )

    model = Model(
        nodes=tuple(nodes), elements=tuple(elements), loads=tuple(loads), solver=solver
    )
    return validate_model(model)


def model_to_dict(model: Model) -> dict:
    doc: dict = {
        "nodes": [
            {"id": n.id, "pos": list(n.pos), "fixed": n.fixed} for n in model.nodes
        ],
        "elements": [],
        "loads": [
            {"node": ld.node_id, "force": list(ld.force)} for ld in model.loads
        ],
        "solver": {
            "method": model.solver.method,
            "alpha": model.solver.alpha,
            "damping": model.solver.damping,
            "constraint_relax": model.solver.constraint_relax,
            "max_steps": model.solver.max_steps,
            "grad_tol": model.solver.grad_tol,
            "residual_tol": model.solver.residual_tol,
        },
    }
    for el in model.elements:
        ed: dict = {
            "id": el.id,
            "kind": el.kind,
            "nodes": list(el.node_ids),
            "role": el.role,
        }
        if el.weight is not None:
            ed["weight"] = el.weight
        if el.power is not None:
            ed["power"] = el.power
        if el.stiffness is not None:
            ed["stiffness"] = el.stiffness
        if el.rest_metric is not None:
            ed["rest_metric"] = [list(row) for row in el.rest_metric]
        if el.target is not None:
            ed["target"] = el.target
        doc["elements"].append(ed)
    return doc


def serialize_model(model: Model) -> str:
    """Inverse of parse_model; coordinates survive the round trip bit-exactly."""
    return json.dumps(model_to_dict(model), indent=1)


# ---------------------------------------------------------------------------
# Flat element tables for batch evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ElementGroup:
    """One homogeneous batch of elements: same kind, same role."""

    ids: np.ndarray          # (m,) element ids, ascending
    conn: np.ndarray         # (m, N+1) node row indices
    dofs: np.ndarray         # (m, 3*(N+1)) global DOF indices, -1 for fixed
    weight: np.ndarray | None = None
    power: np.ndarray | None = None
    stiffness: np.ndarray | None = None
    rest_metric: np.ndarray | None = None  # (m, N, N)
    target: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.ids)


class ElementTables:
    """Per-model numeric arrays shared by the evaluation routines.

    Immutable once built; a modified model (weights, targets, fixed nodes)
    gets fresh tables.
    """

    def __init__(self, model: Model):
        self.model = model
        self.dofmap = DofMap(model)
        self.n = self.dofmap.n

        order = sorted(model.nodes, key=lambda nd: nd.id)
        self.node_ids = np.array([nd.id for nd in order], dtype=np.intp)
        self.row_of_id = {nd.id: i for i, nd in enumerate(order)}
        self.X0 = np.array([nd.pos for nd in order], dtype=float)
        self.free_mask = np.array([not nd.fixed for nd in order], dtype=bool)
        self.free_rows = np.flatnonzero(self.free_mask)

        # (num_nodes, 3) -> global DOF index or -1
        self.node_dofs = np.full((len(order), 3), -1, dtype=np.intp)
        self.node_dofs[self.free_rows] = np.arange(self.n).reshape(-1, 3)

        self.load_row = np.zeros(self.n)
        for ld in model.loads:
            r = self.row_of_id[ld.node_id]
            self.load_row[self.node_dofs[r]] += ld.force
        self.has_loads = bool(model.loads)

        def group(elements: list[Element]) -> ElementGroup:
            elements = sorted(elements, key=lambda e: e.id)
            m = len(elements)
            if m == 0:
                return ElementGroup(
                    ids=np.empty(0, dtype=np.intp),
                    conn=np.empty((0, 0), dtype=np.intp),
                    dofs=np.empty((0, 0), dtype=np.intp),
                )
            width = NODES_PER_KIND[elements[0].kind]
            conn = np.array(
                [[self.row_of_id[nid] for nid in e.node_ids] for e in elements],
                dtype=np.intp,
            )
            dofs = self.node_dofs[conn].reshape(m, 3 * width)
            kwargs = {}
            role = elements[0].role
            if role == "functional":
                kwargs["weight"] = np.array([e.weight for e in elements], dtype=float)
                kwargs["power"] = np.array([e.power for e in elements], dtype=np.intp)
            elif role == "elastic":
                kwargs["stiffness"] = np.array(
                    [e.stiffness for e in elements], dtype=float
                )
                kwargs["rest_metric"] = np.array(
                    [e.rest_metric for e in elements], dtype=float
                )
            else:
                kwargs["target"] = np.array([e.target for e in elements], dtype=float)
            return ElementGroup(
                ids=np.array([e.id for e in elements], dtype=np.intp),
                conn=conn,
                dofs=dofs,
                **kwargs,
            )

        by = lambda role, kind: [
            e for e in model.elements if e.role == role and e.kind == kind
        ]
        self.functional_lines = group(by("functional", "line"))
        self.functional_tris = group(by("functional", "triangle"))
        self.elastic_lines = group(by("elastic", "line"))
        self.elastic_tris = group(by("elastic", "triangle"))
        self.elastic_tets = group(by("elastic", "tetrahedron"))
        self.constrained = group(by("constrained", "line"))

        self.has_functional = len(self.functional_lines) + len(self.functional_tris) > 0
        self.has_elastic = (
            len(self.elastic_lines) + len(self.elastic_tris) + len(self.elastic_tets) > 0
        )

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Full (num_nodes, 3) coordinate array for an unknown vector x."""
        X = self.X0.copy()
        X[self.free_rows] = np.asarray(x, dtype=float).reshape(-1, 3)
        return X

    def accumulate(self, out: np.ndarray, group: ElementGroup, rows: np.ndarray) -> None:
        """Scatter-add per-element rows into a dense vector, dropping fixed DOFs.

        np.add.at processes entries in array order, so the reduction is
        ordered by ascending element id and reruns are bit-identical.
        """
        dofs = group.dofs.ravel()
        keep = dofs >= 0
        np.add.at(out, dofs[keep], rows.ravel()[keep])


@lru_cache(maxsize=16)
def _tables_cached(model: Model) -> ElementTables:
    return ElementTables(model)


def build_tables(model: Model) -> ElementTables:
    """Tables for a model; cached since models are immutable."""
    try:
        return _tables_cached(model)
    except TypeError:  # unhashable content; build uncached
        return ElementTables(model)
