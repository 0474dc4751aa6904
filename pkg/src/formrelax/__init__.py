"""Form finding and large-deformation statics by direct minimization.

Pin-jointed and simplex-element structures are driven to equilibrium by
normalized fixed-step descent (with or without a damped momentum term),
length constraints are handled through explicit least-norm multiplier
estimates, and elastic problems assemble the discrete virtual-work row per
element. A batch CLI and a WebSocket steering service sit on top.
"""

from .backends import backend_name
from .constraints import (
    ConstraintSystem,
    build_constraints,
    dual_estimate,
    least_norm_solve,
    residual_correction,
)
from .forces import AssembledForce, StressTensor, assemble_omega, constitutive_linear, element_omega
from .functionals import FunctionalValue, eval_pi, update_weight
from .geometry import (
    DegenerateElementError,
    ElementGeometry,
    SparseRow,
    element_geometry,
    grad_area,
    grad_length,
    grad_metric,
)
from .model import (
    DofMap,
    Element,
    Load,
    Model,
    ModelError,
    ModelFormatError,
    ModelSemanticsError,
    Node,
    SolverParams,
    dof_map,
    gather_positions,
    model_to_dict,
    parse_model,
    scatter_positions,
    serialize_model,
    validate_model,
)
from .solver import (
    DivergenceError,
    Direction,
    HistoryEntry,
    Relaxation,
    SolverState,
    history_csv,
    run,
    search_direction,
    three_term_step,
    two_term_step,
)

__version__ = "0.1.0"
