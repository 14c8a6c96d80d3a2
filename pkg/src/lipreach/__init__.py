"""Certified reachability analysis for feed-forward networks.

Given a network, an input subspace (a base input with a boxed subset of free
dimensions), and a Lipschitz-continuous output functional, this package
computes guaranteed lower/upper bounds on the functional's reachable values
and instantiates them into range, safety, and robustness queries.  The core
engine is a one-dimensional global optimizer with a piecewise-linear
(sawtooth) lower bound, nested adaptively across dimensions.
"""

__version__ = "0.1.0"

from .lipschitz import (
    LipschitzBudget,
    dynamic_update,
    empty_dynamic_budget,
    layer_constant,
    network_constant,
)
from .model import (
    Layer,
    ModelFormatError,
    NetworkModel,
    forward,
    forward_batch,
    load_model,
    load_model_file,
    save_model,
)
from .opt1d import (
    EvaluationError,
    OptConfig,
    OptOutcome,
    SawtoothState,
    interval_min,
    minimize_1d,
    new_point,
)
from .optnd import (
    NdOutcome,
    NestedProblem,
    SubproblemPool,
    characteristic,
    maximize_nd,
    minimize_nd,
)
from .oracle import GridCapError, GridResult, GridSpec, grid_extrema
from .reach import (
    ComparisonVerdict,
    OSpec,
    QueryError,
    QuerySubspace,
    ReachResult,
    SafetyVerdict,
    compare_networks,
    compare_subspaces,
    margin,
    max_outputs,
    output_range,
    projection,
    softmax_margin_bound,
    verify_safety,
)
from .satgen import (
    CnfFormula,
    DimacsError,
    build_network,
    corner_decision,
    parse_dimacs,
    sat_objective,
)

__all__ = [
    "__version__",
    "CnfFormula",
    "ComparisonVerdict",
    "DimacsError",
    "EvaluationError",
    "GridCapError",
    "GridResult",
    "GridSpec",
    "Layer",
    "LipschitzBudget",
    "ModelFormatError",
    "NdOutcome",
    "NestedProblem",
    "NetworkModel",
    "OSpec",
    "OptConfig",
    "OptOutcome",
    "QueryError",
    "QuerySubspace",
    "ReachResult",
    "SafetyVerdict",
    "SawtoothState",
    "SubproblemPool",
    "build_network",
    "characteristic",
    "compare_networks",
    "compare_subspaces",
    "corner_decision",
    "dynamic_update",
    "empty_dynamic_budget",
    "forward",
    "forward_batch",
    "grid_extrema",
    "interval_min",
    "layer_constant",
    "load_model",
    "load_model_file",
    "margin",
    "max_outputs",
    "maximize_nd",
    "minimize_1d",
    "minimize_nd",
    "network_constant",
    "new_point",
    "output_range",
    "parse_dimacs",
    "projection",
    "sat_objective",
    "save_model",
    "softmax_margin_bound",
    "verify_safety",
]
