"""Reachability queries over a network: value ranges, safety, robustness.

A query fixes a base input and lets a subset of input dimensions roam a box.
For a scalar function ``o`` of the network outputs, the reachable values of
``o . f`` over that box are bracketed by running the nested optimizer twice
(minimize and maximize).  The returned interval is the certified outer
bracket: ``lower`` does not exceed the true infimum and ``upper`` is not
below the true supremum, each within the query tolerance when the run
converges in static mode.  Witness inputs attaining the inner estimates come
along for free.

Safety reduces to one maximization: with base label ``j``, the margin
``max_{i != j} (c_i - c_j)`` is positive exactly on misclassified inputs, so
a certified non-positive upper bound proves the whole box keeps the label,
and any evaluated point with positive margin is an adversarial witness.
Robustness comparisons order reachability diameters, with an indifference
band of twice the tolerance since each diameter carries up to one tolerance
of slack per endpoint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lipschitz import DEFAULT_ETA, network_constant
from .model import NetworkModel, forward, forward_batch
from .optnd import NestedProblem, maximize_nd, minimize_nd

SQRT2 = float(np.sqrt(2.0))


class QueryError(ValueError):
    """Raised for structurally invalid queries."""


@dataclass(frozen=True)
class QuerySubspace:
    """A base input plus free dimensions with per-dimension box bounds."""

    base: np.ndarray
    free_dims: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        base = np.array(self.base, dtype=np.float64)
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "free_dims", tuple(int(d) for d in self.free_dims))
        object.__setattr__(
            self, "bounds", tuple((float(a), float(b)) for a, b in self.bounds)
        )
        if base.ndim != 1:
            raise QueryError("base input must be a vector")
        if not self.free_dims:
            raise QueryError("at least one free dimension is required")
        if len(set(self.free_dims)) != len(self.free_dims):
            raise QueryError("free dimensions must be distinct")
        if any(d < 0 or d >= base.shape[0] for d in self.free_dims):
            raise QueryError("free dimension index out of range")
        if len(self.bounds) != len(self.free_dims):
            raise QueryError("one bound pair per free dimension is required")
        if any(not a < b for a, b in self.bounds):
            raise QueryError("degenerate (zero-width) bounds are not allowed")

    def validate_for(
        self,
        net: NetworkModel,
        input_box: Sequence[tuple[float, float]] | None = None,
    ) -> None:
        if self.base.shape[0] != net.input_dim:
            raise QueryError(
                f"base has length {self.base.shape[0]}, network expects {net.input_dim}"
            )
        if input_box is not None:
            for dim, (a, b) in zip(self.free_dims, self.bounds):
                lo, hi = input_box[dim]
                if a < lo or b > hi:
                    raise QueryError(
                        f"bounds [{a}, {b}] on dimension {dim} leave the "
                        f"input box [{lo}, {hi}]"
                    )


@dataclass(frozen=True)
class OSpec:
    """A scalar output functional with its own Lipschitz factor."""

    name: str
    fn: Callable[[np.ndarray], float]
    fn_batch: Callable[[np.ndarray], np.ndarray]
    lipschitz_factor: float


def projection(label: int) -> OSpec:
    """o = the confidence of one class label."""
    return OSpec(
        name=f"projection[{label}]",
        fn=lambda c: float(c[label]),
        fn_batch=lambda ys: ys[:, label],
        lipschitz_factor=1.0,
    )


def margin(label: int, width: int) -> OSpec:
    """o = best rival confidence minus the base label's confidence.

    Positive exactly when the argmax moved off ``label``.  The base label's
    own (zero) difference is excluded, otherwise the supremum could never be
    certified negative.
    """
    if width < 2:
        raise QueryError("margin needs at least two output labels")
    rivals = [i for i in range(width) if i != label]
    return OSpec(
        name=f"margin[{label}]",
        fn=lambda c: float(np.max(c[rivals] - c[label])),
        fn_batch=lambda ys: np.max(ys[:, rivals] - ys[:, [label]], axis=1),
        lipschitz_factor=SQRT2,
    )


def max_outputs() -> OSpec:
    """o = the largest output coordinate."""
    return OSpec(
        name="max-of-outputs",
        fn=lambda c: float(np.max(c)),
        fn_batch=lambda ys: np.max(ys, axis=1),
        lipschitz_factor=1.0,
    )


def ospec_by_name(name: str, label: int, width: int) -> OSpec:
    if name == "projection":
        return projection(label)
    if name == "margin":
        return margin(label, width)
    if name == "max-of-outputs":
        return max_outputs()
    raise QueryError(f"unknown output functional {name!r}")


def composed_objective(
    net: NetworkModel, subspace: QuerySubspace, o: OSpec, tap: str
) -> Callable[[np.ndarray], float]:
    """``o . f`` as a function of the full input vector."""
    return lambda x: o.fn(forward(net, x, tap))


def batch_objective(
    net: NetworkModel, subspace: QuerySubspace, o: OSpec, tap: str
) -> Callable[[np.ndarray], np.ndarray]:
    """``o . f`` over a matrix of free-dimension points (for grid oracles)."""
    dims = list(subspace.free_dims)

    def run(points: np.ndarray) -> np.ndarray:
        xs = np.tile(subspace.base, (len(points), 1))
        xs[:, dims] = points
        return o.fn_batch(forward_batch(net, xs, tap))

    return run


@dataclass
class ReachResult:
    """Certified reachable-value bracket for one query."""

    lower: float
    upper: float
    min_witness: np.ndarray
    max_witness: np.ndarray
    min_value: float
    max_value: float
    epsilon: float
    certified: bool
    converged: bool
    evaluations: int
    wall_time: float
    o_name: str
    tap: str
    mode: str

    @property
    def diameter(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "diameter": self.diameter,
            "min_witness": self.min_witness.tolist(),
            "max_witness": self.max_witness.tolist(),
            "min_value": self.min_value,
            "max_value": self.max_value,
            "epsilon": self.epsilon,
            "certified": self.certified,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "o": self.o_name,
            "tap": self.tap,
            "mode": self.mode,
        }


@dataclass
class SafetyVerdict:
    """Outcome of a safety query: safe, unsafe (with witness), or unknown."""

    verdict: str
    sup_bound: float
    attained: float
    base_label: int
    error_band: float
    witness: np.ndarray | None = None
    certified: bool = False
    converged: bool = False
    evaluations: int = 0
    wall_time: float = 0.0
    tap: str = "output"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sup_bound": self.sup_bound,
            "attained": self.attained,
            "base_label": self.base_label,
            "error_band": self.error_band,
            "witness": None if self.witness is None else self.witness.tolist(),
            "certified": self.certified,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "tap": self.tap,
        }


@dataclass
class ComparisonVerdict:
    """Ordering of two reachability diameters with a 2-epsilon dead band."""

    relation: str  # "first_more_robust" | "second_more_robust" | "incomparable"
    diameter_first: float
    diameter_second: float
    band: float
    first: ReachResult = field(repr=False, default=None)
    second: ReachResult = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "diameter_first": self.diameter_first,
            "diameter_second": self.diameter_second,
            "band": self.band,
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
        }


def _problem(
    net: NetworkModel,
    subspace: QuerySubspace,
    o: OSpec,
    tap: str,
    epsilon: float,
    mode: str,
    eta: float,
) -> NestedProblem:
    subspace.validate_for(net)
    budget = network_constant(net, tap=tap, mode=mode, eta=eta).scaled(
        o.lipschitz_factor
    )
    return NestedProblem(
        dims=subspace.free_dims,
        bounds=subspace.bounds,
        fixed=subspace.base,
        objective=composed_objective(net, subspace, o, tap),
        budget=budget,
        epsilon_total=epsilon,
    )


def output_range(
    net: NetworkModel,
    subspace: QuerySubspace,
    label: int | None = None,
    tap: str = "output",
    epsilon: float = 0.01,
    mode: str = "static",
    eta: float = DEFAULT_ETA,
    nd_mode: str = "adaptive",
    o: OSpec | None = None,
) -> ReachResult:
    """Bracket the reachable values of ``o . f`` (default: one label's output)."""
    if o is None:
        if label is None:
            raise QueryError("output_range needs a label or an explicit o")
        if label < 0 or label >= net.width_at_tap(tap):
            raise QueryError(f"label {label} out of range at tap {tap!r}")
        o = projection(label)
    start = time.perf_counter()
    problem = _problem(net, subspace, o, tap, epsilon, mode, eta)
    mn = minimize_nd(problem, mode=nd_mode)
    mx = maximize_nd(problem, mode=nd_mode)
    converged = mn.converged and mx.converged
    certified = (
        mode == "static" and converged and not (mn.k_breached or mx.k_breached)
    )
    return ReachResult(
        lower=mn.lower,
        upper=mx.upper,
        min_witness=mn.best_point,
        max_witness=mx.best_point,
        min_value=mn.upper,
        max_value=mx.lower,
        epsilon=epsilon,
        certified=certified,
        converged=converged,
        evaluations=mn.evaluations + mx.evaluations,
        wall_time=time.perf_counter() - start,
        o_name=o.name,
        tap=tap,
        mode=mode,
    )


def verify_safety(
    net: NetworkModel,
    subspace: QuerySubspace,
    epsilon: float = 0.05,
    tap: str | None = None,
    mode: str = "static",
    eta: float = DEFAULT_ETA,
    nd_mode: str = "adaptive",
) -> SafetyVerdict:
    """Decide whether the subspace preserves the base input's label.

    ``safe`` requires the certified upper bound on the margin to be
    non-positive; ``unsafe`` requires an evaluated input whose margin is
    strictly positive (shipped as the witness).  When zero falls inside the
    residual band the verdict is ``unknown`` rather than a guess.
    """
    subspace.validate_for(net)
    if tap is None:
        tap = "logit" if net.has_softmax else "output"
    start = time.perf_counter()
    outputs = forward(net, subspace.base, tap)
    order = np.argsort(outputs)
    if len(order) >= 2 and outputs[order[-1]] == outputs[order[-2]]:
        raise QueryError("base input has no unique argmax label")
    base_label = int(order[-1])
    o = margin(base_label, len(outputs))
    problem = _problem(net, subspace, o, tap, epsilon, mode, eta)
    mx = maximize_nd(problem, mode=nd_mode)
    certified = mode == "static" and mx.converged and not mx.k_breached

    if mx.lower > 0.0:
        verdict, witness = "unsafe", mx.best_point
    elif mx.upper <= 0.0:
        # heuristic rather than a certificate unless the run was certified
        verdict, witness = "safe", None
    else:
        verdict, witness = "unknown", None
    return SafetyVerdict(
        verdict=verdict,
        sup_bound=mx.upper,
        attained=mx.lower,
        base_label=base_label,
        error_band=2.0 * epsilon,
        witness=witness,
        certified=certified,
        converged=mx.converged,
        evaluations=mx.evaluations,
        wall_time=time.perf_counter() - start,
        tap=tap,
    )


def softmax_margin_bound(confidence_lower: float) -> float:
    """Upper bound on a softmax net's margin from one label's certified lower.

    Softmax outputs sum to one, so a rival's confidence is at most
    ``1 - confidence_lower`` and the margin at most ``1 - 2*confidence_lower``;
    a certified lower above one half proves safety on its own.
    """
    return 1.0 - 2.0 * confidence_lower


def _compare(first: ReachResult, second: ReachResult, epsilon: float) -> ComparisonVerdict:
    band = 2.0 * epsilon
    d1, d2 = first.diameter, second.diameter
    if abs(d1 - d2) <= band:
        relation = "incomparable"
    elif d1 < d2:
        relation = "first_more_robust"
    else:
        relation = "second_more_robust"
    return ComparisonVerdict(
        relation=relation,
        diameter_first=d1,
        diameter_second=d2,
        band=band,
        first=first,
        second=second,
    )


def compare_networks(
    first: NetworkModel,
    second: NetworkModel,
    subspace: QuerySubspace,
    o: OSpec | None = None,
    label: int = 0,
    tap: str = "output",
    epsilon: float = 0.01,
    mode: str = "static",
    eta: float = DEFAULT_ETA,
    nd_mode: str = "adaptive",
) -> ComparisonVerdict:
    """Order two same-shape networks by reachability diameter (smaller wins)."""
    if (first.input_dim, first.width_at_tap(tap)) != (
        second.input_dim,
        second.width_at_tap(tap),
    ):
        raise QueryError("networks must share input and output dimensions")
    kwargs = dict(tap=tap, epsilon=epsilon, mode=mode, eta=eta, nd_mode=nd_mode)
    o = o or projection(label)
    r1 = output_range(first, subspace, o=o, **kwargs)
    r2 = output_range(second, subspace, o=o, **kwargs)
    return _compare(r1, r2, epsilon)


def compare_subspaces(
    net: NetworkModel,
    first: QuerySubspace,
    second: QuerySubspace,
    o: OSpec | None = None,
    label: int = 0,
    tap: str = "output",
    epsilon: float = 0.01,
    mode: str = "static",
    eta: float = DEFAULT_ETA,
    nd_mode: str = "adaptive",
) -> ComparisonVerdict:
    """Order two input subspaces of one network by reachability diameter."""
    kwargs = dict(tap=tap, epsilon=epsilon, mode=mode, eta=eta, nd_mode=nd_mode)
    o = o or projection(label)
    r1 = output_range(net, first, o=o, **kwargs)
    r2 = output_range(net, second, o=o, **kwargs)
    return _compare(r1, r2, epsilon)
