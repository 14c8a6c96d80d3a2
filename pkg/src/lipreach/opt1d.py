"""Certified one-dimensional global minimization over an interval.

The algorithm maintains a piecewise-linear lower bound of the objective
built from evaluated points: every sample ``(y, w(y))`` contributes a tooth
``w(y) - K |x - y|``, and the pointwise maximum of all teeth under-estimates
``w`` whenever ``K`` dominates the true Lipschitz constant.  Each iteration
locates the deepest tooth intersection, evaluates the objective there, and
splits that interval in two, which tightens the global lower bound while the
best evaluated value tightens the upper bound.  Iteration stops once the two
bounds are within ``epsilon``.

With a sound static constant the returned interval is a certificate: the
true minimum lies in ``[lower, upper]`` and ``upper`` is attained at
``best_point``.  In dynamic mode the constant is estimated from observed
slopes (inflated by eta) and refreshed after every evaluation; results are
then heuristic and flagged as such by callers.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

from .lipschitz import LipschitzBudget, dynamic_update

DEFAULT_K_FLOOR = 1e-12
# clamped proposals are pulled this fraction of the interval width inside
CLAMP_MARGIN = 0.05


class EvaluationError(RuntimeError):
    """Objective returned a non-finite value; ``point`` is the abscissa."""

    def __init__(self, point, value):
        super().__init__(f"objective returned non-finite value {value!r} at {point!r}")
        self.point = point
        self.value = value


class NewPoint(NamedTuple):
    point: float
    breached: bool


def new_point(
    y_left: float,
    y_right: float,
    w_left: float,
    w_right: float,
    k: float,
    k_floor: float = DEFAULT_K_FLOOR,
) -> NewPoint:
    """Deepest point of the two teeth spanning ``[y_left, y_right]``.

    Returns ``(y_left + y_right)/2 - (w_right - w_left)/(2K)``.  Under a
    sound constant this lies strictly inside the interval; otherwise it is
    clamped inward and flagged as a constant breach.
    """
    if not y_left < y_right:
        raise ValueError(f"degenerate interval [{y_left}, {y_right}]")
    if k < k_floor:
        raise ValueError(f"constant {k} below floor {k_floor}")
    raw = 0.5 * (y_left + y_right) - (w_right - w_left) / (2.0 * k)
    if y_left < raw < y_right:
        return NewPoint(raw, False)
    margin = CLAMP_MARGIN * (y_right - y_left)
    clamped = min(max(raw, y_left + margin), y_right - margin)
    return NewPoint(clamped, True)


def interval_min(
    y_left: float, y_right: float, w_left: float, w_right: float, k: float
) -> float:
    """Sawtooth minimum over ``[y_left, y_right]``.

    Equals ``(w_left + w_right)/2 - K (y_right - y_left)/2``; this does not
    exceed ``min(w_left, w_right)`` as long as ``K`` dominates the slope
    between the two endpoints.
    """
    if not y_left < y_right:
        raise ValueError(f"degenerate interval [{y_left}, {y_right}]")
    return 0.5 * (w_left + w_right) - 0.5 * k * (y_right - y_left)


@dataclass
class IterationRecord:
    """Per-iteration trace used by invariant checks."""

    z_star: float
    y_new: float
    w_new: float
    z_left: float
    z_right: float
    lower: float
    upper: float
    breached: bool


class SawtoothState:
    """Evaluated points, per-interval sawtooth minima, and bound history.

    ``lower`` is the minimum over all interval minima (the sawtooth's global
    minimum), ``upper`` the best evaluated value.  ``lower_history`` records
    strict improvements of the certified lower bound; ``upper_history`` holds
    one entry per iteration and never increases.  Exact ties between interval
    minima can hold the lower bound flat for an iteration (several teeth of
    equal depth), which is why only improvements are recorded.
    """

    def __init__(self, a: float, b: float, wa: float, wb: float, k: float):
        if not a < b:
            raise ValueError(f"degenerate domain [{a}, {b}]")
        self.k = k
        self.points: list[float] = [a, b]
        self.values: dict[float, float] = {a: wa, b: wb}
        self._intervals: dict[float, tuple[float, float]] = {}
        self._heap: list[tuple[float, float]] = []
        self.iteration = 0
        self.breach_hint = False
        self.upper, self.best_point = min((wa, a), (wb, b))
        self._link(a, b)
        self.lower = self._peek()[0]
        self.lower_history: list[float] = [self.lower]
        self.upper_history: list[float] = [self.upper]

    # -- interval bookkeeping -------------------------------------------------

    def _link(self, left: float, right: float) -> float:
        wl, wr = self.values[left], self.values[right]
        z = interval_min(left, right, wl, wr, self.k)
        if z > min(wl, wr):
            # the constant underestimates the slope between these samples
            self.breach_hint = True
        self._intervals[left] = (right, z)
        heapq.heappush(self._heap, (z, left))
        return z

    def _peek(self) -> tuple[float, float, float]:
        while self._heap:
            z, left = self._heap[0]
            entry = self._intervals.get(left)
            if entry is not None and entry[1] == z:
                return z, left, entry[0]
            heapq.heappop(self._heap)
        raise RuntimeError("sawtooth state has no intervals")

    def select(self) -> tuple[float, float, float]:
        """Current deepest interval as ``(z_star, left, right)``.

        Ties on the minimum are broken towards the leftmost interval.
        """
        return self._peek()

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def samples(self) -> list[tuple[float, float]]:
        return [(y, self.values[y]) for y in self.points]

    # -- state transitions ----------------------------------------------------

    def insert(self, y: float, wy: float) -> tuple[float, float]:
        """Split the interval containing ``y``; returns the two new minima."""
        idx = bisect_left(self.points, y)
        if not 0 < idx < len(self.points):
            raise ValueError(f"point {y} outside the domain")
        left, right = self.points[idx - 1], self.points[idx]
        if not left < y < right:
            raise ValueError(f"point {y} duplicates an existing sample")
        insort(self.points, y)
        self.values[y] = wy
        z_left = self._link(left, y)
        z_right = self._link(y, right)
        if wy < self.upper:
            self.upper, self.best_point = wy, y
        self.lower = self._peek()[0]
        self.iteration += 1
        return z_left, z_right

    def recompute(self, k: float) -> None:
        """Rebuild every interval minimum under a new constant."""
        self.k = k
        self._intervals.clear()
        self._heap.clear()
        for left, right in zip(self.points, self.points[1:]):
            self._link(left, right)
        self.lower = self._peek()[0]

    def revise_value(self, y: float, wy: float) -> None:
        """Lower the stored value at ``y`` (nested solves refine estimates).

        Only downward revisions are meaningful: the nested scheme feeds best
        evaluated values, which decrease monotonically as children refine.
        """
        if wy >= self.values[y]:
            return
        self.values[y] = wy
        if wy < self.upper:
            self.upper, self.best_point = wy, y
        idx = self.points.index(y)
        if idx > 0:
            self._link(self.points[idx - 1], y)
        if idx < len(self.points) - 1:
            self._link(y, self.points[idx + 1])
        self.lower = self._peek()[0]

    def record(self) -> None:
        """Append the current bounds to the history (one call per iteration)."""
        self.upper_history.append(self.upper)
        if self.lower > self.lower_history[-1]:
            self.lower_history.append(self.lower)


@dataclass(frozen=True)
class OptConfig:
    """Termination tolerance, iteration budget, and the constant to use.

    ``exact_values`` marks objectives that return true function values;
    nested callers clear it for levels fed by inner-solve estimates, whose
    bounded noise can fake slope spikes without any real constant breach.
    """

    lipschitz: LipschitzBudget
    epsilon: float = 1e-3
    max_iterations: int = 200_000
    k_floor: float = DEFAULT_K_FLOOR
    collect_trace: bool = False
    exact_values: bool = True

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class OptOutcome:
    """Result interval, witness, and solver accounting."""

    lower: float
    upper: float
    best_point: float
    converged: bool
    iterations: int
    evaluations: int
    k_final: float
    k_breached: bool = False
    trace: list[IterationRecord] = field(default_factory=list)
    # final (y, w(y)) samples; populated only when tracing is enabled
    samples: list[tuple[float, float]] = field(default_factory=list)


def minimize_1d(
    objective: Callable[[float], float], a: float, b: float, cfg: OptConfig
) -> OptOutcome:
    """Minimize ``objective`` over ``[a, b]`` to within ``cfg.epsilon``.

    Raises :class:`EvaluationError` if the objective returns a non-finite
    value.  A run that exhausts ``max_iterations`` reports its current bounds
    with ``converged=False`` rather than truncating silently.
    """
    if not a < b:
        raise ValueError(f"degenerate domain [{a}, {b}]")
    evaluations = 0

    def evaluate(x: float) -> float:
        nonlocal evaluations
        v = float(objective(x))
        if not math.isfinite(v):
            raise EvaluationError(x, v)
        evaluations += 1
        return v

    budget = cfg.lipschitz
    static = budget.mode == "static"
    if static and budget.effective() < cfg.k_floor:
        # a certified near-zero constant means the function is constant
        wa = evaluate(a)
        return OptOutcome(
            lower=wa, upper=wa, best_point=a, converged=True,
            iterations=0, evaluations=evaluations, k_final=budget.effective(),
        )

    wa, wb = evaluate(a), evaluate(b)
    seeds = [(a, wa), (b, wb)]
    if not static:
        # an interior seed gives the slope estimate a second data point; the
        # golden-section point avoids the symmetry traps a midpoint hits
        interior = a + (b - a) * 0.3819660112501051
        if a < interior < b:
            seeds = [(a, wa), (interior, evaluate(interior)), (b, wb)]
        budget = dynamic_update(budget, seeds)

    k = budget.effective() if static else max(budget.effective(), cfg.k_floor)
    state = SawtoothState(a, b, wa, wb, k)
    for y, wy in seeds[1:-1]:
        state.insert(y, wy)
    state.iteration = 0
    breached = False
    trace: list[IterationRecord] = []

    def handle_breach_hint() -> None:
        nonlocal breached, budget
        if not state.breach_hint:
            return
        state.breach_hint = False
        if static:
            breached = breached or cfg.exact_values
        else:
            budget = replace(
                budget,
                current_dynamic=max(budget.current_dynamic, state.k) * budget.eta,
            )
            state.recompute(max(budget.effective(), cfg.k_floor))

    handle_breach_hint()

    while state.gap > cfg.epsilon and state.iteration < cfg.max_iterations:
        z_star, left, right = state.select()
        proposal = new_point(
            left, right, state.values[left], state.values[right], state.k, cfg.k_floor
        )
        if proposal.breached and not static:
            # observed slope outran the estimate: inflate once and re-select
            budget = replace(
                budget, current_dynamic=max(budget.current_dynamic, state.k) * budget.eta
            )
            state.recompute(max(budget.effective(), cfg.k_floor))
            continue
        if proposal.breached and cfg.exact_values:
            breached = True
        y = proposal.point
        if y in state.values:
            # interval width is below float resolution; nothing left to refine
            break
        wy = evaluate(y)
        z_left, z_right = state.insert(y, wy)
        if not static:
            budget = dynamic_update(budget, state.samples())
            k_new = max(budget.effective(), cfg.k_floor)
            if k_new != state.k:
                state.recompute(k_new)
        handle_breach_hint()
        state.record()
        if cfg.collect_trace:
            trace.append(IterationRecord(
                z_star=z_star, y_new=y, w_new=wy, z_left=z_left, z_right=z_right,
                lower=state.lower, upper=state.upper, breached=proposal.breached,
            ))

    return OptOutcome(
        lower=state.lower,
        upper=state.upper,
        best_point=state.best_point,
        converged=state.gap <= cfg.epsilon,
        iterations=state.iteration,
        evaluations=evaluations,
        k_final=state.k,
        k_breached=breached,
        trace=trace,
        samples=state.samples() if cfg.collect_trace else [],
    )
