"""Multi-dimensional global minimization via nested 1-D subproblems.

An n-dimensional box minimization decomposes into a stack of univariate
problems: the level-k solver minimizes, along dimension k, the function
whose value at ``t`` is the minimum of the level-(k+1) problem with ``t``
appended to the prefix; the bottom level evaluates the objective directly.

Two schedules are provided:

* ``strict_nested`` runs the decomposition literally: evaluating a level-k
  point spawns a complete level-(k+1) solve at its per-level tolerance.
* ``adaptive`` keeps every spawned univariate subproblem alive in a pool and
  repeatedly advances the one with the largest bound gap by a single
  iteration.  Values a parent holds for its sample points are the children's
  best evaluated values so far; whenever a child improves, the parent's
  sawtooth is revised in place.  At quiescence (every subproblem inside its
  tolerance) the bound algebra is identical to the strict schedule.

Either way the per-level tolerances accumulate additively, so the certified
bracket is ``[root_lower - sum(inner tolerances), root_upper]`` and its width
is at most the total tolerance; ``root_upper`` is always a genuinely
evaluated objective value, reached at ``best_point``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .lipschitz import LipschitzBudget, dynamic_update, empty_dynamic_budget
from .opt1d import (
    DEFAULT_K_FLOOR,
    EvaluationError,
    OptConfig,
    SawtoothState,
    minimize_1d,
    new_point,
)

MODES = ("strict_nested", "adaptive")
DEFAULT_MAX_EVALUATIONS = 5_000_000


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class NestedProblem:
    """A box-constrained minimization over a subset of input dimensions.

    ``dims`` lists the free dimensions (indices into the full input vector),
    ``bounds`` their boxes, and ``fixed`` the base vector whose remaining
    coordinates stay clamped.  ``per_level_eps`` defaults to an even split of
    ``epsilon_total`` across the free dimensions, matching the additive error
    accumulation of the nesting.
    """

    dims: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]
    fixed: np.ndarray
    objective: Callable[[np.ndarray], float]
    budget: LipschitzBudget
    epsilon_total: float = 0.01
    per_level_eps: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.dims) < 1:
            raise ValueError("at least one free dimension is required")
        if len(set(self.dims)) != len(self.dims):
            raise ValueError("free dimensions must be distinct")
        if len(self.bounds) != len(self.dims):
            raise ValueError("one bound pair per free dimension is required")
        for a, b in self.bounds:
            if not a < b:
                raise ValueError(f"degenerate bounds [{a}, {b}]")
        if not self.epsilon_total > 0.0:
            raise ValueError("epsilon_total must be positive")
        if not self.per_level_eps:
            n = len(self.dims)
            object.__setattr__(
                self, "per_level_eps", (self.epsilon_total / n,) * n
            )
        if len(self.per_level_eps) != len(self.dims):
            raise ValueError("per_level_eps needs one entry per free dimension")
        if any(e <= 0.0 for e in self.per_level_eps):
            raise ValueError("per-level tolerances must be positive")
        if sum(self.per_level_eps) > self.epsilon_total * (1.0 + 1e-9):
            raise ValueError("per-level tolerances exceed the total budget")
        base = np.array(self.fixed, dtype=np.float64)
        base.setflags(write=False)
        object.__setattr__(self, "fixed", base)


@dataclass
class NdOutcome:
    """Certified bracket, witness vector, and accounting for one solve."""

    lower: float
    upper: float
    best_point: np.ndarray
    converged: bool
    evaluations: int
    per_level_iterations: list[int]
    k_breached: bool = False


class _Evaluator:
    """Counts objective calls, enforces finiteness and the evaluation cap."""

    def __init__(self, problem: NestedProblem, max_evaluations: int):
        self.problem = problem
        self.max_evaluations = max_evaluations
        self.count = 0
        self.best_value = math.inf
        self.best_free: tuple[float, ...] | None = None

    def __call__(self, free: tuple[float, ...]) -> float:
        if self.count >= self.max_evaluations:
            raise _BudgetExhausted
        x = self.full_vector(free)
        v = float(self.problem.objective(x))
        if not math.isfinite(v):
            raise EvaluationError(tuple(x), v)
        self.count += 1
        if v < self.best_value:
            self.best_value, self.best_free = v, free
        return v

    def full_vector(self, free: Sequence[float]) -> np.ndarray:
        x = self.problem.fixed.copy()
        for dim, t in zip(self.problem.dims, free):
            x[dim] = t
        return x


def _level_config(problem: NestedProblem, level: int) -> OptConfig:
    if problem.budget.mode == "dynamic":
        budget = empty_dynamic_budget(eta=problem.budget.eta)
    else:
        budget = problem.budget
    return OptConfig(
        lipschitz=budget,
        epsilon=problem.per_level_eps[level],
        exact_values=level == len(problem.dims) - 1,
    )


# Inner-solve values reach a parent with error at most (achieved gap of the
# child) + (the child's own inherited slack); the parent's certified lower
# must widen by the worst such error among its sampled points.  At
# convergence this never exceeds the sum of the inner per-level tolerances.


def minimize_nd(
    problem: NestedProblem,
    mode: str = "adaptive",
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> NdOutcome:
    """Minimize the problem's objective over its box.

    In static mode the true minimum lies in ``[lower, upper]`` and
    ``upper - lower`` does not exceed the total tolerance at convergence.
    Exhausting ``max_evaluations`` returns ``converged=False`` with the
    bounds reached so far.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    evaluator = _Evaluator(problem, max_evaluations)
    if mode == "strict_nested":
        return _minimize_strict(problem, evaluator)
    return _minimize_adaptive(problem, evaluator)


def maximize_nd(
    problem: NestedProblem,
    mode: str = "adaptive",
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> NdOutcome:
    """Maximize by minimizing the negated objective and flipping the bracket.

    Note the flip swaps the roles of the endpoints: for a maximization
    outcome ``lower`` is the attained (witnessed) value and ``upper`` the
    certified bound on the supremum.
    """
    inner = problem.objective
    negated = replace(problem, objective=lambda x: -inner(x))
    out = minimize_nd(negated, mode=mode, max_evaluations=max_evaluations)
    out.lower, out.upper = -out.upper, -out.lower
    return out


def characteristic(sub) -> float:
    """Bound gap (best value minus sawtooth minimum) of a subproblem.

    Accepts a pool subproblem or a bare :class:`SawtoothState`; zero exactly
    when the subproblem has closed its gap.
    """
    state = getattr(sub, "state", sub)
    return state.upper - state.lower


# -- strict schedule ----------------------------------------------------------


def _minimize_strict(problem: NestedProblem, evaluator: _Evaluator) -> NdOutcome:
    n = len(problem.dims)
    # memo entries: (value, best suffix, certified lower, inherited slack)
    memo: dict[tuple[int, tuple[float, ...]],
               tuple[float, tuple[float, ...], float, float]] = {}
    per_level_iterations = [0] * n
    flags = {"unconverged": False, "breached": False}

    def phi(level: int, prefix: tuple[float, ...]):
        key = (level, prefix)
        hit = memo.get(key)
        if hit is not None:
            return hit
        a, b = problem.bounds[level]
        if level == n - 1:
            obj = lambda t: evaluator(prefix + (t,))
            worst = [0.0]
        else:
            worst = [0.0]

            def obj(t: float) -> float:
                value, _suffix, lower, slack = phi(level + 1, prefix + (t,))
                worst[0] = max(worst[0], value - lower + slack)
                return value

        out = minimize_1d(obj, a, b, _level_config(problem, level))
        per_level_iterations[level] += out.iterations
        flags["unconverged"] |= not out.converged
        flags["breached"] |= out.k_breached
        if level == n - 1:
            suffix: tuple[float, ...] = (out.best_point,)
        else:
            suffix = (out.best_point,) + phi(level + 1, prefix + (out.best_point,))[1]
        result = (out.upper, suffix, out.lower, worst[0])
        memo[key] = result
        return result

    try:
        upper, free_best, root_lower, slack = phi(0, ())
    except _BudgetExhausted:
        best_free = evaluator.best_free or tuple(a for a, _ in problem.bounds)
        return NdOutcome(
            lower=-math.inf,
            upper=evaluator.best_value,
            best_point=evaluator.full_vector(best_free),
            converged=False,
            evaluations=evaluator.count,
            per_level_iterations=per_level_iterations,
        )
    return NdOutcome(
        lower=root_lower - slack,
        upper=upper,
        best_point=evaluator.full_vector(free_best),
        converged=not flags["unconverged"],
        evaluations=evaluator.count,
        per_level_iterations=per_level_iterations,
        k_breached=flags["breached"],
    )


# -- adaptive schedule ---------------------------------------------------------


class Subproblem:
    """One univariate subproblem of the pool: a level, a prefix, a sawtooth."""

    __slots__ = (
        "level", "prefix", "state", "budget", "parent", "parent_point",
        "children", "created", "version", "eps", "exhausted",
    )

    def __init__(self, level: int, prefix: tuple[float, ...], eps: float,
                 budget: LipschitzBudget, created: int,
                 parent: "Subproblem | None", parent_point: float | None):
        self.level = level
        self.prefix = prefix
        self.eps = eps
        self.budget = budget
        self.created = created
        self.parent = parent
        self.parent_point = parent_point
        self.children: dict[float, Subproblem] = {}
        self.state: SawtoothState | None = None
        self.version = 0
        self.exhausted = False


class SubproblemPool:
    """Active subproblems ordered by gap, largest first.

    Scheduling ties break by level (outermost first), then creation order,
    making the whole schedule deterministic.
    """

    def __init__(self):
        self.subs: list[Subproblem] = []
        self._heap: list[tuple[float, int, int, int]] = []

    def register(self, sub: Subproblem) -> None:
        self.subs.append(sub)

    def touch(self, sub: Subproblem) -> None:
        """Re-queue after any change to the subproblem's gap."""
        sub.version += 1
        if not sub.exhausted and sub.state is not None:
            heapq.heappush(
                self._heap,
                (-characteristic(sub), sub.level, sub.created, sub.version),
            )

    def pop_widest(self) -> Subproblem | None:
        """Next subproblem whose gap still exceeds its tolerance, if any."""
        while self._heap:
            neg_gap, _level, created, version = heapq.heappop(self._heap)
            sub = self.subs[created]
            if version != sub.version or sub.exhausted:
                continue
            if characteristic(sub) > sub.eps:
                return sub
        return None


def _minimize_adaptive(problem: NestedProblem, evaluator: _Evaluator) -> NdOutcome:
    n = len(problem.dims)
    pool = SubproblemPool()
    per_level_iterations = [0] * n
    flags = {"breached": False}
    static = problem.budget.mode == "static"

    def fresh_budget() -> LipschitzBudget:
        if static:
            return problem.budget
        return empty_dynamic_budget(eta=problem.budget.eta)

    def child_value(sub: Subproblem, t: float) -> float:
        if sub.level == n - 1:
            return evaluator(sub.prefix + (t,))
        child = make_sub(sub.level + 1, sub.prefix + (t,), sub, t)
        sub.children[t] = child
        return child.state.upper

    def handle_breach_hint(sub: Subproblem) -> None:
        if not sub.state.breach_hint:
            return
        sub.state.breach_hint = False
        if static:
            # above the bottom level, values are children's running estimates,
            # so a slope spike there is refinement noise, not a K breach
            if sub.level == n - 1:
                flags["breached"] = True
        else:
            sub.budget = replace(
                sub.budget,
                current_dynamic=max(sub.budget.current_dynamic, sub.state.k)
                * sub.budget.eta,
            )
            sub.state.recompute(max(sub.budget.effective(), DEFAULT_K_FLOOR))

    def make_sub(level: int, prefix: tuple[float, ...],
                 parent: Subproblem | None, parent_point: float | None) -> Subproblem:
        sub = Subproblem(
            level, prefix, problem.per_level_eps[level], fresh_budget(),
            created=len(pool.subs), parent=parent, parent_point=parent_point,
        )
        pool.register(sub)
        a, b = problem.bounds[level]
        va = child_value(sub, a)
        vb = child_value(sub, b)
        if not static:
            sub.budget = dynamic_update(sub.budget, [(a, va), (b, vb)])
        k = sub.budget.effective() if static else max(sub.budget.effective(), DEFAULT_K_FLOOR)
        sub.state = SawtoothState(a, b, va, vb, max(k, DEFAULT_K_FLOOR))
        handle_breach_hint(sub)
        pool.touch(sub)
        return sub

    def propagate(sub: Subproblem) -> None:
        # push improved best values up the prefix chain
        while sub.parent is not None:
            parent, point = sub.parent, sub.parent_point
            if sub.state.upper >= parent.state.values[point]:
                break
            parent.state.revise_value(point, sub.state.upper)
            handle_breach_hint(parent)
            pool.touch(parent)
            sub = parent

    def advance(sub: Subproblem) -> None:
        state = sub.state
        z_star, left, right = state.select()
        proposal = new_point(
            left, right, state.values[left], state.values[right], state.k
        )
        if proposal.breached and not static:
            sub.budget = replace(
                sub.budget,
                current_dynamic=max(sub.budget.current_dynamic, state.k) * sub.budget.eta,
            )
            state.recompute(max(sub.budget.effective(), DEFAULT_K_FLOOR))
            pool.touch(sub)
            return
        if proposal.breached and sub.level == n - 1:
            flags["breached"] = True
        y = proposal.point
        if y in state.values:
            sub.exhausted = True
            return
        v = child_value(sub, y)
        state.insert(y, v)
        if not static:
            sub.budget = dynamic_update(sub.budget, state.samples())
            k_new = max(sub.budget.effective(), DEFAULT_K_FLOOR)
            if k_new != state.k:
                state.recompute(k_new)
        handle_breach_hint(sub)
        state.record()
        per_level_iterations[sub.level] += 1
        pool.touch(sub)
        propagate(sub)

    root: Subproblem | None = None
    try:
        root = make_sub(0, (), None, None)
        converged = False
        while True:
            sub = pool.pop_widest()
            if sub is None:
                # exhausted subproblems hit float resolution with an open gap;
                # quiescence only certifies when there are none
                converged = not any(
                    s.exhausted and characteristic(s) > s.eps for s in pool.subs
                )
                break
            advance(sub)
    except _BudgetExhausted:
        converged = False

    if root is None or root.state is None:
        best_free = evaluator.best_free or tuple(a for a, _ in problem.bounds)
        return NdOutcome(
            lower=-math.inf,
            upper=evaluator.best_value,
            best_point=evaluator.full_vector(best_free),
            converged=False,
            evaluations=evaluator.count,
            per_level_iterations=per_level_iterations,
        )

    free_best = []
    sub = root
    while True:
        t = sub.state.best_point
        free_best.append(t)
        if sub.level == n - 1:
            break
        sub = sub.children[t]

    def inherited_slack(sub: Subproblem) -> float:
        if sub.level == n - 1:
            return 0.0
        worst = 0.0
        for child in sub.children.values():
            worst = max(worst, child.state.gap + inherited_slack(child))
        return worst

    return NdOutcome(
        lower=root.state.lower - inherited_slack(root),
        upper=root.state.upper,
        best_point=evaluator.full_vector(free_best),
        converged=converged,
        evaluations=evaluator.count,
        per_level_iterations=per_level_iterations,
        k_breached=flags["breached"],
    )
