"""Brute-force lattice search over a box, used as independent ground truth.

The lattice covers each free dimension with evenly spaced points no further
than the requested step apart and always includes both endpoints, so every
corner of the box is evaluated.  The reported extrema are attained values:
``min_est`` can overestimate the true minimum by at most ``K * sum(steps)/2``
when ``K`` bounds the objective's Lipschitz constant, and never
underestimates it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_CAP = 20_000_000
_CHUNK = 65_536


class GridCapError(ValueError):
    """The requested lattice would exceed the point-count cap."""


@dataclass(frozen=True)
class GridSpec:
    """Per-dimension steps plus a safety cap on the total lattice size."""

    steps: tuple[float, ...]
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        if not self.steps or any(s <= 0.0 for s in self.steps):
            raise ValueError("grid steps must be positive")

    def axes(self, bounds: Sequence[tuple[float, float]]) -> list[np.ndarray]:
        if len(bounds) != len(self.steps):
            raise ValueError("one step per free dimension is required")
        axes = []
        total = 1
        for (a, b), step in zip(bounds, self.steps):
            count = int(math.ceil((b - a) / step - 1e-12)) + 1
            total *= count
            if total > self.cap:
                raise GridCapError(
                    f"lattice of {total}+ points exceeds cap {self.cap}"
                )
            axes.append(np.linspace(a, b, count))
        return axes


@dataclass(frozen=True)
class GridResult:
    min_value: float
    max_value: float
    argmin: np.ndarray
    argmax: np.ndarray
    points: int
    # worst-case overestimate of min / underestimate of max, if K was given
    lattice_slack: float | None = None


def grid_extrema(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    grid: GridSpec,
    batch_objective: Callable[[np.ndarray], np.ndarray] | None = None,
    lipschitz: float | None = None,
    threads: int = 1,
) -> GridResult:
    """Exhaustively evaluate the lattice and report attained extrema.

    ``batch_objective`` maps an (m, n) array of points to m values and makes
    large lattices practical; without it points are evaluated one by one.
    Ties resolve to the lexicographically smallest lattice point regardless
    of chunking or thread count.
    """
    axes = grid.axes(bounds)
    counts = [len(ax) for ax in axes]
    total = int(np.prod(counts))

    if batch_objective is None:
        batch_objective = lambda pts: np.array([objective(p) for p in pts])

    def eval_chunk(start: int) -> tuple[float, int, float, int]:
        stop = min(start + _CHUNK, total)
        idx = np.arange(start, stop)
        pts = np.empty((stop - start, len(axes)))
        rem = idx
        # C-order unraveling keeps first-match ties lexicographically smallest
        for d in range(len(axes) - 1, -1, -1):
            rem, coord = np.divmod(rem, counts[d])
            pts[:, d] = axes[d][coord]
        vals = np.asarray(batch_objective(pts), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise ValueError(f"non-finite objective value at {pts[bad].tolist()}")
        lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
        return vals[lo], start + lo, vals[hi], start + hi

    starts = range(0, total, _CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(eval_chunk, starts))
    else:
        results = [eval_chunk(s) for s in starts]

    min_value, min_idx = math.inf, -1
    max_value, max_idx = -math.inf, -1
    for lo, lo_i, hi, hi_i in results:
        if lo < min_value:
            min_value, min_idx = lo, lo_i
        if hi > max_value:
            max_value, max_idx = hi, hi_i

    def unravel(flat: int) -> np.ndarray:
        coords = np.unravel_index(flat, counts)
        return np.array([axes[d][c] for d, c in enumerate(coords)])

    slack = None
    if lipschitz is not None:
        slack = 0.5 * lipschitz * sum(grid.steps)
    return GridResult(
        min_value=float(min_value),
        max_value=float(max_value),
        argmin=unravel(min_idx),
        argmax=unravel(max_idx),
        points=total,
        lattice_slack=slack,
    )
