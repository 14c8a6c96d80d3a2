"""Certified per-layer Lipschitz constants and the composed network constant.

All constants are with respect to the Euclidean norm.  For a dense layer the
constant is ``c * ||W||`` where ``c`` is 1 for no activation, relu and tanh
and 1/2 for sigmoid (the elementwise derivative bounds 1, 1, 1 and 1/2 times
the operator norm of W).  ``||W||`` is the spectral norm for matrices up to
512x512 and the Frobenius norm (a valid upper bound) beyond that.  Softmax
gets the conservative constant 2: with outputs in (0, 1), every Jacobian
entry is bounded by p_i(1 - p_j) or p_i p_j, so 1 + 1 = 2 dominates any
operator norm choice.  Max pooling over disjoint windows is 1-Lipschitz;
overlapping windows replicate inputs, so the constant grows to
sqrt(max window multiplicity).

The network constant is the product of the per-layer constants up to the
requested tap, which bounds the composition.  The same constant serves every
1-D slice ``t -> w(x + t e_k)`` of the composed map.

``dynamic`` mode maintains a running empirical estimate instead: eta times
the steepest observed slope between consecutive samples.  Early iterations
may run below the true constant, so dynamic-mode results are heuristic, not
certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .model import Layer, NetworkModel, _layers_for_tap

SPECTRAL_SIZE_LIMIT = 512
DEFAULT_ETA = 1.5

_ACTIVATION_FACTORS = {"none": 1.0, "relu": 1.0, "tanh": 1.0, "sigmoid": 0.5}
SOFTMAX_CONSTANT = 2.0


@dataclass(frozen=True)
class LipschitzBudget:
    """Per-layer constants, their product, and the dynamic-mode estimate."""

    per_layer: tuple[float, ...]
    network_constant: float
    mode: str = "static"
    eta: float = DEFAULT_ETA
    current_dynamic: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("static", "dynamic"):
            raise ValueError(f"mode must be 'static' or 'dynamic', got {self.mode!r}")
        if not self.eta > 1.0:
            raise ValueError(f"eta must be > 1, got {self.eta}")
        if any(c < 0.0 for c in self.per_layer) or self.network_constant < 0.0:
            raise ValueError("Lipschitz constants must be non-negative")

    def effective(self) -> float:
        """The constant the optimizer should currently use."""
        if self.mode == "static":
            return self.network_constant
        return self.current_dynamic

    def scaled(self, factor: float) -> "LipschitzBudget":
        """Budget for ``o . f`` when ``o`` is ``factor``-Lipschitz."""
        return replace(
            self,
            per_layer=self.per_layer + (factor,),
            network_constant=self.network_constant * factor,
        )


def matrix_norm(w: np.ndarray) -> float:
    """Spectral norm for small matrices, Frobenius upper bound for large ones."""
    if max(w.shape) <= SPECTRAL_SIZE_LIMIT:
        return float(np.linalg.norm(w, 2))
    return float(np.linalg.norm(w, "fro"))


def _maxpool_multiplicity(layer: Layer) -> int:
    # how many windows can share one input position; 1 when stride >= window
    if layer.stride >= layer.window:
        return 1
    return -(-layer.window // layer.stride)  # ceil division


def layer_constant(layer: Layer) -> float:
    """Certified Lipschitz constant of a single layer (Euclidean norm)."""
    if layer.kind == "dense":
        return _ACTIVATION_FACTORS[layer.activation] * matrix_norm(layer.weights)
    if layer.kind == "softmax":
        return SOFTMAX_CONSTANT
    return float(np.sqrt(_maxpool_multiplicity(layer)))


def network_constant(
    net: NetworkModel,
    tap: str = "output",
    mode: str = "static",
    eta: float = DEFAULT_ETA,
) -> LipschitzBudget:
    """Compose per-layer constants (product rule) up to ``tap``."""
    constants = tuple(layer_constant(lay) for lay in _layers_for_tap(net, tap))
    product = 1.0
    for c in constants:
        product *= c
    return LipschitzBudget(
        per_layer=constants, network_constant=product, mode=mode, eta=eta
    )


def dynamic_update(
    budget: LipschitzBudget, samples: Sequence[tuple[float, float]]
) -> LipschitzBudget:
    """Refresh the dynamic estimate from ordered ``(y, w(y))`` samples.

    The estimate is ``eta * max |dw/dy|`` over consecutive pairs, and it never
    decreases across calls: refining the sample set can only steepen the
    maximal observed slope, and we clamp to the previous value regardless.
    """
    if budget.mode != "dynamic":
        raise ValueError("dynamic_update requires a budget in dynamic mode")
    if len(samples) < 2:
        raise ValueError("dynamic_update needs at least 2 samples")
    ys = np.asarray([s[0] for s in samples], dtype=np.float64)
    ws = np.asarray([s[1] for s in samples], dtype=np.float64)
    gaps = np.diff(ys)
    if np.any(gaps <= 0.0):
        raise ValueError("sample y values must be strictly ascending")
    steepest = float(np.max(np.abs(np.diff(ws)) / gaps))
    return replace(
        budget,
        current_dynamic=max(budget.eta * steepest, budget.current_dynamic),
    )


def empty_dynamic_budget(eta: float = DEFAULT_ETA) -> LipschitzBudget:
    """A fresh dynamic budget with no slope information yet."""
    # empty product convention for the unused static constant
    return LipschitzBudget(
        per_layer=(), network_constant=1.0, mode="dynamic", eta=eta
    )
