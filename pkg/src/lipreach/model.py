"""Feed-forward network representation, evaluation, and the on-disk model format.

A network is an ordered stack of layers applied to a flat float64 input
vector.  Supported layer kinds:

* ``dense`` -- affine map ``W x + b`` followed by an elementwise activation
  (``none``, ``relu``, ``sigmoid`` or ``tanh``).
* ``softmax`` -- parameter-free normalisation; at most one per network and,
  if present, it must be the last layer (so the pre-softmax vector can be
  tapped as the "logit" output).
* ``maxpool`` -- 1-D max pooling over the flattened vector with explicit
  ``window`` and ``stride``.

Model files are JSON documents::

    {
      "name": "my-net",
      "input_dim": 2,
      "layers": [
        {"kind": "dense", "weights": [[...], ...], "bias": [...],
         "activation": "relu"},
        {"kind": "maxpool", "window": 2, "stride": 2},
        {"kind": "softmax"}
      ]
    }

Numbers must be plain finite decimals; ``NaN``/``Infinity`` tokens are
rejected.  A ``{"kind": "conv", "kernel": [...], "stride": s, ...}`` entry is
accepted on input and lowered to the equivalent dense (Toeplitz) layer at
load time, so the in-memory model only ever contains the three kinds above.

Loaded models are immutable; :func:`forward` is pure and safe to call
concurrently on a shared model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DENSE_ACTIVATIONS = ("none", "relu", "sigmoid", "tanh")
TAPS = ("output", "logit")


class ModelFormatError(ValueError):
    """Raised for unparseable model text or invariant-violating structure."""


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _softmax(x: np.ndarray) -> np.ndarray:
    # shift by the row max for stability; exact result unchanged
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


_ACTIVATION_FNS = {
    "none": lambda x: x,
    "relu": _relu,
    "sigmoid": _sigmoid,
    "tanh": np.tanh,
}


@dataclass(frozen=True)
class Layer:
    """One layer of a feed-forward stack.

    ``weights``/``bias``/``activation`` apply to ``dense`` layers,
    ``window``/``stride`` to ``maxpool``; ``softmax`` carries no parameters.
    """

    kind: str
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    activation: str = "none"
    window: int = 0
    stride: int = 0

    def __post_init__(self) -> None:
        if self.kind == "dense":
            if self.weights is None or self.bias is None:
                raise ModelFormatError("dense layer needs weights and bias")
            w = np.asarray(self.weights, dtype=np.float64)
            b = np.asarray(self.bias, dtype=np.float64)
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ModelFormatError(
                    f"dense shapes inconsistent: weights {w.shape}, bias {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ModelFormatError("dense layer has non-finite parameters")
            if self.activation not in DENSE_ACTIVATIONS:
                raise ModelFormatError(f"unknown activation {self.activation!r}")
            w.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "bias", b)
        elif self.kind == "maxpool":
            if self.window < 1 or self.stride < 1:
                raise ModelFormatError("maxpool window and stride must be >= 1")
        elif self.kind == "softmax":
            if self.weights is not None or self.bias is not None:
                raise ModelFormatError("softmax carries no parameters")
        else:
            raise ModelFormatError(f"unknown layer kind {self.kind!r}")

    def in_width(self) -> int | None:
        """Input width pinned by the layer itself (dense only)."""
        return self.weights.shape[1] if self.kind == "dense" else None

    def out_width(self, in_width: int) -> int:
        if self.kind == "dense":
            return self.weights.shape[0]
        if self.kind == "softmax":
            return in_width
        if self.window > in_width:
            raise ModelFormatError(
                f"maxpool window {self.window} exceeds input width {in_width}"
            )
        return (in_width - self.window) // self.stride + 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the layer on a batch ``x`` of shape (batch, in_width)."""
        if self.kind == "dense":
            z = x @ self.weights.T + self.bias
            return _ACTIVATION_FNS[self.activation](z)
        if self.kind == "softmax":
            return _softmax(x)
        windows = np.lib.stride_tricks.sliding_window_view(x, self.window, axis=1)
        return windows[:, :: self.stride, :].max(axis=2)


@dataclass(frozen=True)
class NetworkModel:
    """An immutable feed-forward network with consistent layer widths."""

    input_dim: int
    layers: tuple[Layer, ...]
    output_dim: int = field(init=False)
    name: str = ""

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ModelFormatError("input_dim must be positive")
        if not self.layers:
            raise ModelFormatError("network needs at least one layer")
        softmax_positions = [
            i for i, lay in enumerate(self.layers) if lay.kind == "softmax"
        ]
        if len(softmax_positions) > 1:
            raise ModelFormatError("at most one softmax layer is allowed")
        if softmax_positions and softmax_positions[0] != len(self.layers) - 1:
            raise ModelFormatError("softmax must be the final layer")
        width = self.input_dim
        for i, lay in enumerate(self.layers):
            pinned = lay.in_width()
            if pinned is not None and pinned != width:
                raise ModelFormatError(
                    f"layer {i} expects input width {pinned}, got {width}"
                )
            width = lay.out_width(width)
        object.__setattr__(self, "output_dim", width)
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def has_softmax(self) -> bool:
        return self.layers[-1].kind == "softmax"

    def width_at_tap(self, tap: str = "output") -> int:
        layers = _layers_for_tap(self, tap)
        width = self.input_dim
        for lay in layers:
            width = lay.out_width(width)
        return width

    def forward(self, x: Sequence[float] | np.ndarray, tap: str = "output") -> np.ndarray:
        return forward(self, x, tap)


def _layers_for_tap(net: NetworkModel, tap: str) -> tuple[Layer, ...]:
    if tap not in TAPS:
        raise ValueError(f"tap must be one of {TAPS}, got {tap!r}")
    if tap == "logit":
        if not net.has_softmax:
            raise ValueError("logit tap requires a trailing softmax layer")
        return net.layers[:-1]
    return net.layers


def forward(net: NetworkModel, x: Sequence[float] | np.ndarray, tap: str = "output") -> np.ndarray:
    """Evaluate the network on a single input vector up to ``tap``.

    Pure function: identical inputs give bit-identical outputs and the model
    is never mutated.
    """
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != net.input_dim:
        raise ValueError(
            f"input must be a vector of length {net.input_dim}, got shape {vec.shape}"
        )
    return forward_batch(net, vec[None, :], tap)[0]


def forward_batch(net: NetworkModel, xs: np.ndarray, tap: str = "output") -> np.ndarray:
    """Evaluate a batch of inputs, shape (batch, input_dim) -> (batch, width)."""
    out = np.asarray(xs, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != net.input_dim:
        raise ValueError(
            f"batch must have shape (n, {net.input_dim}), got {out.shape}"
        )
    for lay in _layers_for_tap(net, tap):
        out = lay.apply(out)
    return out


def _reject_constant(token: str) -> float:
    raise ModelFormatError(f"non-finite number {token!r} in model file")


def _lower_conv(entry: dict, in_width: int) -> Layer:
    # unrolled 1-D convolution: W[i, i*stride + j] = kernel[j]
    kernel = np.asarray(entry.get("kernel", []), dtype=np.float64)
    stride = int(entry.get("stride", 1))
    if kernel.ndim != 1 or kernel.size < 1:
        raise ModelFormatError("conv layer needs a non-empty 1-D kernel")
    if stride < 1:
        raise ModelFormatError("conv stride must be >= 1")
    if kernel.size > in_width:
        raise ModelFormatError(
            f"conv kernel of size {kernel.size} exceeds input width {in_width}"
        )
    out_width = (in_width - kernel.size) // stride + 1
    weights = np.zeros((out_width, in_width))
    for i in range(out_width):
        weights[i, i * stride : i * stride + kernel.size] = kernel
    bias_entry = entry.get("bias", 0.0)
    if isinstance(bias_entry, (int, float)):
        bias = np.full(out_width, float(bias_entry))
    else:
        bias = np.asarray(bias_entry, dtype=np.float64)
        if bias.shape != (out_width,):
            raise ModelFormatError(
                f"conv bias must be scalar or length {out_width}, got {bias.shape}"
            )
    return Layer(
        kind="dense",
        weights=weights,
        bias=bias,
        activation=entry.get("activation", "none"),
    )


def load_model(data: bytes | str) -> NetworkModel:
    """Parse model JSON into a validated :class:`NetworkModel`.

    Convolution entries are lowered to dense layers here, so downstream code
    sees only dense/softmax/maxpool.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"model file is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid model JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must contain a JSON object")
    try:
        input_dim = int(doc["input_dim"])
        entries = doc["layers"]
    except KeyError as exc:
        raise ModelFormatError(f"model file missing field {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise ModelFormatError("'layers' must be a non-empty list")

    layers: list[Layer] = []
    width = input_dim
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ModelFormatError(f"layer {i} must be an object with a 'kind'")
        kind = entry["kind"]
        if kind == "dense":
            lay = Layer(
                kind="dense",
                weights=np.asarray(entry.get("weights"), dtype=np.float64),
                bias=np.asarray(entry.get("bias"), dtype=np.float64),
                activation=entry.get("activation", "none"),
            )
        elif kind == "conv":
            lay = _lower_conv(entry, width)
        elif kind == "softmax":
            lay = Layer(kind="softmax")
        elif kind == "maxpool":
            lay = Layer(
                kind="maxpool",
                window=int(entry.get("window", 0)),
                stride=int(entry.get("stride", 0)),
            )
        else:
            raise ModelFormatError(f"layer {i}: unknown kind {kind!r}")
        width = lay.out_width(width)
        layers.append(lay)

    return NetworkModel(
        input_dim=input_dim, layers=tuple(layers), name=str(doc.get("name", ""))
    )


def load_model_file(path: str) -> NetworkModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())


def save_model(net: NetworkModel) -> str:
    """Serialise a network back to the model JSON format."""
    entries = []
    for lay in net.layers:
        if lay.kind == "dense":
            entries.append(
                {
                    "kind": "dense",
                    "weights": lay.weights.tolist(),
                    "bias": lay.bias.tolist(),
                    "activation": lay.activation,
                }
            )
        elif lay.kind == "softmax":
            entries.append({"kind": "softmax"})
        else:
            entries.append(
                {"kind": "maxpool", "window": lay.window, "stride": lay.stride}
            )
    # layer parameters are finite by construction, so the dump is loadable
    doc = {"name": net.name, "input_dim": net.input_dim, "layers": entries}
    return json.dumps(doc, sort_keys=True)
