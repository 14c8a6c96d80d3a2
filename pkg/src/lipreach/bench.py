"""Synthetic benchmark suite: 2-input, 1-output networks over [0, 10]^2.

The suite demonstrates what drives the optimizer's cost: the Lipschitz
constant and the tolerance, not the neuron count.  It ships three base
networks of increasing width and depth, each paired with a width-doubled
re-parameterization (hidden layers padded with dead neurons) that computes
bit-identical outputs with an identical composed constant, so a run over the
pair performs exactly the same evaluations.
"""

from __future__ import annotations

import time

import numpy as np

from .lipschitz import network_constant
from .model import Layer, NetworkModel
from .reach import QuerySubspace, output_range

BENCH_BOUNDS = ((0.0, 10.0), (0.0, 10.0))
BENCH_EPSILON = 0.01


def width_doubled(net: NetworkModel, name: str | None = None) -> NetworkModel:
    """Double every hidden layer's width with zero (dead) neurons.

    Zero rows keep each layer's operator norm, and zero columns feed nothing
    into the next layer, so the function, its evaluation at every input, and
    the per-layer constants are unchanged bit for bit.
    """
    layers = list(net.layers)
    dense_idx = [i for i, lay in enumerate(layers) if lay.kind == "dense"]
    for pos, i in enumerate(dense_idx[:-1]):
        lay = layers[i]
        h = lay.weights.shape[0]
        layers[i] = Layer(
            kind="dense",
            weights=np.vstack([lay.weights, np.zeros_like(lay.weights)]),
            bias=np.concatenate([lay.bias, np.zeros(h)]),
            activation=lay.activation,
        )
        nxt = layers[dense_idx[pos + 1]]
        layers[dense_idx[pos + 1]] = Layer(
            kind="dense",
            weights=np.hstack([nxt.weights, np.zeros_like(nxt.weights)]),
            bias=nxt.bias,
            activation=nxt.activation,
        )
    return NetworkModel(
        input_dim=net.input_dim,
        layers=tuple(layers),
        name=name or (net.name + "-wide"),
    )


def _random_net(rng: np.random.Generator, widths: list[int], name: str) -> NetworkModel:
    # scale keeps the composed constant modest despite the [0, 10] inputs
    layers = []
    in_w = 2
    for w in widths:
        weights = rng.normal(scale=0.8, size=(w, in_w)) / np.sqrt(in_w) * 0.45
        bias = rng.normal(scale=1.0, size=w)
        layers.append(
            Layer(kind="dense", weights=weights, bias=bias, activation="tanh")
        )
        in_w = w
    out = rng.normal(scale=1.0, size=(1, in_w)) / np.sqrt(in_w)
    layers.append(
        Layer(kind="dense", weights=out, bias=np.zeros(1), activation="none")
    )
    return NetworkModel(input_dim=2, layers=tuple(layers), name=name)


def synthetic_suite(seed: int = 0) -> list[NetworkModel]:
    """Six networks: three bases of growing size plus width-doubled twins."""
    rng = np.random.default_rng(seed)
    nets = []
    for widths, name in (([4], "bench-a"), ([8, 8], "bench-b"), ([16, 16, 16], "bench-c")):
        base = _random_net(rng, widths, name)
        nets.append(base)
        nets.append(width_doubled(base))
    return nets


def neuron_count(net: NetworkModel) -> int:
    return sum(
        lay.weights.shape[0] for lay in net.layers if lay.kind == "dense"
    )


def run_suite(
    nets: list[NetworkModel],
    bounds: tuple = BENCH_BOUNDS,
    epsilon: float = BENCH_EPSILON,
    mode: str = "static",
    nd_mode: str = "adaptive",
) -> list[dict]:
    """Range-query every network; one result row per network."""
    rows = []
    for net in nets:
        sub = QuerySubspace(
            base=np.array([b[0] for b in bounds]),
            free_dims=tuple(range(len(bounds))),
            bounds=bounds,
        )
        start = time.perf_counter()
        result = output_range(net, sub, label=0, epsilon=epsilon, mode=mode, nd_mode=nd_mode)
        wall_ms = 1000.0 * (time.perf_counter() - start)
        rows.append(
            {
                "name": net.name,
                "layers": len(net.layers),
                "neurons": neuron_count(net),
                "lipschitz": network_constant(net).network_constant,
                "lower": result.lower,
                "upper": result.upper,
                "evaluations": result.evaluations,
                "converged": result.converged,
                "wall_ms": wall_ms,
            }
        )
    return rows
