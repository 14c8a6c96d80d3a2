import numpy as np
import pytest

from lipreach.lipschitz import LipschitzBudget
from lipreach.model import Layer, NetworkModel


def static_budget(k: float) -> LipschitzBudget:
    return LipschitzBudget(per_layer=(k,), network_constant=k)


def dense(weights, bias=None, activation="none") -> Layer:
    w = np.asarray(weights, dtype=np.float64)
    b = np.zeros(w.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)
    return Layer(kind="dense", weights=w, bias=b, activation=activation)


def random_dense_net(
    rng: np.random.Generator,
    input_dim: int,
    widths: list[int],
    output_dim: int,
    activations: list[str] | None = None,
    scale: float = 0.8,
    softmax: bool = False,
) -> NetworkModel:
    """Small random network with weights scaled to keep constants modest."""
    layers = []
    in_w = input_dim
    acts = activations or ["tanh"] * len(widths)
    for w, act in zip(widths, acts):
        weights = rng.normal(size=(w, in_w)) * scale / np.sqrt(in_w)
        layers.append(dense(weights, rng.normal(scale=0.5, size=w), act))
        in_w = w
    weights = rng.normal(size=(output_dim, in_w)) * scale / np.sqrt(in_w)
    layers.append(dense(weights, rng.normal(scale=0.5, size=output_dim)))
    if softmax:
        layers.append(Layer(kind="softmax"))
    return NetworkModel(input_dim=input_dim, layers=tuple(layers))


@pytest.fixture
def identity_net() -> NetworkModel:
    return NetworkModel(
        input_dim=2, layers=(dense(np.eye(2)),), name="identity"
    )


@pytest.fixture
def boundary_net() -> NetworkModel:
    """1-input, 2-output linear net whose decision boundary sits at x = 0.5."""
    return NetworkModel(
        input_dim=1,
        layers=(dense([[1.0], [-1.0]], [-0.5, 0.5]),),
        name="boundary",
    )


@pytest.fixture
def constant_net() -> NetworkModel:
    """Outputs (1, 0) for every input."""
    return NetworkModel(
        input_dim=2,
        layers=(dense(np.zeros((2, 2)), [1.0, 0.0]),),
        name="constant",
    )
