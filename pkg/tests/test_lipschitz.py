import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipreach.lipschitz import (
    LipschitzBudget,
    dynamic_update,
    empty_dynamic_budget,
    layer_constant,
    matrix_norm,
    network_constant,
)
from lipreach.model import Layer, NetworkModel

from conftest import dense


def spectral_oracle(w: np.ndarray) -> float:
    # independent route: largest eigenvalue of W^T W
    return float(np.sqrt(np.max(np.linalg.eigvalsh(w.T @ w))))


def test_sigmoid_identity_constant():
    assert layer_constant(dense(np.eye(2), activation="sigmoid")) == 0.5


def test_tanh_zero_matrix():
    assert layer_constant(dense(np.zeros((2, 2)), activation="tanh")) == 0.0


def test_relu_spectral_norm_against_eigen_oracle():
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    got = layer_constant(dense(w, activation="relu"))
    assert got == pytest.approx(spectral_oracle(w), abs=1e-9)
    assert got == pytest.approx(5.4650, abs=1e-4)


def test_frobenius_at_least_spectral():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.normal(size=rng.integers(2, 12, size=2))
        assert np.linalg.norm(w, "fro") >= np.linalg.norm(w, 2) - 1e-12


def test_large_matrix_uses_frobenius():
    w = np.zeros((600, 2))
    w[0, 0] = 3.0
    w[1, 1] = 4.0
    assert matrix_norm(w) == pytest.approx(5.0)  # frobenius, not spectral (4.0)


def test_maxpool_constants():
    assert layer_constant(Layer(kind="maxpool", window=2, stride=2)) == 1.0
    assert layer_constant(Layer(kind="maxpool", window=4, stride=4)) == 1.0
    # overlapping windows replicate inputs
    assert layer_constant(Layer(kind="maxpool", window=2, stride=1)) == pytest.approx(
        np.sqrt(2.0)
    )


def test_overlapping_maxpool_slope_within_constant():
    lay = Layer(kind="maxpool", window=2, stride=1)
    k = layer_constant(lay)
    rng = np.random.default_rng(1)
    xs = rng.normal(size=(2000, 5))
    ys = rng.normal(size=(2000, 5))
    slopes = np.linalg.norm(lay.apply(xs) - lay.apply(ys), axis=1) / np.linalg.norm(
        xs - ys, axis=1
    )
    assert np.max(slopes) <= k + 1e-12
    # and the unit constant would be breached, so the sqrt factor is needed
    spike = np.zeros((1, 5))
    spike[0, 1] = 1.0
    assert np.linalg.norm(lay.apply(spike) - lay.apply(np.zeros((1, 5)))) > 1.0


def test_softmax_constant_is_two():
    assert layer_constant(Layer(kind="softmax")) == 2.0


def test_network_constant_identity():
    net = NetworkModel(input_dim=2, layers=(dense(np.eye(2)),))
    assert network_constant(net).network_constant == 1.0


def test_network_constant_product_rule():
    net = NetworkModel(
        input_dim=2,
        layers=(
            dense(np.eye(2), activation="sigmoid"),  # 0.5
            dense(3.0 * np.eye(2)),                  # 3.0
        ),
    )
    budget = network_constant(net)
    assert budget.per_layer == (0.5, 3.0)
    assert budget.network_constant == pytest.approx(1.5)


def test_sigmoid_then_softmax_and_logit_tap():
    w = np.array([[0.5, 0.25], [0.1, -0.3]])
    net = NetworkModel(
        input_dim=2,
        layers=(dense(w, activation="sigmoid"), Layer(kind="softmax")),
    )
    base = 0.5 * matrix_norm(w)
    assert network_constant(net, tap="output").network_constant == pytest.approx(
        base * 2.0
    )
    assert network_constant(net, tap="logit").network_constant == pytest.approx(base)
    # empirical slopes stay under the composed constant
    from lipreach.model import forward_batch

    rng = np.random.default_rng(2)
    xs, ys = rng.uniform(0, 1, (1000, 2)), rng.uniform(0, 1, (1000, 2))
    slopes = np.linalg.norm(
        forward_batch(net, xs) - forward_batch(net, ys), axis=1
    ) / np.linalg.norm(xs - ys, axis=1)
    assert np.max(slopes) <= base * 2.0 + 1e-12


def test_budget_invariants():
    with pytest.raises(ValueError):
        LipschitzBudget(per_layer=(1.0,), network_constant=1.0, eta=1.0)
    with pytest.raises(ValueError):
        LipschitzBudget(per_layer=(-1.0,), network_constant=1.0)
    with pytest.raises(ValueError):
        LipschitzBudget(per_layer=(1.0,), network_constant=1.0, mode="magic")
    budget = network_constant(
        NetworkModel(input_dim=2, layers=(dense(np.eye(2)),))
    )
    prod = np.prod(budget.per_layer)
    assert abs(budget.network_constant - prod) <= 1e-12 * max(1.0, prod)


def test_dynamic_update_examples():
    budget = empty_dynamic_budget(eta=1.5)
    assert dynamic_update(budget, [(0, 0), (1, 0)]).current_dynamic == 0.0
    assert dynamic_update(budget, [(0, 0), (1, 2)]).current_dynamic == 3.0
    assert dynamic_update(budget, [(0, 0), (0.5, 1), (1, 0)]).current_dynamic == 3.0


def test_dynamic_update_errors():
    budget = empty_dynamic_budget()
    with pytest.raises(ValueError):
        dynamic_update(budget, [(0, 0)])
    with pytest.raises(ValueError):
        dynamic_update(budget, [(0, 0), (0, 1)])
    with pytest.raises(ValueError):
        dynamic_update(budget, [(1, 0), (0, 1)])
    static = LipschitzBudget(per_layer=(1.0,), network_constant=1.0)
    with pytest.raises(ValueError):
        dynamic_update(static, [(0, 0), (1, 1)])


def test_dynamic_update_max_is_order_insensitive():
    # whichever consecutive pair attains the max, only the max matters
    budget = empty_dynamic_budget(eta=2.0)
    a = dynamic_update(budget, [(0, 0), (1, 3), (2, 3)])
    b = dynamic_update(budget, [(0, 3), (1, 0), (2, 0)])
    assert a.current_dynamic == b.current_dynamic == 6.0


@settings(max_examples=100, deadline=None)
@given(
    ys=st.lists(
        st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=3,
        max_size=12, unique=True,
    ),
    insert=st.floats(min_value=-100, max_value=100, allow_nan=False),
)
def test_dynamic_update_monotone_under_refinement(ys, insert):
    # adding a sample never lowers the estimate
    budget = empty_dynamic_budget(eta=1.5)
    pts = sorted(ys)
    values = [np.sin(y) * 10 for y in pts]
    coarse = dynamic_update(budget, list(zip(pts, values)))
    if insert in pts:
        return
    refined_pts = sorted(pts + [insert])
    refined_vals = [np.sin(y) * 10 for y in refined_pts]
    refined = dynamic_update(budget, list(zip(refined_pts, refined_vals)))
    assert refined.current_dynamic >= coarse.current_dynamic - 1e-12


def test_per_activation_slope_never_exceeds_constant():
    rng = np.random.default_rng(3)
    for activation in ("none", "relu", "sigmoid", "tanh"):
        for _ in range(10):
            rows, cols = rng.integers(2, 7, size=2)
            lay = dense(
                rng.normal(size=(rows, cols)), rng.normal(size=rows), activation
            )
            k = layer_constant(lay)
            xs = rng.uniform(0, 1, size=(1000, cols))
            ys = rng.uniform(0, 1, size=(1000, cols))
            num = np.linalg.norm(lay.apply(xs) - lay.apply(ys), axis=1)
            den = np.linalg.norm(xs - ys, axis=1)
            assert np.max(num / den) <= k + 1e-12
