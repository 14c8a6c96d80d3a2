"""Build a small network, evaluate it, and read off its Lipschitz budget.

The certified machinery starts here: every layer gets a constant bounding
how fast its output can move, and the product of those constants bounds the
whole network.
"""

import numpy as np

from lipreach import (
    Layer,
    NetworkModel,
    forward,
    layer_constant,
    load_model,
    network_constant,
    save_model,
)

# a 2-input classifier: dense+sigmoid hidden layer, dense logits, softmax
hidden = Layer(
    kind="dense",
    weights=np.array([[1.2, -0.7], [0.4, 0.9], [-0.5, 0.3]]),
    bias=np.array([0.1, -0.2, 0.0]),
    activation="sigmoid",
)
logits = Layer(
    kind="dense",
    weights=np.array([[0.8, -0.4, 0.2], [-0.6, 0.5, 0.7]]),
    bias=np.zeros(2),
)
net = NetworkModel(input_dim=2, layers=(hidden, logits, Layer(kind="softmax")),
                   name="demo-classifier")

x = np.array([0.3, 0.7])
print("input:              ", x)
print("softmax output:     ", forward(net, x))
print("pre-softmax logits: ", forward(net, x, tap="logit"))

# per-layer constants and their product
print("\nper-layer constants:")
for layer, k in zip(net.layers, network_constant(net).per_layer):
    label = layer.kind if layer.kind != "dense" else f"dense+{layer.activation}"
    print(f"  {label:14s} {k:.4f}")

budget = network_constant(net, tap="output")
print(f"network constant (output tap): {budget.network_constant:.4f}")
print(f"network constant (logit tap):  {network_constant(net, tap='logit').network_constant:.4f}")
print("note: the softmax layer carries the conservative factor",
      layer_constant(Layer(kind="softmax")))

# the model round-trips through its JSON format
text = save_model(net)
again = load_model(text)
print("\nserialized bytes:", len(text))
print("round-trip output matches:",
      bool(np.array_equal(forward(net, x), forward(again, x))))
