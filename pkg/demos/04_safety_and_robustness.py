"""Prove a region safe, find an adversarial witness, and rank robustness.

Safety asks whether any input in the box can change the classifier's
decision.  A certified negative upper bound on the rival margin proves no;
a single evaluated point with positive margin is an adversarial example.
"""

import numpy as np

from lipreach import (
    Layer,
    NetworkModel,
    QuerySubspace,
    compare_networks,
    compare_subspaces,
    forward,
    softmax_margin_bound,
    verify_safety,
)

# linear 2-class net over one input; the decision flips at x = 0.5
net = NetworkModel(
    input_dim=1,
    layers=(Layer(kind="dense", weights=np.array([[1.0], [-1.0]]),
                  bias=np.array([-0.5, 0.5])),),
    name="boundary",
)

near = QuerySubspace(base=np.array([0.1]), free_dims=(0,), bounds=((0.0, 0.4),))
wide = QuerySubspace(base=np.array([0.1]), free_dims=(0,), bounds=((0.0, 1.0),))

v = verify_safety(net, near, epsilon=0.01)
print(f"box [0, 0.4]: verdict={v.verdict}, margin bound {v.sup_bound:+.4f}, "
      f"error band {v.error_band}")

v = verify_safety(net, wide, epsilon=0.01)
print(f"box [0, 1.0]: verdict={v.verdict}, witness x={v.witness}, "
      f"labels {v.base_label} -> {int(np.argmax(forward(net, v.witness)))}")

# with softmax confidences, a certified lower bound above one half is
# already a safety proof: rivals share what is left of the probability mass
lower_confidence = 0.7436
print(f"\nsoftmax shortcut: confidence lower bound {lower_confidence}"
      f" gives margin bound {softmax_margin_bound(lower_confidence):+.4f}"
      " (negative = safe)")

# robustness = smaller reachability diameter; compare two scaled classifiers
rng = np.random.default_rng(3)
w = rng.normal(size=(2, 2)) * 0.5
mild = NetworkModel(input_dim=2, layers=(
    Layer(kind="dense", weights=w, bias=np.zeros(2)), Layer(kind="softmax")))
sharp = NetworkModel(input_dim=2, layers=(
    Layer(kind="dense", weights=3.0 * w, bias=np.zeros(2)), Layer(kind="softmax")))

box = QuerySubspace(base=np.array([0.5, 0.5]), free_dims=(0, 1),
                    bounds=((0.0, 1.0), (0.0, 1.0)))
cmp_nets = compare_networks(mild, sharp, box, label=0, tap="logit", epsilon=0.005)
print(f"\nnetwork comparison (logit tap): {cmp_nets.relation}")
print(f"  diameters {cmp_nets.diameter_first:.4f} vs {cmp_nets.diameter_second:.4f}")

# and the same network is more robust on a smaller feature box
small = QuerySubspace(base=np.array([0.5, 0.5]), free_dims=(0,),
                      bounds=((0.45, 0.55),))
large = QuerySubspace(base=np.array([0.5, 0.5]), free_dims=(0,),
                      bounds=((0.0, 1.0),))
cmp_subs = compare_subspaces(sharp, small, large, label=0, epsilon=0.002)
print(f"subspace comparison: {cmp_subs.relation}")
print(f"  diameters {cmp_subs.diameter_first:.4f} vs {cmp_subs.diameter_second:.4f}")
