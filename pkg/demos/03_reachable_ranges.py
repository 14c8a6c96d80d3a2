"""Bracket the reachable outputs of a network over a box of inputs.

Two free input dimensions roam their bounds while the rest of the input
stays clamped; the optimizer returns a certified outer interval for one
label's output, and an exhaustive lattice scan confirms it from the inside.
"""

import numpy as np

from lipreach import (
    GridSpec,
    NetworkModel,
    Layer,
    QuerySubspace,
    grid_extrema,
    network_constant,
    output_range,
    projection,
)
from lipreach.reach import batch_objective, composed_objective

rng = np.random.default_rng(7)
net = NetworkModel(
    input_dim=3,
    layers=(
        Layer(kind="dense", weights=rng.normal(size=(8, 3)) * 0.6,
              bias=rng.normal(size=8) * 0.3, activation="tanh"),
        Layer(kind="dense", weights=rng.normal(size=(2, 8)) * 0.5,
              bias=np.zeros(2)),
    ),
    name="range-demo",
)

subspace = QuerySubspace(
    base=np.array([0.5, 0.2, 0.8]),   # dimension 1 stays fixed at 0.2
    free_dims=(0, 2),
    bounds=((0.0, 1.0), (0.0, 1.0)),
)

eps = 0.01
result = output_range(net, subspace, label=0, epsilon=eps)
print(f"certified range of output 0:  [{result.lower:.5f}, {result.upper:.5f}]")
print(f"reachability diameter:        {result.diameter:.5f}")
print(f"witness inputs:               min at {np.round(result.min_witness, 4)}")
print(f"                              max at {np.round(result.max_witness, 4)}")
print(f"witness values:               {result.min_value:.5f} / {result.max_value:.5f}")
print(f"evaluations: {result.evaluations}, certified: {result.certified}\n")

# cross-check with the brute-force lattice oracle
o = projection(0)
k = network_constant(net).network_constant
oracle = grid_extrema(
    composed_objective(net, subspace, o, "output"),
    subspace.bounds,
    GridSpec(steps=(0.002, 0.002)),
    batch_objective=batch_objective(net, subspace, o, "output"),
    lipschitz=k,
)
print(f"lattice oracle ({oracle.points} points):")
print(f"  attained extrema  [{oracle.min_value:.5f}, {oracle.max_value:.5f}]")
print(f"  lattice slack     {oracle.lattice_slack:.5f}")
inside = (result.lower - 1e-9 <= oracle.min_value
          and oracle.max_value <= result.upper + 1e-9)
print(f"  oracle extrema inside the certified bracket: {inside}")
