"""Compile a 3-CNF formula into a ReLU network whose reachability decides it.

Each variable splits into positive/negative ReLU parts, each clause sums the
parts its literals select, and the output negates the clause activations.
Scoring with max-of-outputs gives a map that dips below zero exactly at
satisfying corners of the hypercube, so reachability of negative values on
corners is satisfiability.  This is what makes the reachability question as
hard as SAT.
"""

import numpy as np

from lipreach import (
    corner_decision,
    build_network,
    forward,
    forward_batch,
    parse_dimacs,
    sat_objective,
)

DIMACS = """\
c (x1 or x2 or not x3) and (not x1 or x3 or x3) and (not x2 or not x3 or x1)
p cnf 3 3
1 2 -3 0
-1 3 3 0
-2 -3 1 0
"""

formula = parse_dimacs(DIMACS)
net = build_network(formula)
o = sat_objective(net)
print(f"formula: {formula.num_vars} variables, {formula.num_clauses} clauses")
print(f"network: {net.input_dim} inputs -> "
      + " -> ".join(str(l.weights.shape[0]) for l in net.layers))

# walk all corners: +1 encodes True, -1 encodes False
print("\ncorner sweep (score < 0 means every clause satisfied):")
for code in range(1 << formula.num_vars):
    corner = np.array([1.0 if code >> i & 1 else -1.0
                       for i in range(formula.num_vars)])
    score = o.fn(forward(net, corner))
    mark = "  <-- satisfying" if score < 0 else ""
    print(f"  {corner}  score {score:+.1f}{mark}")

print("\ncorner decision:", corner_decision(formula))

# sign-rounding any real input preserves zero-reachability of the score
rng = np.random.default_rng(0)
xs = rng.uniform(-1, 1, size=(5, formula.num_vars))
rounded = np.where(xs >= 0, 1.0, -1.0)
scores = o.fn_batch(forward_batch(net, xs))
corner_scores = o.fn_batch(forward_batch(net, rounded))
print("\nreal point scores:    ", np.round(scores, 3))
print("sign-rounded scores:  ", np.round(corner_scores, 3))
print("zero-pattern matches: ", bool(np.array_equal(scores == 0, corner_scores == 0)))
