"""Watch the 1-D optimizer tighten its certified bracket on a wavy function.

The lower bound comes from a sawtooth of Lipschitz cones under the sampled
points; the upper bound is the best evaluation so far.  With a sound
constant the true minimum is trapped between them forever.
"""

import math

from lipreach import LipschitzBudget, OptConfig, empty_dynamic_budget, minimize_1d


def objective(x: float) -> float:
    return math.sin(x) + math.sin(10.0 * x / 3.0)


A, B = 2.7, 7.5
K = 4.5  # |cos x + (10/3) cos(10x/3)| never exceeds 1 + 10/3


def show(out, label):
    print(f"{label}:")
    print(f"  certified bracket  [{out.lower:.6f}, {out.upper:.6f}]")
    print(f"  minimizer          {out.best_point:.6f}")
    print(f"  iterations         {out.iterations}, evaluations {out.evaluations}")
    print(f"  converged          {out.converged}\n")


cfg = OptConfig(
    lipschitz=LipschitzBudget(per_layer=(K,), network_constant=K),
    epsilon=1e-3,
    collect_trace=True,
)
out = minimize_1d(objective, A, B, cfg)
show(out, f"static constant K={K}")

print("bracket evolution (every 20th iteration):")
for i, rec in enumerate(out.trace):
    if i % 20 == 0:
        print(f"  iter {i:4d}: lower {rec.lower:+.5f}  upper {rec.upper:+.5f}  "
              f"gap {rec.upper - rec.lower:.5f}")
print()

# dynamic mode estimates the constant from observed slopes instead; faster
# when the static bound is loose, but the result is heuristic, not certified
dyn = OptConfig(lipschitz=empty_dynamic_budget(eta=1.5), epsilon=1e-3)
out_dyn = minimize_1d(objective, A, B, dyn)
show(out_dyn, "dynamic (heuristic) constant")
print(f"dynamic estimate settled at K ~ {out_dyn.k_final:.3f} "
      f"(static bound was {K})")
