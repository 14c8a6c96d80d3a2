"""What drives the optimizer's cost: the constant and tolerance, not width.

Six synthetic 2-input networks over [0, 10]^2, in pairs: each base network
and a twin with every hidden layer doubled by dead neurons.  The twin
computes the same function with the same composed constant, and the solver
performs exactly the same number of evaluations on it.  Halving the
tolerance, by contrast, visibly raises the work.
"""

from lipreach.bench import BENCH_BOUNDS, run_suite, synthetic_suite


def show(rows, title):
    print(title)
    print(f"  {'network':14s} {'neurons':>7s} {'K':>7s} {'interval':>22s} "
          f"{'evals':>8s} {'ms':>7s}")
    for r in rows:
        interval = f"[{r['lower']:+.3f}, {r['upper']:+.3f}]"
        print(f"  {r['name']:14s} {r['neurons']:7d} {r['lipschitz']:7.3f} "
              f"{interval:>22s} {r['evaluations']:8d} {r['wall_ms']:7.0f}")
    print()


nets = synthetic_suite(seed=0)
rows = run_suite(nets, bounds=BENCH_BOUNDS, epsilon=0.01)
show(rows, "tolerance 0.01:")

for base, wide in zip(rows[0::2], rows[1::2]):
    same = base["evaluations"] == wide["evaluations"]
    print(f"  {base['name']:10s} vs {wide['name']:16s} "
          f"({base['neurons']:3d} vs {wide['neurons']:3d} neurons): "
          f"identical evaluations = {same}")
print()

coarse = run_suite(nets[:2], bounds=BENCH_BOUNDS, epsilon=0.02)
show(coarse, "same pair at tolerance 0.02 (cheaper):")
