"""
Genetic-pool Bayesian optimization against random search
========================================================

Both methods get 60 evaluations on negated Branin and on the mock tuning
objective, whose maximum sits at batch size 8, 80 epochs and learning rate
1e-4. For each seed the first 10 points are shared.
Run with ``python demos/agbo_vs_random.py`` (about 15 s).
"""

import math
import statistics

from eyeopt import AgboConfig, agbo_run
from eyeopt.agbo import random_search
from eyeopt.objectives import get_objective

SEEDS = range(10)

for name in ("branin", "mock-tuning"):
    obj = get_objective(name)
    agbo, rand = [], []
    for seed in SEEDS:
        cfg = AgboConfig(init_points=10, iterations=50, seed=seed)
        agbo.append(agbo_run(cfg, obj, timing=False))
        rand.append(random_search(cfg, obj, 60, timing=False))
    wins = sum(a.best[1] >= r.best[1] for a, r in zip(agbo, rand))
    print(f"{name}")
    print(f"  median best  agbo {statistics.median(a.best[1] for a in agbo):+.5f}"
          f"   random {statistics.median(r.best[1] for r in rand):+.5f}")
    print(f"  agbo >= random in {wins}/{len(SEEDS)} seeds")

    # how quickly each method gets close: evaluations until within 0.1 of the final agbo best
    def first_hit(res, level):
        return next((h.iter_index + 1 for h in res.history if h.best_so_far >= level), None)

    level = statistics.median(a.best[1] for a in agbo) - 0.1
    hits_a = [first_hit(a, level) for a in agbo]
    hits_r = [first_hit(r, level) for r in rand]
    print(f"  evaluations to reach {level:+.3f} (None = never)")
    print(f"    agbo   {hits_a}")
    print(f"    random {hits_r}")

    if name == "mock-tuning":
        for a in agbo[:3]:
            bs, ep, lr = a.best[0]
            print(f"  seed best: batch {bs}, epochs {ep}, lr {lr:.2e} (log10 {math.log10(lr):+.3f})")
    print()
