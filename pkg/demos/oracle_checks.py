"""Pit the closed-form bounds against brute force on small instances.

Each block prints the oracle value next to the bound it must stay under.
"""

import numpy as np

from nodebound import (
    ComplexityParams,
    StaircaseClass,
    central_binomial,
    count_monotone,
    covering_bound_monotone,
    exact_covering_number,
    gamma_ratio_check,
    gronwall_check,
    mc_rademacher,
    rademacher_bound,
)

# staircase counting: enumeration vs the central binomial coefficient
print("monotone staircase counts:")
for grid in range(1, 7):
    count = count_monotone(grid)
    print(f"  N={grid}: enumerated {count.value:>5} = C({2*grid},{grid}) = "
          f"{central_binomial(grid).value}")

# covering numbers: searched covers vs the 2^(4LV/tau)/18 bound
print("\ncovering numbers of the 924-member staircase class (N=6):")
points = (np.arange(64) + 0.5) / 64
cls = StaircaseClass(6, 1.0, 1.0).sample(points)
for radius in (0.5, 0.25):
    cover = exact_covering_number(cls, radius)
    bound = covering_bound_monotone(1.0, 1.0, radius)
    mode = "exact" if cover.exact else "greedy"
    print(f"  tau={radius}: {mode} cover {cover.size:>3} <= bound {bound:.1f}")

# Rademacher complexity: exact sign enumeration vs the entropy-integral bound
print("\nRademacher complexity on a short horizon (L=0.1, V=1, n=12):")
rng = np.random.default_rng(0)
sample_points = np.sort(rng.uniform(0.0, 0.1, size=12))
small = StaircaseClass(6, 0.1, 1.0).sample(sample_points, max_members=256)
est = mc_rademacher(small)
bound = rademacher_bound(ComplexityParams(0.1, 1.0, 1, 12, 1.0))
print(f"  exact enumeration {est.value:.4f} <= bound {bound.value:.4f}")

# Gronwall recurrence with equality: zero slack by construction
res = gronwall_check("sequence_recurrence", u0=0.0, a=[2.0, 2.0, 2.0], b=[1.0, 1.0, 1.0])
print(f"\nGronwall recurrence u=(0,1,3,7): bound {res.rhs.tolist()}, slack {res.slack}")

# gamma ratio inequality across a grid
worst = min(
    (gamma_ratio_check(float(x), float(lam)).upper - gamma_ratio_check(float(x), float(lam)).lower)
    for x in np.linspace(0.1, 10, 9) for lam in np.linspace(0.1, 0.9, 9)
)
print(f"gamma ratio inequality holds on the 81-point grid (tightest bracket {worst:.4f})")
