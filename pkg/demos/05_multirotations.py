"""Multi-rotation orbits and their box-counting dimension.

Run with ``python demos/05_multirotations.py``.
"""

# %%
from fractions import Fraction

import numpy as np

from selfsim.arithmetic import check_condition_d
from selfsim.measures import cantor_endpoints
from selfsim.orbits import LambdaSet, box_dim_estimate, generate_multirotation, lambda_of, min_pairwise_distance

scales = [Fraction(1, 2**k) for k in range(4, 11)]

# %% An integer rotation number gives a single point.
o = generate_multirotation(LambdaSet((Fraction(2),)), 0, [0] * 1024)
print("Lambda = {2}: slope", box_dim_estimate(o.floats(), scales).slope)

# %% Rotation by log 2 / log 3 fills the circle.
lam = lambda_of(Fraction(1, 3), [Fraction(1, 2)])
o = generate_multirotation(lam, 0, [0] * 4095)
est = box_dim_estimate(o.floats(), scales)
print("Lambda = {log2/log3}: counts", list(est.counts), "slope", round(est.slope, 4))

# %% The Cantor endpoints for comparison.
print("Cantor depth 8 slope:", round(box_dim_estimate(cantor_endpoints(8), [Fraction(1, 3**m) for m in range(3, 9)]).slope, 4))

# %% With (d) certified up to N, the first N orbit points are (sigma N)^-2 separated.
N = 200
print("(d) holds at N:", check_condition_d([-1, lam[0]], 2, N).holds_at(N))
d, pair = min_pairwise_distance(o.thetas[:N])
print(f"closest pair {pair}: {float(d):.4g} >= {N ** -2:.4g}")
print("histogram of the orbit:", np.histogram(o.floats(), bins=8, range=(0, 1))[0])
