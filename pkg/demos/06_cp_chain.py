"""Magnifying measures along the CP chain.

Run with ``python demos/06_cp_chain.py``.
"""

# %%
from fractions import Fraction

import numpy as np

from selfsim.measures import AtomicMeasure, DyadicCell, assouad_estimate, cantor_endpoints, cp_step, cp_trajectory, magnify

mu = AtomicMeasure.uniform([Fraction(1, 10), Fraction(3, 10), Fraction(7, 10)])
print(magnify(mu, DyadicCell(1, (0,))).to_csv())

# %% The uniform measure on depth-6 Cantor points, one chain step at a time.
pts = [Fraction(0)]
for _ in range(6):
    pts = [p / 3 for p in pts] + [p / 3 + Fraction(2, 3) for p in pts]
nu = AtomicMeasure.uniform(pts)
rng = np.random.default_rng(0)
for _ in range(3):
    D, nu = cp_step(nu, 1, rng)
    print(D, "->", len(nu.atoms), "atoms, support in", (float(min(nu.support())[0]), float(max(nu.support())[0])))

# %% Seeded trajectories are reproducible.
print(cp_trajectory(AtomicMeasure.uniform(pts), 2, 4, seed=1))

# %% A finite-scale Assouad estimate (heuristic).
ratios = [Fraction(1, 2**i) for i in range(1, 9)]
print(assouad_estimate(cantor_endpoints(10), ratios).to_json())
