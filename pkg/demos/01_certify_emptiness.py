"""Certifying that no affine map sends one Cantor set into another.

Run with ``python demos/01_certify_emptiness.py``.
"""

# %% The instance: middle-thirds Cantor set X, and Y built from two maps of ratio 1/4.
from fractions import Fraction

from selfsim.embedding import certify_empty, initial_region, verify_certificate
from selfsim.ifs import homogeneous_pair, middle_thirds

X = middle_thirds()
Y = homogeneous_pair(Fraction(1, 4))
print("X maps:", [str(m) for m in X.maps])
print("Y maps:", [str(m) for m in Y.maps])

# %% Only maps with 1/rho <= |a| <= 1 need to be searched; smaller ones reduce to these.
region = initial_region(X, Y)
print("rho =", region.rho, " a-ranges:", [tuple(map(str, r)) for r in region.a_ranges])

# %% Branch and bound over dyadic cells of the (a, b) plane.
result = certify_empty(X, Y, max_depth=30)
print("outcome:", result.tag)
for row in result.stats["per_depth"]:
    print(f"  depth {row['depth']:2d}: {row['cells']:4d} cells, {row['live']:3d} live, area {float(row['surviving_area']):.4g}")

# %% The certificate is plain JSON and can be replayed from scratch.
cert = result.certificate
print(len(cert.leaves), "leaves; first:", cert.leaves[0])
print("replay:", verify_certificate(cert, X, Y))
print("replay at 32 bits:", verify_certificate(cert, X, Y, precision=32))

# %% A harder instance: Y with ratio 9/20 has larger dimension than X,
# so the dimension argument does not apply.  Surviving area still shrinks.
hard = certify_empty(X, homogeneous_pair(Fraction(9, 20)), max_depth=30)
print("9/20 instance:", hard.tag, "after", hard.stats["processed"], "cells")
print("areas:", [f"{float(r['surviving_area']):.3g}" for r in hard.stats["per_depth"]])
