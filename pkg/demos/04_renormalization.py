"""Renormalizing the embedding x -> x/3 of the Cantor set into itself.

Run with ``python demos/04_renormalization.py``.
"""

# %%
from fractions import Fraction

from selfsim.ifs import AffineMap1D, middle_thirds
from selfsim.renorm import approx_decomposition, dyadic_cell, e0_floor, renormalize, repeat_word, theta_sequence

C = middle_thirds()
f = AffineMap1D(Fraction(1, 3), 0)

# %% One step at level 8: choose k, the word ii, the hull Z and the engulfing word jj.
cell = dyadic_cell(f.ratio, f.translation, 8)
step = renormalize(cell, 8, repeat_word("1"), C, C)
print(step.to_json())
print("M f =", step.apply(f))
print("decomposition corners exact:", approx_decomposition(step).corners_ok)

# %% The trajectory over levels 6..16.
rep = theta_sequence(f, repeat_word("1"), 16, C, C, start=6, verify_depth=10)
print(rep.to_csv())
print("checks:", rep.checks, " jj nested:", rep.extends)
print("norm floor:", e0_floor(Fraction(1, 3), 3).value.mid)
