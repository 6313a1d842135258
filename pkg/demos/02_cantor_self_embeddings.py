"""The Cantor set does embed into itself, and the certifier has to notice.

Run with ``python demos/02_cantor_self_embeddings.py``.
"""

# %%
from fractions import Fraction

from selfsim.embedding import certify_empty, search_embeddings, verify_embedding
from selfsim.ifs import AffineMap1D, middle_thirds

C = middle_thirds()
res = certify_empty(C, C, max_depth=16)
print("outcome:", res.tag, "with", len(res.survivors), "surviving cells")

# %% Known embeddings survive, including ones with |a| < 1/rho after reduction.
for a, b in [(1, 0), (Fraction(1, 3), 0), (Fraction(1, 9), Fraction(2, 9)), (-1, 1)]:
    f = AffineMap1D(Fraction(a), Fraction(b))
    print(f"  {f}: survives = {res.contains_map(f)}")

# %% Finite-depth checks of individual maps.
print(verify_embedding(C, C, AffineMap1D(Fraction(1, 3), Fraction(2, 3)), 8))
print(verify_embedding(C, C, AffineMap1D(Fraction(1, 2), 0), 4))

# %% Candidate search over cylinder compositions.
for f, status in search_embeddings(C, C, candidate_depth=1, verify_depth=6):
    print(f"  {f}: {status.status}")
