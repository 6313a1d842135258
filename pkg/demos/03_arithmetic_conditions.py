"""Exact rank of logarithms and brute-force scans for Conditions (D) and (d).

Run with ``python demos/03_arithmetic_conditions.py``.
"""

# %% Ranks of logarithms of rationals come from prime exponent vectors.
from fractions import Fraction

from selfsim.arithmetic import LogOf, build_sub_ifs, check_condition_D, check_condition_d, in_log_span, log_rank
from selfsim.ifs import IFSystem

print("rank log{1/3,1/4,1/5} =", log_rank([Fraction(1, 3), Fraction(1, 4), Fraction(1, 5)]))
print("rank log{1/2,1/4,1/8} =", log_rank([Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]))
span = in_log_span(Fraction(1, 12), [Fraction(1, 2), Fraction(1, 3)])
print("log(1/12) in span{log 1/2, log 1/3}:", bool(span), [str(c) for c in span.coefficients])

# %% A dependent pair is caught exactly; log 2 and log 3 pass up to N = 500.
rep = check_condition_D([LogOf(2), LogOf(4)], 1, 5)
print("log2, log4:", [(r.N, r.status, r.witness) for r in rep.violations][:2])
rep = check_condition_D([LogOf(2), LogOf(3)], 2, 500)
print("log2, log3: violations", len(rep.violations), "; closest at N=500:", rep.row(500).argmin)

# %% The one-signed version.
rep = check_condition_d([-LogOf(3), LogOf(2)], 2, 200)
print("(d) for -log3, log2:", len(rep.good_N), "good N out of 199")

# %% Sub-systems with independent symbol counts and equal norms.
X = IFSystem.from_pairs([(Fraction(1, 3), 0), (Fraction(1, 4), Fraction(9, 20)), (Fraction(1, 5), Fraction(4, 5))])
sub = build_sub_ifs(X, [Fraction(1, 4)])
for p in sub.pairs:
    print("  u =", "".join(map(str, p.u)), " v =", "".join(map(str, p.v)))
