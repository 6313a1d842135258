"""Exact Q-linear algebra on logarithms of rationals, and Diophantine scans.

``log r`` for a positive rational ``r`` is represented by its integer
exponent vector over the primes dividing ``r``; Q-linear relations among
logarithms are then integer linear algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import factorint

from .ifs import IFSystem, Word, compose_word, count_vector
from .numerics import Enclosure, as_rational, default_precision, enc_log, enc_pow, format_rational


# ---------------------------------------------------------------------------
# Logarithms of rationals
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


@dataclass(frozen=True)
class LogVector:
    """``log r = sum_p e_p log p`` for a positive rational ``r``."""

    primes: tuple[int, ...]
    exponents: tuple[int, ...]

    @classmethod
    def of(cls, r) -> "LogVector":
        r = as_rational(r)
        if r <= 0:
            raise ValueError("logarithm of a nonpositive rational")
        exps: dict[int, int] = {}
        for p, e in _factor(r.numerator):
            exps[p] = exps.get(p, 0) + e
        for p, e in _factor(r.denominator):
            exps[p] = exps.get(p, 0) - e
        primes = tuple(sorted(p for p, e in exps.items() if e))
        return cls(primes, tuple(exps[p] for p in primes))

    def value(self) -> Fraction:
        out = Fraction(1)
        for p, e in zip(self.primes, self.exponents):
            out *= Fraction(p) ** e
        return out

    def on(self, primes: Sequence[int]) -> list[int]:
        d = dict(zip(self.primes, self.exponents))
        return [d.get(p, 0) for p in primes]

    def enclosure(self, prec: int | None = None) -> Enclosure:
        return enc_log(Enclosure(self.value(), prec=prec))


@dataclass(frozen=True)
class LogOf:
    """The real number ``sign * log(r)`` for a positive rational ``r``.

    Passing these to the Diophantine scans lets exact vanishing of an
    integer combination be decided from exponent vectors.
    """

    r: Fraction
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "r", as_rational(self.r))
        if self.r <= 0:
            raise ValueError("log of a nonpositive rational")

    def __neg__(self):
        return LogOf(self.r, -self.sign)

    def enclosure(self, prec: int | None = None) -> Enclosure:
        e = enc_log(Enclosure(self.r, prec=prec))
        return e if self.sign > 0 else -e

    def vector(self, primes) -> list[int]:
        return [self.sign * x for x in LogVector.of(self.r).on(primes)]

    def __repr__(self):
        return f"{'-' if self.sign < 0 else ''}log({format_rational(self.r)})"


def _check_unit_interval(ratios):
    out = []
    for r in ratios:
        r = as_rational(r)
        if not 0 < r < 1:
            raise ValueError(f"ratio {r} is not in (0, 1)")
        out.append(r)
    return out


def _exponent_matrix(ratios) -> tuple[list[int], list[list[int]]]:
    vecs = [LogVector.of(r) for r in ratios]
    primes = sorted({p for v in vecs for p in v.primes})
    return primes, [v.on(primes) for v in vecs]


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    ncols = len(m[0]) if m else 0
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        m[row] = [x * inv for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
        if row == len(m):
            break
    return m, pivots


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over Q of an integer (or rational) matrix."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    return len(_rref(rows)[1])


def log_rank(ratios) -> int:
    """``rank_Q {log r}`` for rationals in (0, 1)."""
    ratios = _check_unit_interval(ratios)
    _, mat = _exponent_matrix(ratios)
    return integer_rank(mat)


@dataclass(frozen=True)
class SpanResult:
    member: bool
    coefficients: tuple[Fraction, ...] | None = None

    def __bool__(self):
        return self.member


def in_log_span(r, basis) -> SpanResult:
    """Decide whether ``log r`` lies in ``span_Q {log b : b in basis}``.

    On success the coefficients ``c`` satisfy ``log r = sum c_k log b_k``.
    """
    r = _check_unit_interval([r])[0]
    basis = _check_unit_interval(basis)
    primes, mat = _exponent_matrix([r, *basis])
    target, cols = mat[0], mat[1:]
    k = len(cols)
    if k == 0:
        return SpanResult(False)
    # augmented system: sum_k c_k cols[k] = target, one row per prime
    aug = [[cols[j][p] for j in range(k)] + [target[p]] for p in range(len(primes))]
    red, pivots = _rref(aug)
    if k in pivots:
        return SpanResult(False)
    coeffs = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        coeffs[col] = red[i][k]
    return SpanResult(True, tuple(coeffs))


# ---------------------------------------------------------------------------
# Conditions (D) and (d)
# ---------------------------------------------------------------------------

@dataclass
class MarginRow:
    """Minimum of ``|sum n_i gamma_i|`` over admissible vectors with ``max|n_i| <= N``.

    ``margin_lo`` is a rigorous lower bound over all such vectors; ``margin_hi``
    is a rigorous upper bound for the reported ``argmin`` vector.
    """

    N: int
    margin_lo: Fraction
    margin_hi: Fraction
    argmin: tuple[int, ...]
    threshold: Fraction
    status: str  # "pass" | "violation" | "undecided"
    witness: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "margin_lo": _dec(self.margin_lo),
            "margin_hi": _dec(self.margin_hi),
            "argmin": list(self.argmin),
            "status": self.status,
            "witness": None if self.witness is None else list(self.witness),
        }


def _dec(q: Fraction) -> str:
    return f"{float(q):.17g}"


@dataclass
class DioReport:
    mode: str  # "D" or "d"
    c: Fraction
    N_max: int
    precision: int
    fixed_point_bits: int
    rows: list[MarginRow] = field(default_factory=list)

    @property
    def violations(self) -> list[MarginRow]:
        return [row for row in self.rows if row.status == "violation"]

    @property
    def undecided(self) -> list[MarginRow]:
        return [row for row in self.rows if row.status == "undecided"]

    @property
    def good_N(self) -> list[int]:
        """Horizons at which every admissible vector beats ``N^-c`` (certified)."""
        return [row.N for row in self.rows if row.status == "pass"]

    def row(self, N: int) -> MarginRow:
        return self.rows[N - self.rows[0].N]

    def holds_at(self, N: int) -> bool:
        return self.row(N).status == "pass"

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "c": format_rational(self.c),
            "N_max": self.N_max,
            "precision": self.precision,
            "fixed_point_bits": self.fixed_point_bits,
            "rows": [r.to_json() for r in self.rows],
            "violations": [r.N for r in self.violations],
            "good_N": self.good_N,
        }

    def to_csv(self) -> str:
        """``N, margin_lo * N^c`` lines for plotting."""
        lines = ["N,scaled_margin"]
        for row in self.rows:
            lines.append(f"{row.N},{float(row.margin_lo) * row.N ** float(self.c):.12g}")
        return "\n".join(lines) + "\n"


def _gamma_bounds(g, prec: int) -> tuple[Fraction, Fraction]:
    if isinstance(g, LogOf):
        g = g.enclosure(prec)
    if isinstance(g, Enclosure):
        lo, hi = g.lo_rational(), g.hi_rational()
        if lo is None or hi is None:
            raise ValueError("gamma enclosures must be finite")
        return lo, hi
    q = as_rational(g)
    return q, q


def _threshold(N: int, c: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    if c.denominator == 1 and c >= 0:
        t = Fraction(1, N ** int(c))
        return t, t
    e = enc_pow(Enclosure(N, prec=prec), -c)
    return e.lo_rational(), e.hi_rational()


def _scan(gammas, c, N_max: int, nonneg: bool, prec: int | None) -> DioReport:
    prec = default_precision() if prec is None else prec
    c = as_rational(c)
    k = len(gammas)
    if k == 0:
        raise ValueError("need at least one gamma")
    if N_max < 2:
        raise ValueError("N_max must be at least 2")
    bounds = [_gamma_bounds(g, prec) for g in gammas]
    mag = sum(max(abs(lo), abs(hi)) for lo, hi in bounds) + 1
    headroom = 62 - math.ceil(math.log2(float(mag) * N_max + 1))
    if headroom >= min(prec, 40):
        s, dtype = min(prec, headroom), np.int64
    else:
        s, dtype = prec, object
    scale = 1 << s
    L = [math.floor(lo * scale) for lo, _ in bounds]
    U = [math.ceil(hi * scale) for _, hi in bounds]

    INF = None
    best_lo: list = [INF] * (N_max + 1)  # per shell h = max|n_i|: (lo, vector)
    best_hi: list = [INF] * (N_max + 1)

    rng = np.arange(0 if nonneg else -N_max, N_max + 1, dtype=np.int64)
    rest_shape = (len(rng),) * (k - 1)
    if k > 1:
        grids = np.meshgrid(*([rng] * (k - 1)), indexing="ij")
        rest = np.stack([g.ravel() for g in grids], axis=1)
    else:
        rest = np.zeros((1, 0), dtype=np.int64)
    rest_h = np.abs(rest).max(axis=1) if k > 1 else np.zeros(1, dtype=np.int64)
    Lr = np.array(L[1:], dtype=dtype)
    Ur = np.array(U[1:], dtype=dtype)
    if k > 1:
        rest_obj = rest.astype(dtype)
        pos = rest_obj >= 0 if dtype is np.int64 else rest >= 0
        rest_lo = np.where(pos, rest_obj * Lr, rest_obj * Ur).sum(axis=1)
        rest_hi = np.where(pos, rest_obj * Ur, rest_obj * Lr).sum(axis=1)
    else:
        rest_lo = np.zeros(1, dtype=dtype)
        rest_hi = np.zeros(1, dtype=dtype)

    first_values = range(0, N_max + 1) if nonneg else range(-N_max, N_max + 1)
    for n1 in first_values:
        if n1 >= 0:
            s_lo = rest_lo + n1 * L[0]
            s_hi = rest_hi + n1 * U[0]
        else:
            s_lo = rest_lo + n1 * U[0]
            s_hi = rest_hi + n1 * L[0]
        h = np.maximum(rest_h, abs(n1))
        straddle = (s_lo <= 0) & (s_hi >= 0)
        a_lo, a_hi = np.abs(s_lo), np.abs(s_hi)
        m_lo = np.where(straddle, 0, np.minimum(a_lo, a_hi))
        m_hi = np.maximum(a_lo, a_hi)
        if n1 == 0:
            nz = h > 0
            if not nz.any():
                continue
            idx_all = np.nonzero(nz)[0]
        else:
            idx_all = None
        _update_best(best_lo, m_lo, h, idx_all, rest, n1)
        _update_best(best_hi, m_hi, h, idx_all, rest, n1)

    report = DioReport("d" if nonneg else "D", c, N_max, prec, s)
    run_lo = run_hi = None
    exact_gammas = all(isinstance(g, LogOf) for g in gammas)
    for N in range(1, N_max + 1):
        if best_lo[N] is not None and (run_lo is None or best_lo[N][0] < run_lo[0]):
            run_lo = best_lo[N]
        if best_hi[N] is not None and (run_hi is None or best_hi[N][0] < run_hi[0]):
            run_hi = best_hi[N]
        if N < 2:
            continue
        t_lo, t_hi = _threshold(N, c, prec)
        m_lo = Fraction(int(run_lo[0]), scale)
        vec = _canonical(run_lo[1], nonneg)
        m_hi = Fraction(int(_eval_hi(vec, L, U)), scale)
        if exact_gammas and m_lo == 0 and _vanishes(gammas, vec):
            m_hi = Fraction(0)
        witness = None
        if m_lo > t_hi:
            status = "pass"
        else:
            wvec = _canonical(run_hi[1], nonneg)
            w_hi = Fraction(int(run_hi[0]), scale)
            if exact_gammas and _vanishes(gammas, wvec):
                w_hi = Fraction(0)
            if w_hi <= t_lo:
                status, witness = "violation", wvec
            else:
                status = "undecided"
        report.rows.append(MarginRow(N, m_lo, m_hi, vec, t_lo, status, witness))
    return report


def _update_best(best, margins, h, idx, rest, n1):
    if idx is not None:
        margins, h, rest = margins[idx], h[idx], rest[idx]
    order = np.lexsort((margins, h)) if margins.dtype != object else _obj_lexsort(margins, h)
    hs = h[order]
    first = np.ones(len(hs), dtype=bool)
    first[1:] = hs[1:] != hs[:-1]
    for j in order[first]:
        hv = int(h[j])
        mv = margins[j]
        if best[hv] is None or mv < best[hv][0]:
            best[hv] = (mv, (n1, *map(int, rest[j])))


def _obj_lexsort(margins, h):
    return np.array(sorted(range(len(h)), key=lambda i: (int(h[i]), margins[i])), dtype=np.int64)


def _eval_hi(vec, L, U) -> int:
    lo = sum(n * (l if n >= 0 else u) for n, l, u in zip(vec, L, U))
    hi = sum(n * (u if n >= 0 else l) for n, l, u in zip(vec, L, U))
    return max(abs(lo), abs(hi))


def _canonical(vec, nonneg: bool) -> tuple[int, ...]:
    vec = tuple(int(v) for v in vec)
    if nonneg:
        return vec
    for v in vec:
        if v:
            return vec if v > 0 else tuple(-x for x in vec)
    return vec


def _vanishes(gammas: Sequence[LogOf], vec) -> bool:
    primes = sorted({p for g in gammas for p in LogVector.of(g.r).primes})
    total = [0] * len(primes)
    for n, g in zip(vec, gammas):
        for i, e in enumerate(g.vector(primes)):
            total[i] += n * e
    return not any(total)


def check_condition_D(gammas, c, N_max: int, prec: int | None = None) -> DioReport:
    """Exhaustive scan of ``|sum n_i gamma_i| > N^-c`` over ``-N <= n_i <= N``, ``2 <= N <= N_max``.

    Gammas may be Fractions, Enclosures or :class:`LogOf` values.  A row is a
    "pass" only when the certified lower bound beats the threshold, and a
    "violation" only when some vector's certified upper bound is below it.
    """
    return _scan(list(gammas), c, N_max, nonneg=False, prec=prec)


def check_condition_d(gammas, c, N_max: int, prec: int | None = None) -> DioReport:
    """As :func:`check_condition_D` with ``0 <= n_i <= N``; ``good_N`` lists the certified horizons."""
    return _scan(list(gammas), c, N_max, nonneg=True, prec=prec)


# ---------------------------------------------------------------------------
# Sub-IFS words
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubIFSPair:
    index: int
    u: Word
    v: Word
    alternatives: tuple[Word, ...] = ()

    def count(self, size: int) -> tuple[int, ...]:
        return count_vector(self.u, size)


@dataclass(frozen=True)
class SubIFS:
    pairs: tuple[SubIFSPair, ...]
    p: int
    q: int
    r: int
    N: int
    rank: int


def _distinct_fixed_points(X: IFSystem) -> tuple[int, int]:
    fps = [m.fixed_point() for m in X.maps]
    for a in range(len(fps)):
        for b in range(a + 1, len(fps)):
            if fps[a] != fps[b]:
                return a + 1, b + 1
    raise ValueError("all maps share a fixed point")


def build_sub_ifs(X: IFSystem, betas, r: int | None = None, N: int | None = None, max_N: int = 64) -> SubIFS:
    """Words ``u^(i) = p q i^N r[r]`` and ``v^(i) = q p i^N r[r]`` for every symbol ``i``.

    The returned words satisfy: the count vectors ``n(u^(i))`` are linearly
    independent; ``|phi_u| = |phi_v|`` with ``log |phi_u|`` outside the span
    of the ``log beta``; and ``phi_u``, ``phi_v`` have distinct fixed points.
    When ``N`` is None it is increased from 1 until the rank test passes.
    ``betas`` may contain Enclosures, in which case both candidates are kept
    as alternatives and the span condition is the caller's responsibility.
    """
    M = len(X.maps)
    rational_betas = all(not isinstance(b, Enclosure) for b in betas)
    if rational_betas:
        betas = [as_rational(b) for b in betas]
    alphas = [abs(m.ratio) for m in X.maps]
    if r is None:
        if not rational_betas:
            raise ValueError("r must be supplied when the beta list is not rational")
        r = next((i + 1 for i, a in enumerate(alphas) if not in_log_span(a, betas)), None)
        if r is None:
            raise ValueError("every log alpha_i lies in the span of the log beta_j")
    elif rational_betas and in_log_span(alphas[r - 1], betas):
        raise ValueError(f"log alpha_{r} lies in the span of the log beta_j")
    p, q = _distinct_fixed_points(X)

    def attempt(n: int) -> SubIFS:
        pairs = []
        for i in range(1, M + 1):
            body = (i,) * n
            u1 = (p, q) + body + (r,)
            u2 = u1 + (r,)
            if rational_betas:
                norm1 = compose_word(X, u1).norm
                u = u1 if not in_log_span(norm1, betas) else u2
                alts: tuple[Word, ...] = ()
            else:
                u, alts = u1, (u1, u2)
            v = (q, p) + u[2:]
            pairs.append(SubIFSPair(i, u, v, alts))
        counts = [count_vector(pr.u, M) for pr in pairs]
        rank = integer_rank(counts)
        return SubIFS(tuple(pairs), p, q, r, n, rank)

    if N is not None:
        out = attempt(N)
        if out.rank < M:
            raise ValueError(f"N={N} too small: count vectors have rank {out.rank} < {M}; increase N")
        return out
    for n in range(1, max_N + 1):
        out = attempt(n)
        if out.rank == M:
            return out
    raise ValueError(f"no N <= {max_N} gives independent count vectors")


def check_sub_ifs(X: IFSystem, betas, sub: SubIFS) -> dict[str, bool]:
    """Exact check of the three properties of :func:`build_sub_ifs` output."""
    M = len(X.maps)
    counts = [count_vector(pr.u, M) for pr in sub.pairs]
    independent = integer_rank(counts) == M
    equal_norms, outside_span, distinct_fp = True, True, True
    rational_betas = all(not isinstance(b, Enclosure) for b in betas)
    for pr in sub.pairs:
        fu, fv = compose_word(X, pr.u), compose_word(X, pr.v)
        equal_norms &= fu.norm == fv.norm
        if rational_betas:
            outside_span &= not in_log_span(fu.norm, betas)
        distinct_fp &= fu.fixed_point() != fv.fixed_point()
    return {"independent": independent, "equal_norms": equal_norms, "outside_span": outside_span, "distinct_fixed_points": distinct_fp}
