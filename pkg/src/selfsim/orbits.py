"""Lambda-multi-rotations, covering numbers, densities and separation probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arithmetic import DioReport, in_log_span
from .numerics import Enclosure, as_rational, enc_floor, enc_log, to_float


@dataclass(frozen=True)
class LambdaSet:
    """``{log beta_j / log alpha}``, exact where a rational relation is certified."""

    values: tuple  # Fraction | Enclosure

    @property
    def sigma(self):
        """``max{1, lambda_1, ..., lambda_L}`` as a float upper bound."""
        return max([1.0] + [_upper(v) for v in self.values])

    @property
    def exact(self) -> bool:
        return all(not isinstance(v, Enclosure) for v in self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _upper(v) -> float:
    if isinstance(v, Enclosure):
        return float(v.hi)
    return float(v)


def lambda_of(alpha, betas, prec: int | None = None) -> LambdaSet:
    """Lambda set for a homogeneous contraction ``alpha`` and target ratios ``betas``."""
    alpha = as_rational(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    vals = []
    for b in betas:
        b = as_rational(b)
        if not 0 < b < 1:
            raise ValueError("beta must lie in (0, 1)")
        rel = in_log_span(b, [alpha])
        if rel:
            vals.append(rel.coefficients[0])
        else:
            vals.append(enc_log(Enclosure(b, prec=prec)) / enc_log(Enclosure(alpha, prec=prec)))
    return LambdaSet(tuple(vals))


@dataclass(frozen=True)
class MultiRotation:
    """``theta_n = theta_0 + sum_{k<n} lambda[choice_k]`` reduced mod 1.

    ``counts[n]`` records how often each lambda was used up to step ``n``, so
    every theta is computed from the origin without accumulated drift.
    """

    lam: LambdaSet
    theta0: Fraction
    choices: tuple[int, ...]
    thetas: tuple  # Fraction | Enclosure, each in [0, 1) (enclosures may straddle an integer)
    integer_parts: tuple  # int | None

    def __len__(self):
        return len(self.thetas)

    def floats(self) -> np.ndarray:
        return np.array([to_float(t) for t in self.thetas]) % 1.0

    def validate(self) -> bool:
        """Re-check ``theta_{n+1} - theta_n == lambda[choice_n] (mod 1)``."""
        for n, ch in enumerate(self.choices):
            d = self.thetas[n + 1] - self.thetas[n] - self.lam[ch]
            if isinstance(d, Enclosure):
                lo, hi = math.ceil(d.lo_rational()), math.floor(d.hi_rational())
                if lo > hi:
                    return False
            elif d.denominator != 1:
                return False
        return True

    def to_csv(self) -> str:
        lines = ["n,theta"]
        for n, t in enumerate(self.thetas):
            lines.append(f"{n},{to_float(t) % 1.0:.17g}")
        return "\n".join(lines) + "\n"


def _frac(x):
    if isinstance(x, Enclosure):
        k = enc_floor(x)
        if k is None:
            k = math.floor(x.lo_rational())
            return x - k, None
        return x - k, k
    k = math.floor(x)
    return x - k, k


def generate_multirotation(lam: LambdaSet, theta0, choices: Sequence[int], N: int | None = None) -> MultiRotation:
    """Orbit of length ``N`` (default ``len(choices) + 1``) driven by the index sequence ``choices``."""
    theta0 = as_rational(theta0)
    choices = tuple(int(c) for c in choices)
    if N is None:
        N = len(choices) + 1
    if len(choices) < N - 1:
        raise ValueError("not enough choices for the requested length")
    choices = choices[: N - 1]
    if any(not 0 <= c < len(lam) for c in choices):
        raise IndexError("choice index out of range")
    counts = [0] * len(lam)
    thetas, ints = [], []
    for n in range(N):
        total = theta0
        for j, cnt in enumerate(counts):
            if cnt:
                total = total + lam[j] * cnt
        t, k = _frac(total)
        thetas.append(t)
        ints.append(k)
        if n < N - 1:
            counts[choices[n]] += 1
    return MultiRotation(lam, theta0, choices, tuple(thetas), tuple(ints))


def choice_sequence(kind: str, length: int, n_lambdas: int, pattern: Sequence[int] = (0,), seed: int | None = None):
    """``constant`` | ``periodic`` (repeat ``pattern``) | ``random`` (seeded)."""
    if kind == "constant":
        return [pattern[0]] * length
    if kind == "periodic":
        return [pattern[i % len(pattern)] for i in range(length)]
    if kind == "random":
        rng = np.random.default_rng(seed)
        return rng.integers(0, n_lambdas, size=length).tolist()
    raise ValueError(f"unknown choice kind {kind!r}")


# ---------------------------------------------------------------------------
# Covering numbers and box dimension
# ---------------------------------------------------------------------------

def covering_number(points, length) -> int:
    """Minimal number of half-open intervals ``[x, x + length)`` covering ``points`` (greedy is optimal)."""
    pts = np.sort(np.asarray(points, dtype=float).ravel())
    if pts.size == 0:
        return 0
    return _greedy(pts, float(length))


def _greedy(pts: np.ndarray, length: float) -> int:
    count, i, n = 0, 0, len(pts)
    while i < n:
        count += 1
        i = int(np.searchsorted(pts, pts[i] + length, side="left"))
    return count


def covering_number_exact(points: Iterable[Fraction], length: Fraction) -> int:
    pts = sorted(set(points))
    count, start = 0, None
    for p in pts:
        if start is None or p >= start + length:
            count += 1
            start = p
    return count


@dataclass
class BoxDimEstimate:
    scales: list
    counts: list[int]
    slope: float

    def to_json(self) -> dict:
        return {"table": [{"r": float(r), "cov": c} for r, c in zip(self.scales, self.counts)], "slope": self.slope}


def box_dim_estimate(points, scales) -> BoxDimEstimate:
    """Least-squares slope of ``log cov(points, r)`` against ``log(1/r)``.

    ``cov(points, r)`` counts half-open intervals of length ``r`` (box-counting
    convention).  Exact rational inputs are counted exactly.
    """
    scales = list(scales)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be decreasing")
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    exact = all(isinstance(p, (Fraction, int)) for p in pts) and all(isinstance(r, (Fraction, int)) for r in scales)
    if exact:
        counts = [covering_number_exact(pts, Fraction(r)) for r in scales]
    else:
        arr = np.array([to_float(p) for p in pts])
        counts = [covering_number(arr, float(r)) for r in scales]
    x = np.log(1 / np.array([float(r) for r in scales]))
    y = np.log(np.array(counts, dtype=float))
    slope = float(np.polyfit(x, y, 1)[0]) if np.ptp(y) > 0 else 0.0
    return BoxDimEstimate(scales, counts, slope)


def delta_upper_estimate(lam: LambdaSet, length: int, scales, n_orbits: int = 8, seed: int = 0) -> dict:
    """Heuristic upper estimate of delta(Lambda): least slope over sampled orbits.

    Not rigorous: delta is an infimum over all multi-rotations and this only
    samples constant, alternating and seeded random choice sequences.
    """
    cands = [("constant", [j]) for j in range(len(lam))]
    if len(lam) > 1:
        cands.append(("periodic", list(range(len(lam)))))
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**31, size=n_orbits).tolist()
    results = []
    for kind, pat in cands:
        ch = choice_sequence(kind, length - 1, len(lam), pat)
        results.append((kind, pat, box_dim_estimate(generate_multirotation(lam, 0, ch).floats(), scales).slope))
    for s in seeds:
        ch = choice_sequence("random", length - 1, len(lam), seed=s)
        results.append(("random", s, box_dim_estimate(generate_multirotation(lam, 0, ch).floats(), scales).slope))
    best = min(results, key=lambda t: t[2])
    return {"estimate": best[2], "attained_by": best[:2], "rigorous": False, "samples": results}


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexSet:
    members: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        m = tuple(sorted(set(int(x) for x in self.members)))
        if m and (m[0] < 1 or m[-1] > self.horizon):
            raise ValueError("members must lie in [1, horizon]")
        object.__setattr__(self, "members", m)

    @classmethod
    def from_predicate(cls, pred, horizon: int) -> "IndexSet":
        return cls(tuple(n for n in range(1, horizon + 1) if pred(n)), horizon)


@dataclass(frozen=True)
class DensityReport:
    lower: float
    upper: float
    at_horizon: float
    window: tuple[int, int]


def density(U: IndexSet, window: int = 16) -> DensityReport:
    """Finite-horizon surrogates for the lower and upper density of ``U``.

    Running ratios ``|U cap [1, n]| / n`` are evaluated at every ``n`` in
    ``[N / window, N]``; their min and max are returned with the ratio at
    ``N`` itself.  These are not limits.
    """
    N = U.horizon
    if N < 1:
        raise ValueError("empty horizon")
    ind = np.zeros(N + 1, dtype=np.int64)
    ind[list(U.members)] = 1
    running = np.cumsum(ind)[1:] / np.arange(1, N + 1)
    start = max(1, N // window)
    seg = running[start - 1 :]
    return DensityReport(float(seg.min()), float(seg.max()), float(running[-1]), (start, N))


# ---------------------------------------------------------------------------
# Condition (R) probes
# ---------------------------------------------------------------------------

def circle_distance(x, y) -> tuple[Fraction, Fraction]:
    """Bounds ``(lo, hi)`` on the distance mod 1 between two exact or enclosed points."""
    d = x - y
    if isinstance(d, Enclosure):
        lo, hi = d.lo_rational(), d.hi_rational()
    else:
        lo = hi = Fraction(d)
    k = math.floor(lo)
    lo, hi = lo - k, hi - k
    if hi >= 1:
        low = Fraction(0)
    else:
        low = min(lo, 1 - hi)
    if lo <= Fraction(1, 2) <= hi:
        high = Fraction(1, 2)
    else:
        high = max(min(lo, 1 - lo), min(hi, 1 - hi)) if hi < 1 else Fraction(1, 2)
    return low, high


def min_pairwise_distance(thetas: Sequence) -> tuple[Fraction, tuple[int, int]]:
    """Certified lower bound for ``min_{i<j} d(theta_i, theta_j)`` (mod 1), exhaustive over pairs."""
    best, arg = None, (0, 0)
    n = len(thetas)
    for i in range(n):
        for j in range(i + 1, n):
            lo, _ = circle_distance(thetas[i], thetas[j])
            if best is None or lo < best:
                best, arg = lo, (i, j)
    return best, arg


@dataclass
class RProbeReport:
    box: BoxDimEstimate
    subset_size: int
    separation_checked: bool = False
    separation_N: int | None = None
    separation_bound: Fraction | None = None
    min_distance: Fraction | None = None
    separation_holds: bool | None = None
    covering_equals_size: bool | None = None
    notes: list[str] = field(default_factory=list)


def probe_R_conditions(
    lam: LambdaSet,
    orbit: MultiRotation,
    U: IndexSet,
    scales,
    dio: DioReport | None = None,
    N: int | None = None,
) -> RProbeReport:
    """Box-dimension estimate of ``{theta_i : i in U}`` plus, given a certified (d) report, the separation bound.

    ``dio`` must be a :func:`check_condition_d` report for ``(-1, lambda_1, ...)``.
    If it certifies horizon ``M = ceil(sigma N)`` with exponent ``c``, all
    pairwise distances among ``theta_1..theta_N`` are checked to exceed
    ``M^-c``, and the covering number of ``{theta_i : i in U, i <= N}`` at
    that radius is checked to equal its size.
    """
    if U.members and U.members[-1] > len(orbit):
        raise ValueError("index set exceeds the orbit length")
    pts = [orbit.thetas[i - 1] for i in U.members]
    box = box_dim_estimate([to_float(p) % 1.0 for p in pts], scales)
    rep = RProbeReport(box, len(pts))
    if dio is None:
        return rep
    N = N if N is not None else len(orbit)
    M = math.ceil(lam.sigma * N - 1e-12)
    if M > dio.N_max or not dio.holds_at(M):
        rep.notes.append(f"condition (d) not certified at horizon {M}")
        return rep
    c = dio.c
    bound = Fraction(1, M ** int(c)) if c.denominator == 1 else Fraction(dio.row(M).threshold)
    first = orbit.thetas[:N]
    mind, _ = min_pairwise_distance(first)
    rep.separation_checked = True
    rep.separation_N = N
    rep.separation_bound = bound
    rep.min_distance = mind
    rep.separation_holds = mind > bound
    sub = [to_float(orbit.thetas[i - 1]) % 1.0 for i in U.members if i <= N]
    rep.covering_equals_size = covering_number(sub, float(bound)) == len(sub)
    return rep
