"""Dyadic cells, atomic measures, magnification and covering profiles in dimension 1 or 2."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .numerics import as_rational

Point = tuple


def _point(x) -> Point:
    if isinstance(x, (tuple, list, np.ndarray)):
        return tuple(x)
    return (x,)


def _exact(x):
    """Floats become exact Fractions (binary floats are dyadic rationals)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    return as_rational(x)


@dataclass(frozen=True)
class DyadicCell:
    """The cell ``prod [k_i / 2^n, (k_i + 1) / 2^n)``."""

    n: int
    k: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2**self.n) if self.n >= 0 else Fraction(2 ** (-self.n))

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        s = self.side
        return [(ki * s, (ki + 1) * s) for ki in self.k]

    def __contains__(self, x) -> bool:
        x = _point(x)
        return len(x) == self.d and all(lo <= _exact(xi) < hi for xi, (lo, hi) in zip(x, self.bounds()))

    def homothety(self, x) -> Point:
        """``H_D``: the orientation-preserving homothety taking the cell onto ``[0, 1)^d``."""
        return tuple(_exact(xi) / self.side - ki for xi, ki in zip(_point(x), self.k))

    def image_of(self, other: "DyadicCell") -> "DyadicCell":
        """``H_D(other)`` for a sub-cell ``other`` of this cell."""
        m = other.n - self.n
        if m < 0 or any(ok >> m != sk for ok, sk in zip(other.k, self.k)):
            raise ValueError("not a sub-cell")
        return DyadicCell(m, tuple(ok - (sk << m) for ok, sk in zip(other.k, self.k)))

    def children(self) -> list["DyadicCell"]:
        out = [()]
        for ki in self.k:
            out = [c + (2 * ki + e,) for c in out for e in (0, 1)]
        return [DyadicCell(self.n + 1, c) for c in out]

    def __str__(self):
        return " x ".join(f"[{lo}, {hi})" for lo, hi in self.bounds())


def cell_of(x, n: int) -> DyadicCell:
    """The level-``n`` dyadic cell containing the point ``x`` (a number or a 2-tuple)."""
    return DyadicCell(n, tuple(math.floor(_exact(xi) * 2**n) for xi in _point(x)))


def unit_cell(d: int = 1) -> DyadicCell:
    return DyadicCell(0, (0,) * d)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many distinct atoms with positive weights summing to 1."""

    atoms: tuple[tuple[Point, Fraction], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a measure needs at least one atom")
        pts = [p for p, _ in self.atoms]
        if len(set(pts)) != len(pts):
            raise ValueError("atoms must be distinct")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("mixed dimensions")
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("weights must be positive")
        total = sum(w for _, w in self.atoms)
        if total != 1 and not (isinstance(total, float) and abs(total - 1) < 1e-9):
            raise ValueError(f"weights sum to {total}, not 1")

    @classmethod
    def from_weights(cls, points: Iterable, weights: Iterable) -> "AtomicMeasure":
        """Normalizes the weights and merges coincident points."""
        acc: dict[Point, Fraction] = defaultdict(Fraction)
        for p, w in zip(points, weights):
            acc[_point(p)] += _exact(w)
        total = sum(acc.values())
        return cls(tuple(sorted((p, w / total) for p, w in acc.items() if w)))

    @classmethod
    def uniform(cls, points: Iterable) -> "AtomicMeasure":
        pts = [_point(p) for p in points]
        return cls.from_weights(pts, [1] * len(pts))

    @property
    def d(self) -> int:
        return len(self.atoms[0][0])

    @property
    def total(self):
        return sum(w for _, w in self.atoms)

    def mass(self, D: DyadicCell):
        return sum((w for p, w in self.atoms if p in D), Fraction(0))

    def support(self) -> list[Point]:
        return [p for p, _ in self.atoms]

    def pushforward(self, f: Callable[[Point], Point]) -> "AtomicMeasure":
        return AtomicMeasure.from_weights([_point(f(p)) for p, _ in self.atoms], [w for _, w in self.atoms])

    def cell_masses(self, n: int) -> dict[DyadicCell, Fraction]:
        acc: dict[DyadicCell, Fraction] = defaultdict(Fraction)
        for p, w in self.atoms:
            acc[cell_of(p, n)] += w
        return dict(acc)

    def to_csv(self) -> str:
        cols = ["x", "y"][: self.d] if self.d <= 2 else [f"x{i}" for i in range(self.d)]
        lines = [",".join(cols + ["weight"])]
        for p, w in self.atoms:
            lines.append(",".join([str(c) for c in p] + [str(w)]))
        return "\n".join(lines) + "\n"


def magnify(mu: AtomicMeasure, D: DyadicCell) -> AtomicMeasure:
    """``mu^D``: restrict to D, renormalize and push forward by ``H_D``."""
    inside = [(p, w) for p, w in mu.atoms if p in D]
    if not inside:
        raise ValueError("the cell has zero mass")
    return AtomicMeasure.from_weights([D.homothety(p) for p, _ in inside], [w for _, w in inside])


def cp_step(mu: AtomicMeasure, n: int, rng: np.random.Generator) -> tuple[DyadicCell, AtomicMeasure]:
    """One step of the CP chain: draw ``D`` of level ``n`` with probability ``mu(D)``, return ``(D, mu^D)``."""
    for p in mu.support():
        if not all(0 <= _exact(c) < 1 for c in p):
            raise ValueError("measure must be supported in the unit cube")
    masses = mu.cell_masses(n)
    cells = sorted(masses, key=lambda c: c.k)
    p = np.array([float(masses[c]) for c in cells])
    D = cells[int(rng.choice(len(cells), p=p / p.sum()))]
    return D, magnify(mu, D)


def cp_trajectory(mu: AtomicMeasure, n: int, steps: int, seed: int) -> list[dict]:
    """JSON-ready records of a seeded chain run."""
    rng = np.random.default_rng(seed)
    out = []
    for t in range(steps):
        D, mu = cp_step(mu, n, rng)
        out.append({"step": t, "cell": {"n": D.n, "k": list(D.k)}, "atoms": len(mu.atoms)})
    return out


def project(sigma, data):
    """``pi_sigma(u, v) = sigma u + v`` applied to points or to a 2-d atomic measure."""
    s = _exact(sigma)
    if isinstance(data, AtomicMeasure):
        if data.d != 2:
            raise ValueError("projection needs a measure on the plane")
        return data.pushforward(lambda p: (s * _exact(p[0]) + _exact(p[1]),))
    return [s * _exact(u) + _exact(v) for u, v in data]


def product(mu: AtomicMeasure, nu: AtomicMeasure) -> AtomicMeasure:
    pts, ws = [], []
    for p, w in mu.atoms:
        for q, v in nu.atoms:
            pts.append(p + q)
            ws.append(w * v)
    return AtomicMeasure.from_weights(pts, ws)


def bl_distance(mu: AtomicMeasure, nu: AtomicMeasure) -> Fraction:
    """``int |F_mu - F_nu|`` for measures on the line; a diagnostic discrepancy only."""
    if mu.d != 1 or nu.d != 1:
        raise ValueError("one-dimensional measures only")
    xs = sorted({p[0] for p, _ in mu.atoms} | {p[0] for p, _ in nu.atoms})
    fm = fn = Fraction(0)
    dm = {p[0]: w for p, w in mu.atoms}
    dn = {p[0]: w for p, w in nu.atoms}
    total = Fraction(0)
    for x, nxt in zip(xs, xs[1:]):
        fm += dm.get(x, 0)
        fn += dn.get(x, 0)
        total += abs(fm - fn) * (_exact(nxt) - _exact(x))
    return total


# ---------------------------------------------------------------------------
# Covering profiles
# ---------------------------------------------------------------------------

def _greedy_1d(xs: Sequence, length) -> int:
    count = 0
    end = None
    for x in xs:
        if end is None or x >= end:
            count += 1
            end = x + length
    return count


def covering_profile(E, x, R, r) -> int:
    """Covering count of ``E`` within distance ``R`` of ``x`` by sets of radius ``R r``.

    In 1-d these are half-open intervals of length ``2 R r`` placed greedily
    from the left, which is optimal.  In 2-d ``E`` is bucketed on a grid of
    side ``2 R r`` (sup-norm balls); the count is within a factor 4 of optimal.
    """
    R, r = _exact(R), _exact(r)
    if not (0 < r < 1 and R > 0):
        raise ValueError("need 0 < r < 1 and R > 0")
    length = 2 * R * r
    pts = [_point(p) for p in E]
    c = _point(x)
    if len(c) == 1:
        xs = sorted({_exact(p[0]) for p in pts if abs(_exact(p[0]) - _exact(c[0])) <= R})
        return _greedy_1d(xs, length)
    near = [p for p in pts if max(abs(_exact(pi) - _exact(ci)) for pi, ci in zip(p, c)) <= R]
    if not near:
        return 0
    origin = [_exact(ci) - R for ci in c]
    return len({tuple(math.floor((_exact(pi) - oi) / length) for pi, oi in zip(p, origin)) for p in near})


@dataclass(frozen=True)
class AssouadEstimate:
    estimate: float
    center: tuple
    radius: Fraction
    ratios: tuple[Fraction, ...]
    counts: tuple[int, ...]
    samples: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "center": [str(c) for c in self.center],
            "radius": str(self.radius),
            "ratios": [str(r) for r in self.ratios],
            "counts": list(self.counts),
            "samples": self.samples,
            "heuristic": True,
        }


def _slope(xs, ys) -> float:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    xm, ym = xs.mean(), ys.mean()
    den = ((xs - xm) ** 2).sum()
    return float(((xs - xm) * (ys - ym)).sum() / den) if den else 0.0


def assouad_estimate(E, ratios: Sequence, radii: Sequence | None = None, min_scale=None) -> AssouadEstimate:
    """Finite-scale heuristic for the Assouad dimension of a finite set on the line.

    Outer radii run over ``2^-j``; centres over one point of ``E`` per
    occupied dyadic cell of side ``R`` (the dyadic skeleton).  For each
    ``(x, R)`` the least-squares slope of ``log cov`` against ``log(1/r)`` is
    taken; the maximum and its localization are returned.  Pairs with
    ``R * min(ratios)`` below ``min_scale`` (default: the smallest gap in
    ``E``) are skipped because the set is resolved into single points there.
    """
    ratios = sorted((_exact(r) for r in ratios), reverse=True)
    if len(ratios) < 2:
        raise ValueError("need at least two scales")
    xs = sorted({_exact(_point(p)[0]) for p in E})
    if len(xs) < 2:
        raise ValueError("need at least two points")
    gaps = [b - a for a, b in zip(xs, xs[1:])]
    floor_scale = min(gaps) if min_scale is None else _exact(min_scale)
    span = xs[-1] - xs[0]
    if radii is None:
        radii, R = [], Fraction(1)
        while R > span:
            R /= 2
        while R * ratios[-1] >= floor_scale:
            radii.append(R)
            R /= 2
    best = None
    samples = 0
    arr = np.array([float(v) for v in xs])
    for R in radii:
        R = _exact(R)
        if R * ratios[-1] < floor_scale:
            continue
        seen = set()
        for v in xs:
            key = math.floor(v / R)
            if key in seen:
                continue
            seen.add(key)
            lo, hi = np.searchsorted(arr, float(v - R), "left"), np.searchsorted(arr, float(v + R), "right")
            local = [q for q in xs[max(lo - 1, 0) : hi + 1] if abs(q - v) <= R]
            counts = tuple(_greedy_1d(local, 2 * R * r) for r in ratios)
            s = _slope([math.log(1 / float(r)) for r in ratios], [math.log(c) for c in counts])
            samples += 1
            if best is None or s > best.estimate:
                best = AssouadEstimate(s, (v,), R, tuple(ratios), counts, 0)
    if best is None:
        raise ValueError("no admissible (x, R) pair; lower min_scale or pass radii")
    return AssouadEstimate(best.estimate, best.center, best.radius, best.ratios, best.counts, samples)


def cantor_endpoints(depth: int) -> list[Fraction]:
    """Both endpoints of every depth-``depth`` middle-thirds cylinder."""
    pts = [Fraction(0)]
    for _ in range(depth):
        pts = [p / 3 for p in pts] + [p / 3 + Fraction(2, 3) for p in pts]
    s = Fraction(1, 3**depth)
    return sorted(set(pts) | {p + s for p in pts})
