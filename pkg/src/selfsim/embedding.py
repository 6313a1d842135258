"""Branch-and-bound certification that no affine map embeds X into Y.

An affine map ``f(x) = a x + b`` is a point ``(a, b)`` of the parameter
plane.  Parameter cells are closed dyadic squares
``[i/2^L, (i+1)/2^L] x [j/2^L, (j+1)/2^L]`` identified by ``(L, i, j)``.

A cell is discarded when some point ``s = phi_ii(0)`` of X is sent, by every
map in the cell, outside the depth-``n`` cylinder cover of Y (checked with
outward-rounded enclosures against exact rational cylinder endpoints), or
when the cell lies entirely outside the search region ``1/rho <= |a| <= 1``.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .ifs import (
    AffineMap1D,
    IFSystem,
    Separation,
    Word,
    check_strong_separation,
    compose_word,
    compute_rho,
    cylinder_maps,
    engulf,
    word,
    word_str,
)
from .numerics import Enclosure, default_precision, enc_affine, format_rational, parse_rational

Cell = tuple[int, int, int]  # (level, i, j)

JUSTIFICATION = (
    "0 is a point of X, so b = f(0) lies in Y, inside hull(Y) = [0, 1].",
    "diam X = diam Y = 1, so f(X) inside Y forces |a| <= 1.",
    "If |a| < 1/rho, f(X) has diameter < gap(Y) and lies in one cylinder; engulfing it in the "
    "longest cylinder psi_jj(Y) containing it gives psi_jj^-1 o f in E with norm >= 1/rho.",
    "Hence E is empty iff it has no point with 1/rho <= |a| <= 1 and 0 <= b <= 1.",
    "A witness word ii excludes a cell: phi_ii(0) lies in X and every f in the cell sends it "
    "outside the closed depth-n cylinder cover of Y, which contains Y.",
)


def cell_bounds(cell: Cell) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    L, i, j = cell
    h = Fraction(1, 2**L)
    return i * h, (i + 1) * h, j * h, (j + 1) * h


def children(cell: Cell) -> list[Cell]:
    L, i, j = cell
    return [(L + 1, 2 * i + di, 2 * j + dj) for di in (0, 1) for dj in (0, 1)]


def cell_area(cell: Cell) -> Fraction:
    return Fraction(1, 4 ** cell[0])


def cell_contains(cell: Cell, a, b) -> bool:
    a0, a1, b0, b1 = cell_bounds(cell)
    return a0 <= a <= a1 and b0 <= b <= b1


def _sup_abs_a(cell: Cell) -> Fraction:
    a0, a1, _, _ = cell_bounds(cell)
    return max(abs(a0), abs(a1))


def _touches_zero(cell: Cell) -> bool:
    a0, a1, _, _ = cell_bounds(cell)
    return a0 <= 0 <= a1


# ---------------------------------------------------------------------------
# Region
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamRegion:
    a_ranges: tuple[tuple[Fraction, Fraction], ...]
    b_range: tuple[Fraction, Fraction]
    rho: Fraction
    roots: tuple[Cell, ...]

    @property
    def a_min(self) -> Fraction:
        return 1 / self.rho

    def excludes(self, cell: Cell) -> bool:
        """True if the closed cell misses the region entirely."""
        a0, a1, b0, b1 = cell_bounds(cell)
        if b1 < self.b_range[0] or b0 > self.b_range[1]:
            return True
        return not any(a0 <= hi and lo <= a1 for lo, hi in self.a_ranges)

    def contains(self, a, b) -> bool:
        return self.b_range[0] <= b <= self.b_range[1] and any(lo <= a <= hi for lo, hi in self.a_ranges)

    def to_json(self) -> dict:
        return {
            "a_ranges": [[format_rational(lo), format_rational(hi)] for lo, hi in self.a_ranges],
            "b_range": [format_rational(x) for x in self.b_range],
            "rho": format_rational(self.rho),
            "roots": [list(c) for c in self.roots],
        }


def _require_normalized(S: IFSystem, label: str):
    if not S.exact:
        raise TypeError(f"{label} must have rational coefficients")
    if S.hull != (0, 1):
        raise ValueError(f"{label} is not normalized to hull [0, 1]")


def initial_region(X: IFSystem, Y: IFSystem, orientation: str = "both") -> ParamRegion:
    """Search region ``1/rho <= |a| <= 1``, ``0 <= b <= 1`` for normalized, separated X and Y.

    ``orientation`` is ``"both"``, ``"preserving"`` (a > 0) or ``"reversing"`` (a < 0).
    """
    _require_normalized(X, "X")
    _require_normalized(Y, "Y")
    for S, label in ((X, "X"), (Y, "Y")):
        if check_strong_separation(S, 8).status is not Separation.CERTIFIED:
            raise ValueError(f"strong separation of {label} is not certified")
    rho = compute_rho(Y)
    amin = 1 / rho
    ranges, roots = [], []
    if orientation in ("both", "preserving"):
        ranges.append((amin, Fraction(1)))
        roots.append((0, 0, 0))
    if orientation in ("both", "reversing"):
        ranges.append((Fraction(-1), -amin))
        roots.append((0, -1, 0))
    if not ranges:
        raise ValueError(f"unknown orientation {orientation!r}")
    return ParamRegion(tuple(ranges), (Fraction(0), Fraction(1)), rho, tuple(roots))


# ---------------------------------------------------------------------------
# Y covers
# ---------------------------------------------------------------------------

def cover_meets(Y: IFSystem, depth: int, lo: Fraction, hi: Fraction) -> bool:
    """Does ``[lo, hi]`` meet some closed depth-``depth`` cylinder hull of Y?  Exact descent."""
    H0, H1 = Y.hull
    stack = [(Fraction(1), Fraction(0), 0)]
    while stack:
        r, t, d = stack.pop()
        u, v = r * H0 + t, r * H1 + t
        if u > v:
            u, v = v, u
        if v < lo or u > hi:
            continue
        if d == depth:
            return True
        for m in Y.maps:
            stack.append((r * m.ratio, r * m.translation + t, d + 1))
    return False


def point_exclusion_depth(Y: IFSystem, x: Fraction, max_depth: int) -> int | None:
    """Smallest depth at which ``x`` is outside the cylinder cover of Y, if ``<= max_depth``."""
    for d in range(max_depth + 1):
        if not cover_meets(Y, d, x, x):
            return d
    return None


class _FloatCover:
    """Sorted float64 endpoint arrays of depth-n covers (screening only, never trusted)."""

    def __init__(self, Y: IFSystem, max_intervals: int):
        self.Y = Y
        self.r = np.array([float(m.ratio) for m in Y.maps])
        self.t = np.array([float(m.translation) for m in Y.maps])
        self.max_depth = max(0, int(math.floor(math.log(max_intervals) / math.log(len(Y.maps)))))
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def get(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        n = min(n, self.max_depth)
        if n not in self._cache:
            lo, hi = np.array([0.0]), np.array([1.0])
            for _ in range(n):
                los, his = [], []
                for r, t in zip(self.r, self.t):
                    u, v = r * lo + t, r * hi + t
                    los.append(np.minimum(u, v))
                    his.append(np.maximum(u, v))
                lo, hi = np.concatenate(los), np.concatenate(his)
            order = np.argsort(lo, kind="stable")
            self._cache[n] = (lo[order], hi[order])
        return self._cache[n]


def auto_cover_depth(Y: IFSystem, side, cap: int) -> int:
    """Smallest n with max cylinder diameter ``beta_max^n <= side``, capped."""
    if side <= 0:
        return cap
    bmax = float(Y.max_norm)
    n = math.ceil(math.log(float(side)) / math.log(bmax) - 1e-9)
    return max(1, min(n, cap))


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamCell:
    """Closed rectangle ``[a0, a1] x [b0, b1]`` of parameters (a, b)."""

    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.a0 > self.a1 or self.b0 > self.b1:
            raise ValueError("empty parameter cell")

    @classmethod
    def dyadic(cls, cell: Cell) -> "ParamCell":
        return cls(*cell_bounds(cell))

    @classmethod
    def point(cls, a, b) -> "ParamCell":
        return cls(a, a, b, b)

    @property
    def bounds(self):
        return self.a0, self.a1, self.b0, self.b1

    @property
    def side(self) -> Fraction:
        return max(self.a1 - self.a0, self.b1 - self.b0)

    @property
    def precompact(self) -> bool:
        return not (self.a0 <= 0 <= self.a1)

    def contains(self, a, b) -> bool:
        return self.a0 <= a <= self.a1 and self.b0 <= b <= self.b1


def _as_param_cell(cell) -> ParamCell:
    if isinstance(cell, ParamCell):
        return cell
    if len(cell) == 3:
        return ParamCell.dyadic(tuple(cell))
    return ParamCell(*cell)


@dataclass(frozen=True)
class Pruned:
    word: Word
    cover_depth: int


@dataclass(frozen=True)
class Live:
    pass


LIVE = Live()


class Pruner:
    """Holds the witness points of X and the cover cache of Y for repeated cell tests."""

    def __init__(
        self,
        X: IFSystem,
        Y: IFSystem,
        witness_depth: int = 12,
        precision: int | None = None,
        max_witnesses: int = 1 << 14,
        max_cover_intervals: int = 1 << 18,
        tries: int = 4,
    ):
        self.X, self.Y = X, Y
        self.precision = default_precision() if precision is None else precision
        self.tries = tries
        words: list[Word] = []
        sig: list[float] = []
        d = 0
        while d <= witness_depth:
            layer = cylinder_maps(X, d)
            if words and len(words) + len(layer) > max_witnesses:
                break
            for w, f in layer:
                words.append(w)
                sig.append(float(f.translation))
            d += 1
        self.witness_depth = d - 1
        self.words = words
        self.sigma = np.array(sig)
        self.cover = _FloatCover(Y, max_cover_intervals)

    def screen(self, cell: ParamCell, n: int) -> np.ndarray:
        """Witness indices whose float image misses the float cover, widest clearance first."""
        a0, a1, b0, b1 = (float(x) for x in cell.bounds)
        s = self.sigma
        u = np.minimum(a0 * s, a1 * s) + b0
        v = np.maximum(a0 * s, a1 * s) + b1
        lo, hi = self.cover.get(n)
        idx = np.searchsorted(lo, v, side="right") - 1
        prev_hi = np.where(idx >= 0, hi[np.clip(idx, 0, None)], -np.inf)
        nxt = idx + 1
        next_lo = np.where(nxt < len(lo), lo[np.clip(nxt, None, len(lo) - 1)], np.inf)
        clearance = np.minimum(u - prev_hi, next_lo - v)
        ok = np.nonzero(clearance > 0)[0]
        return ok[np.argsort(-clearance[ok], kind="stable")]

    def prune(self, cell, cover_depth: int | None = None) -> Pruned | Live:
        pc = _as_param_cell(cell)
        cap = self.cover.max_depth
        n = auto_cover_depth(self.Y, pc.side, cap) if cover_depth is None else min(cover_depth, cap)
        for k in self.screen(pc, n)[: self.tries]:
            w = self.words[k]
            if witness_excludes(self.X, self.Y, pc, w, n, self.precision):
                return Pruned(w, n)
        return LIVE


def witness_excludes(X: IFSystem, Y: IFSystem, cell, w, n: int, precision: int) -> bool:
    """Rigorous check that every map in ``cell`` sends ``phi_w(0)`` off the depth-``n`` cover of Y."""
    a0, a1, b0, b1 = _as_param_cell(cell).bounds
    s = compose_word(X, w).translation
    img = enc_affine(Enclosure(a0, a1, precision), Enclosure(b0, b1, precision), Enclosure(s, s, precision))
    lo, hi = img.lo_rational(), img.hi_rational()
    if lo is None or hi is None:
        return False
    return not cover_meets(Y, n, lo, hi)


def prune_cell(
    cell,
    X: IFSystem,
    Y: IFSystem,
    witness_depth: int = 12,
    cover_depth: int | None = None,
    precision: int | None = None,
) -> Pruned | Live:
    """``Pruned(word)`` if some ``phi_ii(0)``, ``|ii| <= witness_depth``, provably lands outside Y for every map in the cell.

    ``cell`` is a :class:`ParamCell`, a dyadic ``(level, i, j)`` or bounds ``(a0, a1, b0, b1)``.
    """
    pc = _as_param_cell(cell)
    if not pc.precompact:
        return LIVE
    return Pruner(X, Y, witness_depth, precision).prune(pc, cover_depth)


# ---------------------------------------------------------------------------
# Certificates and outcomes
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    header: dict
    leaves: list[dict]

    def to_json(self) -> dict:
        return {**self.header, "leaves": self.leaves}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, d: dict) -> "Certificate":
        d = dict(d)
        leaves = d.pop("leaves")
        return cls(d, leaves)

    @classmethod
    def loads(cls, s: str) -> "Certificate":
        return cls.from_json(json.loads(s))


def instance_digest(X: IFSystem, Y: IFSystem) -> str:
    blob = json.dumps({"X": X.to_config(), "Y": Y.to_config()}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class Empty:
    certificate: Certificate
    stats: dict = field(default_factory=dict)
    tag: str = "Empty"


@dataclass
class Unknown:
    survivors: list[Cell]
    surviving_area: Fraction
    region: ParamRegion
    Y: IFSystem
    stats: dict = field(default_factory=dict)
    tag: str = "Unknown"
    pruned: list[dict] = field(default_factory=list)  # leaves removed so far, for audits

    def contains(self, a, b) -> bool:
        """Is ``(a, b)`` in the closure of the surviving cells?"""
        return any(cell_contains(c, a, b) for c in self.survivors)

    def contains_map(self, f: AffineMap1D, max_depth: int = 64) -> bool:
        """Whether ``f`` survives, after reducing small norms into the region.

        Maps with ``|a| < 1/rho`` are replaced by ``psi_jj^-1 o f`` for the
        longest Y-cylinder ``psi_jj(hull Y)`` containing ``f([0, 1])``.
        """
        g = f
        if abs(g.ratio) < self.region.a_min:
            jj = engulf(self.Y, g.image(0, 1), max_depth)
            g = compose_word(self.Y, jj).inverse().compose(g)
        return self.contains(g.ratio, g.translation)

    def to_json(self) -> dict:
        return {
            "outcome": "Unknown",
            "surviving_area": format_rational(self.surviving_area),
            "survivors": [list(c) for c in self.survivors],
            "stats": _jsonable(self.stats),
        }


@dataclass
class NonemptyCandidate:
    f: AffineMap1D
    verified_depth: int
    survivors: list[Cell]
    stats: dict = field(default_factory=dict)
    tag: str = "NonemptyCandidate"


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


_WORKER: Pruner | None = None


def _init_worker(args):
    global _WORKER
    X, Y, wd, prec = args
    _WORKER = Pruner(X, Y, wd, prec)


def _prune_batch(cells):
    return [_WORKER.prune(c) for c in cells]


def certify_empty(
    X: IFSystem,
    Y: IFSystem,
    max_depth: int = 24,
    witness_depth: int = 12,
    cover_depth: int | None = None,
    budget: int = 2_000_000,
    precision: int | None = None,
    orientation: str = "both",
    jobs: int = 1,
    candidate_depth: int = 0,
):
    """Breadth-first subdivision of the search region.

    Returns :class:`Empty` (with a replay-verified certificate) when every
    cell is excluded, :class:`Unknown` when cells survive to ``max_depth`` or
    the cell budget runs out, and :class:`NonemptyCandidate` only when
    ``candidate_depth > 0`` and a surviving cell centre verifies as an
    embedding to that depth.
    """
    precision = default_precision() if precision is None else precision
    region = initial_region(X, Y, orientation)
    pruner = Pruner(X, Y, witness_depth, precision)
    leaves: list[dict] = []
    frontier = sorted(region.roots)
    processed = 0
    per_depth: list[dict] = []
    survivors: list[Cell] = []
    exhausted = False
    pool = None
    if jobs > 1:
        pool = ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=((X, Y, witness_depth, precision),))
    try:
        level = 0
        while frontier:
            level = frontier[0][0]
            if processed + len(frontier) > budget:
                exhausted = True
                survivors = frontier
                break
            processed += len(frontier)
            testable = [c for c in frontier if not region.excludes(c) and not _touches_zero(c)]
            if cover_depth is None:
                results = _run_prune(pruner, pool, testable, jobs)
            else:
                results = [pruner.prune(c, cover_depth) for c in testable]
            verdict = dict(zip(testable, results))
            nxt: list[Cell] = []
            live_area = Fraction(0)
            n_live = 0
            for c in frontier:
                if region.excludes(c):
                    leaves.append({"cell": list(c), "kind": "outside"})
                    continue
                r = verdict.get(c, LIVE)
                if isinstance(r, Pruned):
                    leaves.append({"cell": list(c), "kind": "witness", "word": word_str(r.word), "cover_depth": r.cover_depth})
                    continue
                n_live += 1
                live_area += cell_area(c)
                if level >= max_depth:
                    survivors.append(c)
                else:
                    nxt.extend(children(c))
            per_depth.append({"depth": level, "cells": len(frontier), "live": n_live, "surviving_area": live_area})
            frontier = sorted(nxt)
    finally:
        if pool is not None:
            pool.shutdown()

    stats = {"processed": processed, "per_depth": per_depth, "budget_exhausted": exhausted, "witness_depth": pruner.witness_depth}
    if not survivors and not exhausted:
        header = {
            "format": "selfsim-certificate/1",
            "tool_version": __version__,
            "instance": {"X": X.to_config(), "Y": Y.to_config(), "digest": instance_digest(X, Y)},
            "region": region.to_json(),
            "orientation": orientation,
            "justification": list(JUSTIFICATION),
            "budgets": {"max_depth": max_depth, "witness_depth": witness_depth, "cover_depth": cover_depth, "budget": budget},
            "precision": precision,
        }
        leaves.sort(key=lambda d: tuple(d["cell"]))
        cert = Certificate(header, leaves)
        if not verify_certificate(cert, X, Y):
            raise RuntimeError("internal error: certificate failed replay")
        return Empty(cert, stats)
    area = sum((cell_area(c) for c in survivors), Fraction(0))
    if candidate_depth > 0:
        for c in survivors:
            a0, a1, b0, b1 = cell_bounds(c)
            f = AffineMap1D((a0 + a1) / 2, (b0 + b1) / 2)
            if verify_embedding(X, Y, f, candidate_depth).status == "verified":
                return NonemptyCandidate(f, candidate_depth, survivors, stats)
    return Unknown(survivors, area, region, Y, stats, pruned=leaves)


def _run_prune(pruner: Pruner, pool, cells: list[Cell], jobs: int):
    if pool is None or len(cells) < 64:
        return [pruner.prune(c) for c in cells]
    size = math.ceil(len(cells) / (4 * jobs))
    batches = [cells[k : k + size] for k in range(0, len(cells), size)]
    out = []
    for res in pool.map(_prune_batch, batches):
        out.extend(res)
    return out


# ---------------------------------------------------------------------------
# Independent replay
# ---------------------------------------------------------------------------

def verify_certificate(cert: Certificate, X: IFSystem, Y: IFSystem, precision: int | None = None, diagnostics: list | None = None) -> bool:
    """Replay a certificate from scratch.

    Re-derives the region, checks that the leaves tile the root cells
    exactly, and re-checks every leaf: "outside" leaves must miss the region,
    "witness" leaves are re-evaluated with fresh enclosures at ``precision``
    (default: the recorded precision) against exact cylinder endpoints.
    """
    diag = diagnostics if diagnostics is not None else []
    try:
        h = cert.header
        if h.get("instance", {}).get("digest") != instance_digest(X, Y):
            diag.append("instance digest mismatch")
            return False
        region = initial_region(X, Y, h.get("orientation", "both"))
        if region.to_json() != h["region"]:
            diag.append("region mismatch")
            return False
        prec = int(h["precision"]) if precision is None else int(precision)
        leaves: dict[Cell, dict] = {}
        for leaf in cert.leaves:
            c = tuple(int(v) for v in leaf["cell"])
            if len(c) != 3 or c in leaves:
                diag.append(f"malformed or duplicate leaf {leaf['cell']}")
                return False
            leaves[c] = leaf
        if not _tiles(region.roots, leaves, diag):
            return False
        for c, leaf in leaves.items():
            kind = leaf.get("kind")
            if kind == "outside":
                if not region.excludes(c):
                    diag.append(f"leaf {c} marked outside but meets the region")
                    return False
            elif kind == "witness":
                w = word(leaf["word"])
                n = int(leaf["cover_depth"])
                if _touches_zero(c) or not _replay_witness(X, Y, c, w, n, prec):
                    diag.append(f"witness {leaf['word']!r} fails on leaf {c}")
                    return False
            else:
                diag.append(f"unknown leaf kind {kind!r}")
                return False
        return True
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        diag.append(f"malformed certificate: {exc}")
        return False


def _tiles(roots: Iterable[Cell], leaves: dict[Cell, dict], diag: list) -> bool:
    max_level = max((c[0] for c in leaves), default=0)
    seen = set()
    stack = list(roots)
    while stack:
        c = stack.pop()
        if c in leaves:
            seen.add(c)
            continue
        if c[0] >= max_level:
            diag.append(f"cell {c} is not covered by any leaf")
            return False
        stack.extend(children(c))
    if len(seen) != len(leaves):
        diag.append("leaves outside the root tiling or overlapping")
        return False
    return True


def _replay_witness(X: IFSystem, Y: IFSystem, cell: Cell, w: Word, n: int, prec: int) -> bool:
    # deliberately recomputed without the Pruner machinery
    L, i, j = cell
    scale = Fraction(1, 2**L)
    f = compose_word(X, w)
    s = f.translation
    a = Enclosure(i * scale, (i + 1) * scale, prec)
    b = Enclosure(j * scale, (j + 1) * scale, prec)
    img = a * Enclosure(s, s, prec) + b
    lo, hi = img.lo_rational(), img.hi_rational()
    if lo is None or hi is None:
        return False
    H0, H1 = Y.hull
    todo = [AffineMap1D(1, 0)]
    for _ in range(n):
        nxt = []
        for g in todo:
            for m in Y.maps:
                gm = g.compose(m)
                u, v = gm.image(H0, H1)
                if not (v < lo or u > hi):
                    nxt.append(gm)
        todo = nxt
        if not todo:
            return True
    return False


# ---------------------------------------------------------------------------
# Embedding search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingStatus:
    status: str  # "verified" | "refuted" | "undecided"
    depth: int
    witness: Fraction | None = None  # point x of X with f(x) outside Y
    image: Fraction | None = None
    exclusion_depth: int | None = None


def verify_embedding(X: IFSystem, Y: IFSystem, f: AffineMap1D, depth: int) -> EmbeddingStatus:
    """Finite-depth test of ``f(X) inside Y``.

    Verified: each depth-``depth`` cylinder hull of X maps inside the
    depth-``d'`` cover of Y, ``d'`` the least depth whose Y-cylinders are no
    larger than the image cylinders.  Refuted: an endpoint of some image
    cylinder (a point of ``f(X)``) lies outside a cylinder cover of Y.
    """
    H0, H1 = X.hull
    target = abs(f.ratio) * X.min_norm**depth
    dY, size = 0, Fraction(1) * (Y.hull[1] - Y.hull[0])
    while size > target and dY < 200:
        dY += 1
        size = Y.max_norm**dY * (Y.hull[1] - Y.hull[0])
    if all(_inside_one_cylinder(Y, dY, *f.compose(g).image(H0, H1)) for _, g in cylinder_maps(X, depth)):
        return EmbeddingStatus("verified", depth)
    # look for a refuting point, coarse cylinders first so the witness is as
    # simple as possible; every cylinder endpoint is an endpoint of a child
    checked: set = set()
    for k in range(depth + 1):
        for _, g in cylinder_maps(X, k):
            for x in (g(H0), g(H1)):
                if x in checked:
                    continue
                checked.add(x)
                fx = f(x)
                if not cover_meets(Y, dY, fx, fx):
                    return EmbeddingStatus("refuted", depth, x, fx, point_exclusion_depth(Y, fx, dY))
    return EmbeddingStatus("undecided", depth)


def _inside_one_cylinder(Y: IFSystem, depth: int, lo, hi) -> bool:
    H0, H1 = Y.hull
    r, t = Fraction(1), Fraction(0)
    for _ in range(depth):
        for m in Y.maps:
            r2, t2 = r * m.ratio, r * m.translation + t
            u, v = r2 * H0 + t2, r2 * H1 + t2
            if u > v:
                u, v = v, u
            if u <= lo and hi <= v:
                r, t = r2, t2
                break
        else:
            return False
    return True


def search_embeddings(
    X: IFSystem,
    Y: IFSystem,
    candidate_depth: int = 2,
    verify_depth: int = 6,
    extra: Sequence[AffineMap1D] = (),
) -> list[tuple[AffineMap1D, EmbeddingStatus]]:
    """Candidates ``psi_jj o s o phi_ii^-1`` (``s`` the identity or ``x -> 1 - x``) plus ``extra`` maps, each tested by :func:`verify_embedding`."""
    H0, H1 = Y.hull
    reflections = [AffineMap1D(1, 0), AffineMap1D(-1, 1)]
    seen: dict[tuple, AffineMap1D] = {}
    for dj in range(candidate_depth + 1):
        for _, psi in cylinder_maps(Y, dj):
            for s in reflections:
                for di in range(candidate_depth + 1):
                    for _, phi in cylinder_maps(X, di):
                        f = psi.compose(s).compose(phi.inverse())
                        if abs(f.ratio) > 1:
                            continue
                        u, v = f.image(*X.hull)
                        if u < H0 or v > H1:
                            continue
                        seen.setdefault((f.ratio, f.translation), f)
    for f in extra:
        seen.setdefault((f.ratio, f.translation), f)
    keys = sorted(seen)
    return [(seen[k], verify_embedding(X, Y, seen[k], verify_depth)) for k in keys]
