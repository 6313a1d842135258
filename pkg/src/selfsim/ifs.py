"""Self-similar sets on the line generated by finitely many affine contractions.

Words are tuples of 1-based map indices, so ``(1, 2)`` is the composition
``phi_1 o phi_2``.  Strings like ``"12"`` are accepted wherever a word is.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .numerics import Enclosure, as_rational, parse_number, serialize_number

Word = tuple[int, ...]
Interval = tuple[Fraction, Fraction]


def word(w) -> Word:
    """Normalize ``w`` to a tuple of 1-based ints.

    Strings are read one digit per symbol, unless they contain dots
    (``"10.2.3"``), which separate multi-digit symbols.
    """
    if isinstance(w, str):
        if not w:
            return ()
        if "." in w:
            return tuple(int(s) for s in w.split("."))
        return tuple(int(s) for s in w)
    return tuple(int(s) for s in w)


def word_str(w: Sequence[int]) -> str:
    if any(s > 9 for s in w):
        return ".".join(str(s) for s in w)
    return "".join(str(s) for s in w)


@dataclass(frozen=True)
class AffineMap1D:
    """``x -> ratio * x + translation``."""

    ratio: Fraction | Enclosure
    translation: Fraction | Enclosure = Fraction(0)

    def __post_init__(self):
        r, t = self.ratio, self.translation
        if not isinstance(r, Enclosure):
            r = as_rational(r)
            if r == 0:
                raise ValueError("affine map with zero ratio is singular")
        elif r.lo <= 0 <= r.hi:
            raise ValueError("ratio enclosure must exclude 0")
        if not isinstance(t, Enclosure):
            t = as_rational(t)
        object.__setattr__(self, "ratio", r)
        object.__setattr__(self, "translation", t)

    def __str__(self):
        return f"x -> {self.ratio} x + {self.translation}"

    @property
    def norm(self):
        return abs(self.ratio)

    @property
    def exact(self) -> bool:
        return not isinstance(self.ratio, Enclosure) and not isinstance(self.translation, Enclosure)

    def __call__(self, x):
        return self.ratio * x + self.translation

    def compose(self, other: "AffineMap1D") -> "AffineMap1D":
        """``self o other``."""
        return AffineMap1D(self.ratio * other.ratio, self.ratio * other.translation + self.translation)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "AffineMap1D":
        return AffineMap1D(1 / self.ratio, -self.translation / self.ratio)

    def fixed_point(self):
        return self.translation / (1 - self.ratio)

    def image(self, lo, hi) -> Interval:
        u, v = self(lo), self(hi)
        return (u, v) if u <= v else (v, u)

    def to_config(self) -> dict:
        return {"ratio": serialize_number(self.ratio), "translation": serialize_number(self.translation)}

    @classmethod
    def from_config(cls, d: dict, prec: int | None = None) -> "AffineMap1D":
        return cls(parse_number(d["ratio"], prec), parse_number(d.get("translation", "0"), prec))


IDENTITY = AffineMap1D(Fraction(1), Fraction(0))


class Separation(enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SeparationResult:
    status: Separation
    depth: int | None = None
    witness: Fraction | None = None

    def __eq__(self, other):
        if isinstance(other, Separation):
            return self.status is other
        if isinstance(other, str):
            return self.status.value == other
        return super().__eq__(other)

    __hash__ = object.__hash__


@dataclass(frozen=True)
class IFSystem:
    """A finite family of contracting affine maps of the line."""

    maps: tuple[AffineMap1D, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        maps = tuple(m if isinstance(m, AffineMap1D) else AffineMap1D(*m) for m in self.maps)
        if len(maps) < 2:
            raise ValueError("an IFS needs at least two maps")
        for m in maps:
            r = m.norm
            if isinstance(r, Enclosure):
                if not r.hi < 1:
                    raise ValueError("maps must be contractions")
            elif not r < 1:
                raise ValueError("maps must be contractions")
        object.__setattr__(self, "maps", maps)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple], name: str = "") -> "IFSystem":
        return cls(tuple(AffineMap1D(as_rational(r), as_rational(t)) for r, t in pairs), name)

    @property
    def exact(self) -> bool:
        return all(m.exact for m in self.maps)

    @property
    def ratios(self) -> tuple:
        return tuple(m.ratio for m in self.maps)

    @property
    def size(self) -> int:
        return len(self.maps)

    def __len__(self):
        return len(self.maps)

    def __getitem__(self, i: int) -> AffineMap1D:
        """1-based access, matching word symbols."""
        return self.maps[i - 1]

    @property
    def orientation_preserving(self) -> bool:
        return all(_sign(m.ratio) > 0 for m in self.maps)

    @property
    def homogeneous(self) -> bool:
        return len({m.ratio for m in self.maps}) == 1

    @cached_property
    def hull(self) -> Interval:
        return attractor_hull(self)

    @cached_property
    def rho(self) -> Fraction:
        return compute_rho(self)

    @cached_property
    def separated(self) -> SeparationResult:
        return check_strong_separation(self, 8)

    @property
    def max_norm(self):
        return max(m.norm for m in self.maps)

    @property
    def min_norm(self):
        return min(m.norm for m in self.maps)

    def similarity_dimension(self, tol: float = 1e-13) -> float:
        """Root ``s`` of ``sum |r_i|^s = 1`` (bisection, floating point)."""
        rs = [float(abs(m.ratio)) if m.exact else m.norm.mid for m in self.maps]
        lo, hi = 0.0, 1.0
        while sum(r**hi for r in rs) > 1:
            hi *= 2
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if sum(r**mid for r in rs) > 1:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def to_config(self) -> dict:
        return {"maps": [m.to_config() for m in self.maps]}

    @classmethod
    def from_config(cls, d: dict, prec: int | None = None) -> "IFSystem":
        return cls(tuple(AffineMap1D.from_config(m, prec) for m in d["maps"]), d.get("name", ""))

    def canonical_json(self) -> str:
        return json.dumps(self.to_config(), sort_keys=True, separators=(",", ":"))

    def words(self, length: int) -> Iterable[Word]:
        return itertools.product(range(1, len(self.maps) + 1), repeat=length)


def _sign(x) -> int:
    if isinstance(x, Enclosure):
        if x.lo > 0:
            return 1
        if x.hi < 0:
            return -1
        return 0
    return (x > 0) - (x < 0)


def _require_exact(ifs: IFSystem, what: str):
    if not ifs.exact:
        raise TypeError(f"{what} requires rational coefficients")


def toml_loads(text: str) -> dict:
    try:
        import tomllib
    except ImportError:  # Python < 3.11
        import tomli as tomllib
    return tomllib.loads(text)


def load_ifs(path: str | Path) -> IFSystem:
    """Read an IFS config (JSON or TOML) of the form ``{"maps": [{"ratio": "1/3", "translation": "0"}, ...]}``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        data = toml_loads(text)
    else:
        data = json.loads(text)
    return IFSystem.from_config(data)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def compose_word(ifs: IFSystem, w) -> AffineMap1D:
    """``phi_{w_1} o ... o phi_{w_n}``; the empty word gives the identity."""
    w = word(w)
    n = len(ifs.maps)
    ratio, trans = Fraction(1), Fraction(0)
    # fold from the right: phi_u o (x -> r x + t) = (a r, a t + b)
    for s in reversed(w):
        if not 1 <= s <= n:
            raise IndexError(f"symbol {s} out of range for a {n}-map system")
        m = ifs.maps[s - 1]
        ratio, trans = m.ratio * ratio, m.ratio * trans + m.translation
    return AffineMap1D(ratio, trans)


def count_vector(w, size: int) -> tuple[int, ...]:
    """Number of occurrences of each symbol ``1..size`` in ``w``."""
    w = word(w)
    return tuple(w.count(i) for i in range(1, size + 1))


def attractor_hull(ifs: IFSystem) -> Interval:
    """Convex hull of the attractor.

    For orientation-preserving systems this is the span of the fixed points.
    With reversing maps, the extreme points of the attractor are fixed points
    of some ``phi_i`` or ``phi_i o phi_j``, or images ``phi_i(fix phi_j)``; all
    such candidates lie in the attractor, so their span is exact.
    """
    _require_exact(ifs, "attractor_hull")
    fps = [m.fixed_point() for m in ifs.maps]
    if ifs.orientation_preserving:
        return (min(fps), max(fps))
    cands = list(fps)
    for m in ifs.maps:
        for fp in fps:
            cands.append(m(fp))
        for m2 in ifs.maps:
            cands.append(m.compose(m2).fixed_point())
    return (min(cands), max(cands))


def normalize(ifs: IFSystem) -> IFSystem:
    """Conjugate by the increasing affine change of coordinates taking the hull to [0, 1]."""
    lo, hi = ifs.hull
    if lo == hi:
        raise ValueError("trivial self-similar set: all maps share a fixed point")
    if lo == 0 and hi == 1:
        return ifs
    span = hi - lo
    maps = tuple(AffineMap1D(m.ratio, (m.ratio * lo + m.translation - lo) / span) for m in ifs.maps)
    return IFSystem(maps, ifs.name)


def _cylinder_params(ifs: IFSystem, depth: int, prefix=()) -> list[tuple[Word, Fraction, Fraction]]:
    f = compose_word(ifs, prefix)
    items = [(word(prefix), f.ratio, f.translation)]
    for _ in range(depth):
        items = [
            (w + (i,), r * m.ratio, r * m.translation + t)
            for w, r, t in items
            for i, m in enumerate(ifs.maps, 1)
        ]
    return items


def cylinder_maps(ifs: IFSystem, depth: int) -> list[tuple[Word, AffineMap1D]]:
    """All ``(w, phi_w)`` with ``|w| = depth`` in lexicographic word order."""
    _require_exact(ifs, "cylinder_maps")
    return [(w, AffineMap1D(r, t)) for w, r, t in _cylinder_params(ifs, depth)]


def _hull_image(r, t, lo, hi) -> Interval:
    u, v = r * lo + t, r * hi + t
    return (u, v) if u <= v else (v, u)


def cylinder_cover(ifs: IFSystem, depth: int) -> list[Interval]:
    """The intervals ``phi_w(hull)`` for all words of length ``depth``, in lexicographic word order."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    _require_exact(ifs, "cylinder_cover")
    lo, hi = ifs.hull
    return [_hull_image(r, t, lo, hi) for _, r, t in _cylinder_params(ifs, depth)]


def check_strong_separation(ifs: IFSystem, max_depth: int) -> SeparationResult:
    """Certify or refute that the first-level pieces ``phi_i(X)`` are pairwise disjoint.

    Certified when, at some depth ``m <= max_depth``, the depth-``m`` cylinder
    hulls lying in different first-level pieces are pairwise disjoint.
    Refuted when two first-level pieces share an exactly computed attractor
    point (an image of a hull endpoint under a cylinder map).
    """
    _require_exact(ifs, "check_strong_separation")
    lo, hi = ifs.hull
    if lo == hi:
        return SeparationResult(Separation.REFUTED, 0, lo)
    groups = [_cylinder_params(ifs, 0, (i,)) for i in range(1, len(ifs.maps) + 1)]
    for depth in range(1, max_depth + 1):
        hulls = [[_hull_image(r, t, lo, hi) for _, r, t in g] for g in groups]
        if _groups_disjoint(hulls):
            return SeparationResult(Separation.CERTIFIED, depth)
        seen: dict[Fraction, int] = {}
        for gi, g in enumerate(hulls):
            for a, b in g:
                for p in (a, b):
                    if seen.setdefault(p, gi) != gi:
                        return SeparationResult(Separation.REFUTED, depth, p)
        if depth < max_depth:
            groups = [
                [(w + (i,), r * m.ratio, r * m.translation + t) for w, r, t in g for i, m in enumerate(ifs.maps, 1)]
                for g in groups
            ]
    return SeparationResult(Separation.UNKNOWN, max_depth)


def _groups_disjoint(groups: list[list[Interval]]) -> bool:
    tagged = sorted((a, b, g) for g, group in enumerate(groups) for a, b in group)
    reach: dict[int, Fraction] = {}
    for a, b, g in tagged:
        if any(h != g and r >= a for h, r in reach.items()):
            return False
        reach[g] = max(reach.get(g, b), b)
    return True


def first_level_gap(ifs: IFSystem) -> Fraction:
    """Minimum distance between distinct first-level hulls (0 if two of them meet)."""
    lo, hi = ifs.hull
    pieces = sorted(m.image(lo, hi) for m in ifs.maps)
    return min(b2[0] - b1[1] for b1, b2 in zip(pieces, pieces[1:])) if len(pieces) > 1 else Fraction(0)


def compute_rho(Y: IFSystem) -> Fraction:
    """Engulfing constant ``1/g`` for the normalized first-level gap ``g``.

    Any ``Z`` meeting ``Y`` is contained in a cylinder ``psi_jj(Y)`` with
    ``diam psi_jj(Y) <= rho * diam Z``; equality requires ``Z`` to contain
    both endpoints of a gap, so the bound is strict for all other ``Z``.
    """
    _require_exact(Y, "compute_rho")
    lo, hi = Y.hull
    if lo == hi:
        raise ValueError("trivial self-similar set")
    g = first_level_gap(Y) / (hi - lo)
    if g <= 0:
        raise ValueError("first-level pieces touch or overlap: not strongly separated")
    return 1 / g


def engulf(Y: IFSystem, Z: Interval, max_depth: int = 64) -> Word:
    """Longest word ``jj`` with ``Z`` inside ``psi_jj(hull Y)``.

    Descends greedily into the unique child hull containing ``Z``.  For a
    degenerate ``Z`` (a single point) the descent stops at ``max_depth``.
    """
    _require_exact(Y, "engulf")
    zlo, zhi = as_rational(Z[0]), as_rational(Z[1])
    lo, hi = Y.hull
    if not (lo <= zlo <= zhi <= hi):
        raise ValueError("Z is not contained in hull(Y)")
    w: list[int] = []
    r, t = Fraction(1), Fraction(0)
    while len(w) < max_depth:
        for i, m in enumerate(Y.maps, 1):
            r2, t2 = r * m.ratio, r * m.translation + t
            a, b = _hull_image(r2, t2, lo, hi)
            if a <= zlo and zhi <= b:
                w.append(i)
                r, t = r2, t2
                break
        else:
            break
    return tuple(w)


def cylinder_hull(ifs: IFSystem, w) -> Interval:
    f = compose_word(ifs, w)
    return f.image(*ifs.hull)


def middle_thirds() -> IFSystem:
    return IFSystem.from_pairs([("1/3", 0), ("1/3", "2/3")], "middle-thirds")


def homogeneous_pair(ratio) -> IFSystem:
    """``{r x, r x + 1 - r}``: two maps of ratio ``r`` normalized to hull [0, 1]."""
    r = as_rational(ratio)
    return IFSystem.from_pairs([(r, 0), (r, 1 - r)], f"pair-{r}")
