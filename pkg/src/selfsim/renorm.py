"""Renormalization of parameter cells: ``f -> psi_jj^-1 o f o phi_ii``.

For a dyadic parameter cell D of level n the step chooses an exponent k
from the sup-norm surrogate ``chi``, a word ``ii`` of length k in X, the
hull Z of the images of ``phi_ii(hull X)``, and the shortest Y-word ``jj``
whose cylinder engulfs Z with ``||psi_jj|| < 3 rho 2^-n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .embedding import ParamCell, verify_embedding
from .ifs import AffineMap1D, IFSystem, Word, compose_word, compute_rho, word, word_str
from .measures import AtomicMeasure
from .numerics import Enclosure, enc_exp, enc_sqrt, format_rational
from .orbits import LambdaSet, lambda_of


def dyadic_cell(a, b, n: int) -> ParamCell:
    """The closed level-``n`` dyadic cell of the half-open partition containing ``(a, b)``."""
    h = Fraction(1, 2**n)
    i, j = math.floor(Fraction(a) / h), math.floor(Fraction(b) / h)
    return ParamCell(i * h, (i + 1) * h, j * h, (j + 1) * h)


def _sup_abs_a(cell: ParamCell) -> Fraction:
    return max(abs(cell.a0), abs(cell.a1))


def chi_upper(cell: ParamCell, survivors: Sequence[ParamCell] | None = None) -> Fraction:
    """Upper bound for ``sup ||f||`` over embeddings in the cell, clamped to 1."""
    if not cell.precompact:
        raise ValueError("cell is not pre-compact")
    if survivors is None:
        return min(_sup_abs_a(cell), Fraction(1))
    best = None
    for s in survivors:
        a0, a1 = max(cell.a0, s.a0), min(cell.a1, s.a1)
        b0, b1 = max(cell.b0, s.b0), min(cell.b1, s.b1)
        if a0 <= a1 and b0 <= b1:
            v = max(abs(a0), abs(a1))
            best = v if best is None else max(best, v)
    if best is None:
        raise ValueError("empty intersection")
    return min(best, Fraction(1))


def choose_k(alpha, n: int, chi) -> int:
    """The unique ``k >= 0`` with ``alpha 2^-n / chi <= alpha^k < 2^-n / chi``."""
    if isinstance(alpha, Enclosure):
        return _choose_k_enclosure(alpha, n, chi)
    alpha, chi = Fraction(alpha), Fraction(chi)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    t = Fraction(1, 2**n) / chi
    if t > 1:
        raise ValueError("precondition 2^-n / chi <= 1 violated")
    k, p = 0, Fraction(1)
    while p >= t:
        k, p = k + 1, p * alpha
    assert alpha * t <= p < t
    return k


def _choose_k_enclosure(alpha: Enclosure, n: int, chi) -> int:
    t = Enclosure(Fraction(1, 2**n), prec=alpha.prec) / Enclosure(Fraction(chi), prec=alpha.prec)
    if t.lo > 1:
        raise ValueError("precondition 2^-n / chi <= 1 violated")
    k, p = 0, Enclosure(1, prec=alpha.prec)
    while True:
        if p.hi < t.lo:
            return k
        if p.lo < t.hi:
            raise ValueError("alpha^k straddles the threshold; raise the precision")
        k, p = k + 1, p * alpha


@dataclass(frozen=True)
class ZHull:
    lo: Fraction
    hi: Fraction
    bound: Fraction  # 3 * 2^-n
    exploratory: bool  # hull escaped hull(Y) and was clipped

    @property
    def diam(self) -> Fraction:
        return self.hi - self.lo

    @property
    def degradation(self) -> Fraction:
        return self.diam / self.bound


def z_hull(cell: ParamCell, ii, X: IFSystem, n: int | None = None, Y: IFSystem | None = None) -> ZHull:
    """Hull of ``{a t + b : (a, b) in cell, t in phi_ii(hull X)}``, computed exactly."""
    t0, t1 = compose_word(X, word(ii)).image(*X.hull)
    prods = [a * t for a in (cell.a0, cell.a1) for t in (t0, t1)]
    lo, hi = min(prods) + cell.b0, max(prods) + cell.b1
    bound = 3 * Fraction(1, 2**n) if n is not None else Fraction(0)
    exploratory = False
    if Y is not None:
        y0, y1 = Y.hull
        if lo < y0 or hi > y1:
            exploratory = True
            lo, hi = max(lo, y0), min(hi, y1)
            if lo > hi:
                raise ValueError("Z misses hull(Y)")
    return ZHull(lo, hi, bound, exploratory)


@dataclass(frozen=True)
class JJChoice:
    word: Word
    norm: Fraction
    threshold: Fraction  # 3 rho 2^-n
    scale: Fraction  # ||psi_jj|| * 2^n, bounded in [beta_min * 3 rho, 3 rho)


def choose_jj(Y: IFSystem, Z, n: int, rho: Fraction | None = None, max_depth: int = 200) -> JJChoice:
    """Shortest ``jj`` with ``||psi_jj|| < 3 rho 2^-n`` and ``Z`` inside ``psi_jj(hull Y)``."""
    rho = compute_rho(Y) if rho is None else Fraction(rho)
    lo, hi = (Z.lo, Z.hi) if isinstance(Z, ZHull) else Z
    y0, y1 = Y.hull
    if lo < y0 or hi > y1:
        raise ValueError("Z is not inside hull(Y)")
    thr = 3 * rho / 2**n
    jj: tuple[int, ...] = ()
    g = AffineMap1D(1, 0)
    while g.norm >= thr:
        if len(jj) >= max_depth:
            raise ValueError("no engulfing word within the depth cap")
        for idx, m in enumerate(Y.maps, 1):
            h = g.compose(m)
            u, v = h.image(y0, y1)
            if u <= lo and hi <= v:
                jj, g = jj + (idx,), h
                break
        else:
            raise ValueError(f"no cylinder of norm < {thr} contains Z = [{lo}, {hi}]")
    return JJChoice(jj, g.norm, thr, g.norm * 2**n)


@dataclass(frozen=True)
class RenormStep:
    """``(a, b) -> (A a, (a sigma + b - tau) / beta)`` with ``A = alpha_ii / beta_jj``."""

    cell: ParamCell
    n: int
    k: int
    ii: Word
    jj: Word
    alpha_ii: Fraction
    sigma_ii: Fraction
    beta_jj: Fraction
    tau_jj: Fraction
    exploratory: bool = False

    @property
    def norm_ratio(self) -> Fraction:
        return abs(self.alpha_ii / self.beta_jj)

    def __call__(self, a, b) -> tuple[Fraction, Fraction]:
        a, b = Fraction(a), Fraction(b)
        return self.alpha_ii / self.beta_jj * a, (a * self.sigma_ii + b - self.tau_jj) / self.beta_jj

    def apply(self, f: AffineMap1D) -> AffineMap1D:
        return AffineMap1D(*self(f.ratio, f.translation))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "ii": word_str(self.ii),
            "jj": word_str(self.jj),
            "norm_ratio": format_rational(self.norm_ratio),
            "exploratory": self.exploratory,
        }


def renorm_map(cell: ParamCell, ii, jj, X: IFSystem, Y: IFSystem, n: int = 0, k: int | None = None, exploratory: bool = False) -> RenormStep:
    ii, jj = word(ii), word(jj)
    if k is not None and len(ii) != k:
        raise ValueError("|ii| must equal k")
    phi, psi = compose_word(X, ii), compose_word(Y, jj)
    return RenormStep(cell, n, len(ii), ii, jj, phi.ratio, phi.translation, psi.ratio, psi.translation, exploratory)


def renormalize(cell: ParamCell, n: int, ii_source, X: IFSystem, Y: IFSystem, survivors=None, rho=None) -> RenormStep:
    """Steps k, ii, Z, jj for a level-``n`` cell.

    ``ii_source`` is an explicit word or a callable ``k -> word``.
    X must be homogeneous.
    """
    if not X.homogeneous:
        raise ValueError("X must be homogeneous")
    alpha = X.max_norm
    chi = chi_upper(cell, survivors)
    k = choose_k(alpha, n, chi)
    ii = word(ii_source(k)) if callable(ii_source) else word(ii_source)[:k]
    if len(ii) != k:
        raise ValueError(f"word for ii has length {len(ii)}, need {k}")
    Z = z_hull(cell, ii, X, n, Y)
    jj = choose_jj(Y, Z, n, rho).word
    return renorm_map(cell, ii, jj, X, Y, n, k, Z.exploratory)


@dataclass(frozen=True)
class E0Floor:
    value: Enclosure  # alpha / (3 rho sqrt(e))
    adjusted: Enclosure | None = None  # slack * alpha / (3 rho)
    slack: Fraction | None = None


def e0_floor(alpha, rho, slack=None, prec: int | None = None) -> E0Floor:
    """``alpha / (3 rho sqrt(e))``; with ``slack = inf|a| / chi`` also ``slack alpha / (3 rho)``."""
    alpha, rho = Fraction(alpha), Fraction(rho)
    if not (0 < alpha < 1 and rho > 1):
        raise ValueError("need 0 < alpha < 1 and rho > 1")
    base = Enclosure(alpha / (3 * rho), prec=prec)
    value = base / enc_sqrt(enc_exp(Enclosure(1, prec=prec)))
    if slack is None:
        return E0Floor(value)
    slack = Fraction(slack)
    return E0Floor(value, base * slack, slack)


def cell_slack(cell: ParamCell) -> Fraction:
    """``inf |a| / sup |a|`` over the cell."""
    lo = min(abs(cell.a0), abs(cell.a1))
    return lo / _sup_abs_a(cell)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def repeat_word(w) -> Callable[[int], Word]:
    w = word(w)
    return lambda k: tuple(w[i % len(w)] for i in range(k))


@dataclass
class ThetaStep:
    n: int
    step: RenormStep
    Mf: AffineMap1D
    theta: Fraction | Enclosure
    increment: Fraction | Enclosure | None = None
    new_symbols: Word = ()


@dataclass
class ThetaReport:
    steps: list[ThetaStep]
    lam: LambdaSet
    start_level: int
    L_bound: int
    L_measured: int
    K_measured: int | None
    extends: bool
    increments_ok: bool
    checks: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["n,k,len_jj,theta_mod1,log_ratio,norm_Mf"]
        for s in self.steps:
            lines.append(f"{s.n},{s.step.k},{len(s.step.jj)},{_fmt(_mod1(s.theta))},{_fmt(s.theta)},{format_rational(s.Mf.norm)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "start_level": self.start_level,
            "levels": [s.n for s in self.steps],
            "jj_extends": self.extends,
            "increments_in_lambda_sums": self.increments_ok,
            "L_bound": self.L_bound,
            "L_measured": self.L_measured,
            "K_measured": self.K_measured,
            "checks": self.checks,
            "steps": [s.step.to_json() | {"Mf": [format_rational(s.Mf.ratio), format_rational(s.Mf.translation)]} for s in self.steps],
        }


def _mod1(t):
    return t - math.floor(t if isinstance(t, Fraction) else t.mid)


def _fmt(t) -> str:
    return format_rational(t) if isinstance(t, Fraction) else repr(t.mid)


def _theta(norm: Fraction, alpha: Fraction, prec):
    lam = lambda_of(alpha, [norm], prec) if norm < 1 else None
    if norm == 1:
        return Fraction(0)
    return lam[0]


def _int_mod(d) -> bool:
    """Is ``d`` an integer (exactly, or possibly for enclosures)?"""
    if isinstance(d, Enclosure):
        return math.ceil(d.lo_rational()) <= math.floor(d.hi_rational())
    return d.denominator == 1


def theta_sequence(
    f: AffineMap1D,
    ii_source,
    N: int,
    X: IFSystem,
    Y: IFSystem,
    start: int = 1,
    verify_depth: int = 0,
    prec: int | None = None,
) -> ThetaReport:
    """Renormalize ``f`` at levels ``start..N`` and track ``theta_n = log||M f|| / log alpha``.

    Checks that ``jj_{n+1}`` extends ``jj_n`` and that each increment equals
    ``-sum lambda_v`` (mod 1) over the new symbols ``v`` of ``jj_{n+1}``.
    The start level is raised until the cell is pre-compact and
    ``2^-n <= chi``.
    """
    if not X.homogeneous:
        raise ValueError("X must be homogeneous")
    alpha = X.max_norm
    rho = compute_rho(Y)
    lam = lambda_of(alpha, [m.norm for m in Y.maps], prec)
    n0 = start
    while True:
        cell = dyadic_cell(f.ratio, f.translation, n0)
        if cell.precompact and Fraction(1, 2**n0) <= chi_upper(cell):
            break
        n0 += 1
    bmin, bmax = Y.min_norm, Y.max_norm
    L_bound = math.ceil(math.log(float(bmin) / 2) / math.log(float(bmax)))
    steps: list[ThetaStep] = []
    extends = inc_ok = True
    checks = {"functional_identity": True, "norm_identity": True, "verified": None}
    for n in range(n0, N + 1):
        cell = dyadic_cell(f.ratio, f.translation, n)
        st = renormalize(cell, n, ii_source, X, Y, rho=rho)
        Mf = st.apply(f)
        phi, psi = compose_word(X, st.ii), compose_word(Y, st.jj)
        for x in (Fraction(0), Fraction(1)):
            if Mf(x) != psi.inverse()(f(phi(x))):
                checks["functional_identity"] = False
        if Mf.norm * psi.norm != f.norm * phi.norm:
            checks["norm_identity"] = False
        if verify_depth:
            ok = verify_embedding(X, Y, Mf, verify_depth).status == "verified"
            checks["verified"] = ok if checks["verified"] in (None, True) else False
        ts = ThetaStep(n, st, Mf, _theta(Mf.norm, alpha, prec))
        if steps:
            prev = steps[-1]
            if st.jj[: len(prev.step.jj)] != prev.step.jj:
                extends = False
            else:
                ts.new_symbols = st.jj[len(prev.step.jj) :]
            ts.increment = ts.theta - prev.theta
            expected = sum((lam[v - 1] for v in ts.new_symbols), Fraction(0))
            if not _int_mod(ts.increment + expected):
                inc_ok = False
        steps.append(ts)
    L_meas = max((len(s.new_symbols) for s in steps[1:]), default=0)
    changing = [s.n for s in steps[1:] if not _zero_mod(s.increment)]
    K = max((b - a for a, b in zip(changing, changing[1:])), default=None)
    return ThetaReport(steps, lam, n0, L_bound, L_meas, K, extends, inc_ok, checks)


def _zero_mod(d) -> bool:
    if isinstance(d, Enclosure):
        return False
    return d.denominator == 1


# ---------------------------------------------------------------------------
# Decomposition and measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    h1: AffineMap1D
    h2: AffineMap1D
    corners_ok: bool
    h2_scale: Fraction  # 1 / (|beta_jj| 2^n)


def approx_decomposition(step: RenormStep) -> Decomposition:
    """Exact ``h1, h2`` with ``M(a, b) = (h1(a), h2(pi_sigma(H_D(a, b))))``.

    ``H_D(a, b) = 2^n (a - a0, b - b0)`` and ``pi_sigma(u, v) = sigma u + v``.
    """
    c, n = step.cell, step.n
    beta, sigma, tau = step.beta_jj, step.sigma_ii, step.tau_jj
    h1 = AffineMap1D(step.alpha_ii / beta, 0)
    h2 = AffineMap1D(Fraction(1, 2**n) / beta, (sigma * c.a0 + c.b0 - tau) / beta)
    ok = True
    for a in (c.a0, c.a1):
        for b in (c.b0, c.b1):
            u, v = (a - c.a0) * 2**n, (b - c.b0) * 2**n
            if (h1(a), h2(sigma * u + v)) != step(a, b):
                ok = False
    return Decomposition(h1, h2, ok, 1 / (abs(beta) * 2**n))


def renorm_measure(mu: AtomicMeasure, step: RenormStep) -> AtomicMeasure:
    """Pushforward of a measure on parameter space through the step."""
    if mu.d != 2:
        raise ValueError("need a measure on the (a, b) plane")
    for p, _ in mu.atoms:
        if not step.cell.contains(Fraction(p[0]), Fraction(p[1])):
            raise ValueError(f"atom {p} lies outside the cell")
    return mu.pushforward(lambda p: step(p[0], p[1]))
