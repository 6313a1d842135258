import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from selfsim.embedding import ParamCell
from selfsim.ifs import AffineMap1D, compose_word, homogeneous_pair, middle_thirds
from selfsim.measures import AtomicMeasure
from selfsim.renorm import (
    approx_decomposition,
    cell_slack,
    chi_upper,
    choose_jj,
    choose_k,
    dyadic_cell,
    e0_floor,
    renorm_map,
    renorm_measure,
    renormalize,
    repeat_word,
    theta_sequence,
    z_hull,
)
from selfsim.numerics import Enclosure


def test_chi_upper():
    cell = ParamCell(F(5, 16), F(6, 16), 0, F(1, 16))
    assert chi_upper(cell) == F(3, 8)
    assert chi_upper(cell, [ParamCell(F(5, 16), F(11, 32), 0, 1)]) == F(11, 32)
    assert chi_upper(ParamCell(F(1, 2), 1, 0, F(1, 2))) == 1
    with pytest.raises(ValueError, match="empty intersection"):
        chi_upper(cell, [ParamCell(F(1, 2), 1, 0, 1)])


def test_choose_k_examples():
    assert choose_k(F(1, 3), 4, F(3, 8)) == 2
    assert choose_k(F(1, 3), 5, F(1, 32)) == 1
    with pytest.raises(ValueError):
        choose_k(F(1, 3), 2, F(1, 8))


@given(st.fractions(F(1, 50), F(49, 50)), st.integers(0, 30), st.fractions(F(1, 100), 1))
def test_choose_k_double_inequality(alpha, n, chi):
    t = F(1, 2**n) / chi
    if t > 1:
        return
    k = choose_k(alpha, n, chi)
    assert alpha * t <= alpha**k < t
    e = choose_k(Enclosure(alpha, prec=200), n, chi) if alpha**k != alpha * t else k
    assert e == k


def test_z_hull_examples(cantor):
    assert (lambda z: (z.lo, z.hi))(z_hull(ParamCell.point(F(1, 3), 0), "1", cantor)) == (0, F(1, 9))
    assert (lambda z: (z.lo, z.hi))(z_hull(ParamCell.point(1, 0), "2", cantor)) == (F(2, 3), 1)


def test_z_hull_bound_on_tight_cell(cantor):
    f = AffineMap1D(F(1, 3), 0)
    for n in range(4, 14):
        cell = dyadic_cell(f.ratio, f.translation, n)
        k = choose_k(F(1, 3), n, chi_upper(cell))
        z = z_hull(cell, (1,) * k, cantor, n, cantor)
        assert z.diam <= z.bound


def test_choose_jj(cantor):
    jj = choose_jj(cantor, (F(0), F(1, 9)), 5, rho=3)
    assert jj.word == (1, 1) and jj.threshold == F(9, 32)
    with pytest.raises(ValueError):
        choose_jj(cantor, (F(0), F(1)), 5, rho=3)
    assert choose_jj(cantor, (F(0), F(1)), 0, rho=3).word == ()
    # minimality: the parent either contains Z with too large a norm, or not at all
    parent = compose_word(cantor, jj.word[:-1])
    assert parent.norm >= jj.threshold


def test_renorm_map_fixed_point(cantor):
    step = renorm_map(ParamCell.point(F(1, 3), 0), "1", "1", cantor, cantor)
    f = AffineMap1D(F(1, 3), 0)
    assert step.apply(f) == f
    phi, psi = compose_word(cantor, "1"), compose_word(cantor, "1")
    assert step.apply(f)(0) == psi.inverse()(f(phi(0)))
    assert step.apply(f).norm == f.norm * phi.norm / psi.norm
    with pytest.raises(ValueError):
        renorm_map(ParamCell.point(F(1, 3), 0), "11", "1", cantor, cantor, k=1)


def test_e0_floor():
    v = e0_floor(F(1, 3), 3).value
    expected = 1 / (27 * math.sqrt(math.e))
    assert abs(v.mid - expected) < 1e-15
    assert abs(v.mid - 0.0224641) < 1e-7
    assert e0_floor(F(1, 3), 3).value.hi < e0_floor(F(1, 2), 3).value.lo
    assert e0_floor(F(1, 3), 4).value.hi < e0_floor(F(1, 3), 3).value.lo
    adj = e0_floor(F(1, 3), 3, slack=cell_slack(ParamCell(F(1, 4), F(1, 2), 0, 1)))
    assert adj.slack == F(1, 2) and adj.adjusted.contains(F(1, 54))


def test_renorm_measure(cantor):
    cell = dyadic_cell(F(1, 3), 0, 6)
    step = renormalize(cell, 6, repeat_word("1"), cantor, cantor)
    mu = AtomicMeasure.from_weights([(F(1, 3), 0)], [1])
    out = renorm_measure(mu, step)
    assert out.support() == [step(F(1, 3), 0)]
    p, q = (cell.a0, cell.b0), (cell.a1, cell.b1)
    two = renorm_measure(AtomicMeasure.uniform([p, q]), step)
    assert two.total == 1 and sorted(w for _, w in two.atoms) == [F(1, 2), F(1, 2)]
    assert out.support()[0][0] >= e0_floor(F(1, 3), 3).value.hi
    with pytest.raises(ValueError):
        renorm_measure(AtomicMeasure.uniform([(F(1), F(1))]), step)


def test_decomposition_corners(cantor):
    for n in range(6, 13):
        cell = dyadic_cell(F(1, 3), 0, n)
        step = renormalize(cell, n, repeat_word("1"), cantor, cantor)
        d = approx_decomposition(step)
        assert d.corners_ok
        assert d.h1.ratio == step.alpha_ii / step.beta_jj


def test_theta_identity_constant(cantor):
    rep = theta_sequence(AffineMap1D(1, 0), repeat_word("1"), 12, cantor, cantor)
    assert rep.extends and rep.increments_ok
    assert all(s.theta.denominator == 1 for s in rep.steps)
    assert rep.checks["functional_identity"] and rep.checks["norm_identity"]


def test_theta_quarter_system():
    Y = homogeneous_pair(F(1, 4))
    rep = theta_sequence(AffineMap1D(F(1, 4), 0), repeat_word("1"), 14, Y, Y)
    assert rep.extends and rep.increments_ok
    assert all(s.increment is None or s.increment.denominator == 1 for s in rep.steps)


def test_theta_phi1_verified(cantor):
    rep = theta_sequence(AffineMap1D(F(1, 3), 0), repeat_word("1"), 12, cantor, cantor, start=6, verify_depth=8)
    assert rep.checks["verified"] is True
    floor = e0_floor(F(1, 3), 3).value.hi
    assert all(s.Mf.norm >= floor for s in rep.steps)
    assert rep.L_measured <= rep.L_bound
