import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim.ifs import (
    AffineMap1D,
    IFSystem,
    Separation,
    attractor_hull,
    check_strong_separation,
    compose_word,
    compute_rho,
    count_vector,
    cylinder_cover,
    engulf,
    homogeneous_pair,
    load_ifs,
    middle_thirds,
    normalize,
)


def test_compose_word_examples(cantor):
    assert compose_word(cantor, "") == AffineMap1D(1, 0)
    assert compose_word(cantor, "2") == AffineMap1D(F(1, 3), F(2, 3))
    assert compose_word(cantor, "12") == AffineMap1D(F(1, 9), F(2, 9))


def test_compose_word_invalid_index(cantor):
    with pytest.raises((ValueError, IndexError)):
        compose_word(cantor, "3")


def test_hull_examples(cantor, quarter):
    assert attractor_hull(cantor) == (0, 1)
    assert attractor_hull(IFSystem.from_pairs([(F(1, 4), 0), (F(1, 4), F(3, 8))])) == (0, F(1, 2))
    assert attractor_hull(quarter) == (0, 1)


def test_hull_orientation_reversing_matches_deep_cover():
    S = IFSystem.from_pairs([(F(-1, 3), F(1, 3)), (F(1, 4), F(3, 5))])
    lo, hi = attractor_hull(S)
    for m in S.maps:
        u, v = m.image(lo, hi)
        assert lo <= u and v <= hi
    # images of the maps' fixed points under short words are attractor points spanning the hull
    fps = [m.fixed_point() for m in S.maps]
    pts = [compose_word(S, w)(p) for n in range(4) for w in _words(2, n) for p in fps]
    assert min(pts) == lo and max(pts) == hi


def _words(k, n):
    out = [()]
    for _ in range(n):
        out = [w + (i,) for w in out for i in range(1, k + 1)]
    return out


def test_normalize_examples(cantor):
    assert normalize(cantor) == cantor
    S = normalize(IFSystem.from_pairs([(F(1, 4), 0), (F(1, 4), F(3, 8))]))
    assert S == homogeneous_pair(F(1, 4))
    assert S.hull == (0, 1)
    assert S.ratios == (F(1, 4), F(1, 4))
    with pytest.raises(ValueError, match="trivial self-similar set"):
        normalize(IFSystem.from_pairs([(F(1, 2), 1), (F(1, 3), F(4, 3))]))


def test_separation_examples(cantor, quarter):
    r = check_strong_separation(cantor, 8)
    assert r.status is Separation.CERTIFIED and r.depth == 1
    half = homogeneous_pair(F(1, 2))
    r = check_strong_separation(half, 8)
    assert r.status is Separation.REFUTED and r.witness == F(1, 2)
    assert check_strong_separation(quarter, 8).depth == 1


def test_cover_examples(cantor, quarter):
    assert cylinder_cover(cantor, 1) == [(0, F(1, 3)), (F(2, 3), 1)]
    c2 = cylinder_cover(cantor, 2)
    assert [lo for lo, _ in c2] == [0, F(2, 9), F(2, 3), F(8, 9)]
    assert all(hi - lo == F(1, 9) for lo, hi in c2)
    assert cylinder_cover(quarter, 0) == [(0, 1)]


def test_engulf_examples(quarter, cantor):
    assert engulf(quarter, (0, F(1, 16))) == (1, 1)
    assert engulf(cantor, (0, 1)) == ()
    assert engulf(quarter, (F(1, 10), F(9, 10))) == ()
    with pytest.raises(ValueError):
        engulf(quarter, (F(-1, 2), F(1, 2)))


@pytest.mark.parametrize("r, rho", [(F(1, 3), 3), (F(1, 4), 2), (F(1, 5), F(5, 3))])
def test_rho_values_and_random_engulf_oracle(r, rho):
    Y = homogeneous_pair(r)
    assert compute_rho(Y) == rho
    rng = random.Random(int(1 / r))
    for _ in range(1000):
        w1 = tuple(rng.randint(1, 2) for _ in range(30))
        w2 = tuple(rng.randint(1, 2) for _ in range(30))
        x, y = compose_word(Y, w1).translation, compose_word(Y, w2).translation
        if x == y:
            continue
        Z = (min(x, y), max(x, y))
        jj = engulf(Y, Z)
        lo, hi = compose_word(Y, jj).image(0, 1)
        assert lo <= Z[0] and Z[1] <= hi
        assert hi - lo < rho * (Z[1] - Z[0])


def test_rho_requires_gap():
    with pytest.raises(ValueError):
        compute_rho(homogeneous_pair(F(1, 2)))


words = st.lists(st.integers(1, 3), max_size=8).map(tuple)
THREE = IFSystem.from_pairs([(F(1, 3), 0), (F(1, 4), F(9, 20)), (F(1, 5), F(4, 5))])


@settings(max_examples=500, deadline=None)
@given(words, words)
def test_compose_is_a_homomorphism(u, v):
    assert compose_word(THREE, u + v) == compose_word(THREE, u).compose(compose_word(THREE, v))
    norm = F(1)
    for s in u:
        norm *= THREE[s].norm
    assert compose_word(THREE, u).norm == norm


def test_homogeneous_norm(cantor):
    assert compose_word(cantor, "1212") .norm == F(1, 81)


@pytest.mark.parametrize("n", range(0, 5))
def test_cover_refines(n, three_map):
    coarse, fine = cylinder_cover(three_map, n), cylinder_cover(three_map, n + 1)
    for lo, hi in fine:
        assert sum(1 for a, b in coarse if a <= lo and hi <= b) == 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 2), min_size=1, max_size=12), st.fractions(0, 1, max_denominator=64), st.fractions(0, 1, max_denominator=64))
def test_engulf_maximal_and_containing(w, s, t):
    Y = homogeneous_pair(F(1, 4))
    g = compose_word(Y, tuple(w))
    a, b = sorted((g(s), g(t)))
    jj = engulf(Y, (a, b), max_depth=40)
    lo, hi = compose_word(Y, jj).image(0, 1)
    assert lo <= a and b <= hi
    if a < b:
        for j in (1, 2):
            u, v = compose_word(Y, jj + (j,)).image(0, 1)
            assert not (u <= a and b <= v)


@settings(max_examples=100, deadline=None)
@given(st.fractions(F(1, 10), F(1, 3), max_denominator=20), st.fractions(F(-3), F(3), max_denominator=20), st.fractions(F(1, 2), 3, max_denominator=20))
def test_normalize_idempotent(r, t, d):
    S = IFSystem.from_pairs([(r, t), (r, t + d)])
    N1 = normalize(S)
    assert N1.hull == (0, 1)
    assert normalize(N1) == N1


def test_count_vector():
    assert count_vector("1121", 3) == (3, 1, 0)


def test_config_round_trip(tmp_path, three_map):
    p = tmp_path / "x.json"
    p.write_text(json.dumps(three_map.to_config()))
    assert load_ifs(p) == three_map
    q = tmp_path / "x.toml"
    q.write_text('maps = [{ratio = "1/3", translation = "0"}, {ratio = "1/3", translation = "2/3"}]\n')
    assert load_ifs(q) == middle_thirds()
