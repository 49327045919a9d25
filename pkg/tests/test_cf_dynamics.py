import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fareygauss.cf_dynamics import (
    CFWord,
    cf_expand,
    cf_value,
    farey_level,
    farey_map,
    first_passage_time,
    format_fractions,
    gauss_map,
    inverse_branch_farey,
    inverse_branch_gauss,
    periodic_cf_value,
    preimages_of_zero,
    psi0_iterate,
    word_matrix,
)

F = Fraction


@pytest.mark.parametrize("x, want", [(0, 0), (F(1, 3), F(1, 2)), (F(3, 4), F(1, 3)), (1, 0)])
def test_farey_map_values(x, want):
    assert farey_map(x) == want


@pytest.mark.parametrize("x, want", [(0, 0), (F(2, 5), F(1, 2)), (F(7, 10), F(3, 7)), (1, 0)])
def test_gauss_map_values(x, want):
    assert gauss_map(x) == want


def test_maps_on_floats():
    assert farey_map(0.75) == pytest.approx(1 / 3, abs=1e-15)
    assert gauss_map(0.7) == pytest.approx(3 / 7, abs=1e-14)


def test_maps_reject_outside_unit_interval():
    with pytest.raises(ValueError):
        farey_map(1.5)
    with pytest.raises(ValueError):
        gauss_map(-0.1)


def test_inverse_branches():
    assert inverse_branch_farey(0, F(1)) == F(1, 2)
    assert inverse_branch_farey(1, F(0)) == 1
    assert inverse_branch_farey(0, F(1, 2)) == F(1, 3)
    assert inverse_branch_gauss(3, F(0)) == F(1, 3)
    with pytest.raises(ValueError):
        inverse_branch_farey(2, 0.5)


@pytest.mark.parametrize("n, x, want", [(0, F(2, 7), F(2, 7)), (3, F(1), F(1, 4)), (5, F(1, 2), F(1, 7))])
def test_psi0_iterate(n, x, want):
    assert psi0_iterate(n, x) == want


@pytest.mark.parametrize("x, want", [(1, 1), (0.3, 3), (F(1, 7), 7), (F(1, 2), 2)])
def test_first_passage_time(x, want):
    assert first_passage_time(x) == want


def test_cf_expand_examples():
    assert cf_expand(math.sqrt(3) - 1, 8).digits[:4] == (1, 2, 1, 2)
    assert cf_expand(F(2, 5)).digits == (2, 2)
    assert cf_expand(0.4).digits == (2, 2)
    assert set(cf_expand((math.sqrt(5) - 1) / 2, 20).digits[:15]) == {1}


def test_cf_value_examples():
    assert cf_value([2, 2]) == pytest.approx(0.4, abs=1e-16)
    assert cf_value([1]) == 1.0
    assert cf_value([1, 2], exact=True) == F(2, 3)


def test_cfword_rejects_zero_digit():
    with pytest.raises(ValueError):
        CFWord((1, 0))


def test_periodic_values():
    o = periodic_cf_value([1])
    g = (math.sqrt(5) - 1) / 2
    assert o.value == pytest.approx(g, abs=1e-15)
    assert o.weight == pytest.approx(g * g, abs=1e-15)
    assert o.farey_period == 1
    assert periodic_cf_value([2]).value == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    o12 = periodic_cf_value([1, 2])
    assert o12.value == pytest.approx(math.sqrt(3) - 1, abs=1e-15)
    assert o12.farey_period == 3
    assert 0 < o12.weight < 1


def test_periodic_value_solves_fixed_point_quadratic():
    for word in ([1], [3, 1], [2, 5, 1], [4, 4, 1, 2]):
        o = periodic_cf_value(word)
        a, b, c, d = word_matrix(word)
        x = o.value
        # x = (a x + b)/(c x + d)
        assert abs(c * x * x + (d - a) * x - b) < 1e-12 * max(a, b, c, d)


def test_periodic_round_trip_all_short_words():
    import itertools

    for ell in range(1, 5):
        for word in itertools.product(range(1, 6), repeat=ell):
            o = periodic_cf_value(word)
            got = cf_expand(o.value, 3 * ell).digits
            assert got[: 2 * ell] == tuple(word) * 2, word


def test_farey_levels():
    assert format_fractions(farey_level(0)) == "0/1,1/1"
    assert format_fractions(farey_level(1)) == "0/1,1/2,1/1"
    assert format_fractions(farey_level(2)) == "0/1,1/3,1/2,2/3,1/1"
    assert len(farey_level(10)) == 2**10 + 1


def test_preimages_small_depths():
    assert preimages_of_zero(0) == {F(0)}
    assert preimages_of_zero(2) == {F(0), F(1), F(1, 2)}


@pytest.mark.parametrize("n", range(0, 11))
def test_preimages_coincide_with_farey_levels(n):
    assert preimages_of_zero(n + 1) == set(farey_level(n))


def test_farey_fractions_reduced_and_ordered():
    lev = farey_level(8)
    assert all(math.gcd(f.numerator, f.denominator) == 1 for f in lev)
    assert all(a < b for a, b in zip(lev, lev[1:]))


def test_induced_map_identity():
    rng = np.random.default_rng(7)
    for x in rng.uniform(1e-3, 1, 1000):
        n = first_passage_time(x)
        y = x
        for _ in range(n):
            y = farey_map(y)
        assert abs(y - gauss_map(x)) < 1e-10


fractions_01 = st.fractions(min_value=F(1, 10**6), max_value=1, max_denominator=10**9).filter(
    lambda f: 0 < f < 1
)


@settings(max_examples=300, deadline=None)
@given(fractions_01)
def test_gauss_shift_drops_first_digit(x):
    d = cf_expand(x).digits
    assert cf_expand(gauss_map(x)).digits == d[1:] or (len(d) == 1 and gauss_map(x) == 0)


@settings(max_examples=300, deadline=None)
@given(fractions_01)
def test_farey_shift_decrements_first_digit(x):
    d = cf_expand(x).digits
    y = farey_map(x)
    if d[0] > 1:
        assert cf_expand(y).digits == (d[0] - 1,) + d[1:]
    else:
        # first digit 1: F acts as G composed with the flip, digits of 1/x - 1
        assert y == 1 / x - 1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.floats(1e-3, 1.0))
def test_psi0_conjugate_to_translation(n, x):
    assert psi0_iterate(n, x) == pytest.approx(1 / (1 / x + n), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=8))
def test_cf_value_expand_round_trip_exact(digits):
    if digits[-1] == 1 and len(digits) > 1:
        digits = digits[:-1] + [2]
    x = cf_value(digits, exact=True)
    if x == 1:
        return
    assert list(cf_expand(x).digits) == digits
