from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigmaschur.fp import c_finite, c_infinity
from sigmaschur.measure import (
    MeasureExpr,
    cyclic_class_measure,
    cyclic_series_partial,
    cyclic_series_sum,
    example_consistency,
    mu_inf_abelianization,
    mu_inf_sch_n,
    mu_inf_udg,
    mu_n_class_count,
    mu_n_restriction_factor,
    zp_class_measure,
)


def test_sch1_rendering():
    m = mu_inf_sch_n(3, 1)
    assert m.coeff == Fraction(3, 4) and m.cinf_power == 1
    assert m.render() == "3/4·C_inf ≈ 0.420094"
    val, err = m.evaluate()
    assert abs(val - 0.75 * 0.5601260779279) < 1e-11 and err < 1e-11


def test_sch_n_sums_to_one():
    for p in (3, 5):
        total = sum(float(mu_inf_sch_n(p, n)) for n in range(8))
        assert abs(total - 1) < 1e-6


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("j", [1, 2, 3, 4, 5])
def test_example_consistency(p, j):
    lhs, rhs = example_consistency(p, j)
    assert lhs == rhs


@pytest.mark.parametrize("p", [3, 5, 7])
def test_zp_class_vanishes(p):
    assert zp_class_measure(p).is_zero()
    assert cyclic_series_sum(p) == Fraction(p, (p - 1) ** 2)
    assert cyclic_series_sum(p) - cyclic_series_partial(p, 40) == Fraction(p, (p - 1) ** 2) / p ** 40


def test_cyclic_class_matches_udg():
    assert cyclic_class_measure(3, 2) == mu_inf_udg(3, 1, 1, 6)


def test_class_counts_small_levels():
    # F_{1,4}: Z/9 has Aut 6, Z/3 has Aut 2 (m = 1, d = 1)
    assert mu_n_class_count(3, 1, 9, 0, 6) == 1
    assert mu_n_class_count(3, 1, 9, 1, 2) == 2
    # F_{2,3} itself (m = 0) occurs once among 81 tuples
    assert mu_n_class_count(3, 2, 9, 0, 48) == 1
    with pytest.raises(ValueError):
        mu_n_class_count(3, 1, 9, 0, 4)


@given(st.sampled_from([3, 5, 7]), st.integers(0, 5), st.data())
def test_restriction_factor(p, n, data):
    m = data.draw(st.integers(0, n))
    f = mu_n_restriction_factor(p, n, m)
    assert f == c_finite(p, n) ** 2 / (c_finite(p, m) ** 2 * c_finite(p, n - m))
    assert mu_n_restriction_factor(p, n, n) == 1


def test_expression_arithmetic():
    a = MeasureExpr(Fraction(1, 2), 1, 3)
    b = MeasureExpr(Fraction(1, 3), 1, 3)
    assert (a + b).coeff == Fraction(5, 6)
    assert (a - a).is_zero()
    assert (a * b).cinf_power == 2
    with pytest.raises(ValueError):
        a + MeasureExpr(1, 0, 3)
    with pytest.raises(ValueError):
        a + MeasureExpr(1, 1, 5)
    c, _ = c_infinity(3)
    assert abs(float(a * b) - c * c / 6) < 1e-12


def test_abelianization_measure():
    assert mu_inf_abelianization(3, 2).coeff == Fraction(1, 2)
    with pytest.raises(ValueError):
        mu_inf_abelianization(3, 0)
