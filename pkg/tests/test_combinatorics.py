from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from invdpp.combinatorics import (
    RationalSeries,
    compositions,
    generating_series,
    gff_weight,
    one,
    series_identity_check,
    tail_sum,
    upsilon,
    verify_gff,
)


class TestCompositions:
    def test_small(self):
        assert list(compositions(1)) == [(1,)]
        assert list(compositions(3)) == [(1, 1, 1), (1, 2), (2, 1), (3,)]

    def test_k10(self):
        cs = list(compositions(10))
        assert len(cs) == 512 and len(set(cs)) == 512
        assert all(sum(c) == 10 and min(c) >= 1 for c in cs)

    def test_lexicographic(self):
        cs = list(compositions(7))
        assert cs == sorted(cs)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            list(compositions(0))

    @given(st.integers(1, 12))
    def test_count(self, k):
        assert sum(1 for _ in compositions(k)) == 2 ** (k - 1)


class TestUpsilon:
    def test_constant_weight(self):
        assert upsilon(1, one) == 1
        for k in range(2, 11):
            assert upsilon(k, one) == 0

    def test_tail_sum_k2(self):
        assert upsilon(2, lambda k, c: sum(c)) == 0

    def test_gff_weight_examples(self):
        assert gff_weight(3, (3,)) == 0
        assert gff_weight(3, (1, 2)) == -2
        assert gff_weight(3, (1, 1, 1)) == -3
        with pytest.raises(ValueError):
            gff_weight(3, (1, 1))

    def test_verify_gff(self):
        assert verify_gff(2) == Fraction(1, 2)
        for k in range(3, 11):
            assert verify_gff(k) == 0
        with pytest.raises(ValueError):
            verify_gff(1)

    def test_exact_types(self):
        assert isinstance(upsilon(4, gff_weight), Fraction)


class TestSeries:
    def test_identity_order12(self):
        assert series_identity_check(12) == [Fraction(0)] * 13

    def test_order_must_be_three(self):
        with pytest.raises(ValueError):
            series_identity_check(2)

    def test_s1_matches_upsilon(self):
        s1 = generating_series(8)["s1"]
        for k in range(1, 9):
            assert s1[(k, 0)] == upsilon(k, tail_sum)

    def test_log_exp_x(self):
        x = RationalSeries.x(12, 2)
        assert x.exp().log() == x

    def test_exp_x_coefficients(self):
        e = RationalSeries.x(10, 1).exp()
        assert e.x_coefficients() == [Fraction(1, factorial(i)) for i in range(11)]

    def test_arithmetic(self):
        x, y = RationalSeries.x(4, 2), RationalSeries.y(4, 2)
        p = (1 + x) * (1 - x)
        assert p[(0, 0)] == 1 and p[(2, 0)] == -1 and p[(1, 0)] == 0
        assert (x * y).d_dy() == x
        assert (x * x * x).d_dx() == 3 * x * x
        assert (y * y * y)[(0, 3)] == 0  # truncated

    def test_mismatched_orders(self):
        with pytest.raises(ValueError):
            RationalSeries.x(3, 1) + RationalSeries.x(4, 1)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            RationalSeries.constant(1, 3, 1).exp()
        with pytest.raises(ValueError):
            RationalSeries.constant(2, 3, 1).log()

    @given(st.lists(st.fractions(max_denominator=20), min_size=1, max_size=6),
           st.lists(st.fractions(max_denominator=20), min_size=1, max_size=6))
    def test_log_exp_roundtrip(self, a, b):
        coeffs = {(i + 1, 0): v for i, v in enumerate(a)}
        coeffs.update({(i, 1): v for i, v in enumerate(b)})
        s = RationalSeries(6, 1, coeffs)
        assert s.exp().log() == s

    @given(st.lists(st.fractions(max_denominator=10), min_size=1, max_size=4))
    def test_exp_is_homomorphism(self, a):
        s = RationalSeries(5, 0, {(i + 1, 0): v for i, v in enumerate(a)})
        t = RationalSeries.x(5, 0) * Fraction(1, 3)
        assert (s + t).exp() == s.exp() * t.exp()
