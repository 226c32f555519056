from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from probterm.exppoly import ExpPolynomial
from probterm.polynomial import Polynomial
from probterm.recurrence import FirstOrderRecurrence, solve

T = ExpPolynomial.term
c1, d = Polynomial.var("c1"), Polynomial.var("d")
half = Fraction(1, 2)


def test_growing_example():
    # y(i+1) = 2*y(i) + d*i^2, y(0) = c1
    s = solve(FirstOrderRecurrence(2, T(d, 2), c1))
    expected = T(c1 + 3 * d, 0, 2) - T(d, 2) - T(2 * d, 1) - 3 * d
    assert s == expected


def test_shrinking_example():
    s = solve(FirstOrderRecurrence(half, T(d, 2), c1))
    expected = T(2 * d, 2) - T(8 * d, 1) + 12 * d + T(c1 - 12 * d, 0, half)
    assert s == expected


def test_resonance():
    # r equals the base of h: y(i+1) = y(i) + 1 gives y0 + i
    s = solve(FirstOrderRecurrence(1, ExpPolynomial.const(1), 4))
    assert s == T(1, 1) + 4
    s = solve(FirstOrderRecurrence(2, T(1, 0, 2), 0))
    assert all(s.at(i) == Polynomial.const(i * 2 ** (i - 1) if i else 0) for i in range(10))


def test_zero_rate_is_shifted_input():
    rec = FirstOrderRecurrence(0, T(1, 1, 2), 7)
    s = solve(rec)
    assert s.at(0) == Polynomial.const(7)
    assert [s.at(i) for i in range(12)] == rec.iterate(11)


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        FirstOrderRecurrence(-1, ExpPolynomial(), 0)


RATES = [Fraction(0), Fraction(1, 3), half, Fraction(1), Fraction(2), Fraction(5, 2)]
H_BASES = [half, Fraction(1), Fraction(2)]
rationals = st.fractions(min_value=-10, max_value=10, max_denominator=7)
terms = st.tuples(st.sampled_from(H_BASES), st.integers(0, 3), rationals)
recurrences = st.builds(
    lambda r, ts, y0: FirstOrderRecurrence(r, ExpPolynomial([((b, k), c) for b, k, c in ts]), y0),
    st.sampled_from(RATES),
    st.lists(terms, max_size=4),
    rationals,
)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(recurrences)
def test_closed_form_matches_iteration(rec):
    s = solve(rec)
    assert [s.at(i) for i in range(31)] == rec.iterate(30)


@settings(max_examples=50, deadline=None, derandomize=True)
@given(st.sampled_from(RATES), st.lists(terms, max_size=3), rationals, rationals)
def test_symbolic_start_and_scale(r, ts, a, b):
    # symbolic y0 and d-scaled input, as the bounds engine uses them
    h = ExpPolynomial([((base, k), c) for base, k, c in ts]) * d
    rec = FirstOrderRecurrence(r, h, c1 * a + b)
    s = solve(rec)
    assert [s.at(i) for i in range(16)] == rec.iterate(15)
