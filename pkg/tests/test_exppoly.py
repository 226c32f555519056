from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from probterm.exppoly import (
    INF,
    NEG_INF,
    ExpPolynomial,
    SymbolicAmbiguity,
    asymptotic_class,
    dominated,
    dominating,
    eventual_sign,
    is_O1,
    is_Omega1,
    limit_at_infinity,
    positive_from,
)
from probterm.polynomial import Polynomial

T = ExpPolynomial.term
c1, c2, d = Polynomial.var("c1"), Polynomial.var("c2"), Polynomial.var("d")
half = Fraction(1, 2)
SYM_ONE = {"c1": 1, "c2": 1, "d": 1}


def test_dominating_examples():
    assert dominating([T(1, 2) + 10, T(10, 5) - T(1, 3)]) == T(1, 5)
    assert dominating([T(-1, 1) + 50, T(-1, 8) + T(1, 2) - T(3, 3)]) == T(-1, 1)
    assert dominating([T(1, 2, 2) + T(1, 9), T(1, 5) + T(1, 3), T(1, 0, half)]) == T(1, 2, 2)


def test_dominated_examples():
    assert dominated([T(1, 2) - T(2, 1) + 1, T(half, 1) - 5]) == T(1, 1)
    assert dominated([T(c1, 0, 2), T(c1, 0, half)]) == T(1, 0, half)


def test_dominated_returns_tightest_class():
    # -2^i is dominated by this set, and so is the tighter -2^(-i) we return
    fs = [T(1, 0, 2) - T(1, 2), T(-10, 0, half)]
    g = dominated(fs)
    assert g == T(-1, 0, half)
    assert asymptotic_class(T(-1, 0, 2)) < asymptotic_class(g)


def test_eventual_sign_examples():
    assert eventual_sign(T(-half, 2) + T(1, 1) + Fraction(3, 2)) == "-"
    assert eventual_sign(T(Fraction(1, 3), 0, half) - Fraction(1, 3)) == "-"
    assert eventual_sign(ExpPolynomial()) == "0"
    assert eventual_sign(T(c1 - d, 0, 2)) == "ambiguous"


def test_limit_examples():
    assert limit_at_infinity(T(-1, 2)) == NEG_INF
    assert limit_at_infinity(T(Fraction(1, 3), 0, half) - Fraction(1, 3)) == Fraction(-1, 3)
    assert limit_at_infinity(ExpPolynomial.const(Fraction(7, 2))) == Fraction(7, 2)
    with pytest.raises(SymbolicAmbiguity):
        limit_at_infinity(ExpPolynomial.const(c1))


def test_bounded_classes():
    one = ExpPolynomial.const(1)
    assert is_O1(one) and is_Omega1(one)
    assert not is_O1(T(-1, 2))
    assert is_O1(T(1, 0, half)) and not is_Omega1(T(1, 0, half))


def test_base_zero_lives_only_at_zero():
    f = ExpPolynomial({(0, 0): 5}) + 1
    assert f.at(0) == Polynomial.const(6) and f.at(3) == Polynomial.const(1)
    assert asymptotic_class(ExpPolynomial({(0, 0): 5})).sign == 0


def test_shift_and_overrides():
    f = T(1, 1, 2).with_overrides({0: Polynomial.const(7)})
    g = f.shift(1)
    assert all(g.at(i) == f.at(i + 1) for i in range(6))
    assert str(f) == "i*2^i [i=0: 7]"


def test_positive_from():
    assert positive_from(T(1, 2) - T(10, 1) + 30)
    assert not positive_from(T(1, 2) - T(10, 1) + 1)
    assert positive_from(T(1, 0, 2) - T(100, 3), start=40)
    assert positive_from(ExpPolynomial(), strict=False)
    assert not positive_from(ExpPolynomial())


# random exponential polynomials -------------------------------------------------

BASES = [Fraction(0), half, Fraction(1), Fraction(2), Fraction(3)]
coeffs = st.integers(-5, 5).filter(bool).map(Fraction)
sym_coeffs = st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2)).map(
    lambda k: Polynomial.const(k[0]) + c1 * k[1] + c2 * k[2] + d * k[3])


def exppolys(coeff=coeffs):
    term = st.tuples(st.sampled_from(BASES), st.integers(0, 4), coeff)
    return st.lists(term, min_size=1, max_size=4).map(
        lambda ts: ExpPolynomial([((b, k), c) for b, k, c in ts]))


def sign(v) -> str:
    return "+" if v > 0 else "-" if v < 0 else "0"


@settings(max_examples=200, deadline=None, derandomize=True)
@given(exppolys(st.one_of(coeffs.map(Polynomial.const), sym_coeffs)))
def test_eventual_sign_matches_numeric_sign(f):
    s = eventual_sign(f)
    if s == "ambiguous":
        return
    for i in range(2**10, 2**10 + 33):
        assert sign(f.value(i, SYM_ONE)) == s


def _fit_upper(f, g, lo, hi):
    """Positive alpha with alpha*g >= f on [lo, hi] using a factor-2 margin."""
    ratios = [f.value(i) / g.value(i) for i in range(lo, hi + 1)]
    if g.value(lo) > 0:
        top = max(ratios)
        return 2 * top if top > 0 else Fraction(1)
    bottom = min(ratios)
    return bottom / 2 if bottom > 0 else None


N = 64


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.lists(exppolys(), min_size=1, max_size=4))
def test_domination_contract(fs):
    g = dominating(fs)
    h = dominated(fs)
    for f in fs:
        if g.is_zero():
            assert all(f.value(i) <= 0 for i in range(2 * N, 4 * N + 1))
        else:
            alpha = _fit_upper(f, g, N, 2 * N)
            assert alpha is not None
            assert all(alpha * g.value(i) >= f.value(i) for i in range(2 * N, 4 * N + 1))
        if h.is_zero():
            assert all(f.value(i) >= 0 for i in range(2 * N, 4 * N + 1))
        else:
            # dual: -h dominates -f
            beta = _fit_upper(-f, -h, N, 2 * N)
            assert beta is not None
            assert all(beta * h.value(i) <= f.value(i) for i in range(2 * N, 4 * N + 1))


@settings(max_examples=100, deadline=None, derandomize=True)
@given(exppolys())
def test_dominating_preserves_class_and_is_idempotent(f):
    g = dominating([f])
    assert asymptotic_class(g) == asymptotic_class(f)
    assert dominating([g]) == g
    assert dominated([dominated([f])]) == dominated([f])


@settings(max_examples=100, deadline=None, derandomize=True)
@given(exppolys())
def test_limit_matches_numeric_trend(f):
    lim = limit_at_infinity(f)
    a, b = f.value(2**9), f.value(2**10)
    if lim == INF:
        assert b > a > 0
    elif lim == NEG_INF:
        assert b < a < 0
    else:
        assert abs(b - lim) < Fraction(1, 10**6)
