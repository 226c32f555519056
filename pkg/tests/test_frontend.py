import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from probterm.frontend import (
    Choice,
    NotProbSolvable,
    ParseError,
    Program,
    UpdateRule,
    ValidatedProgram,
    load,
    parse_polynomial,
    parse_program,
    pretty,
    validate,
)
from probterm.generate import random_program
from probterm.polynomial import Polynomial, mono_mul

from conftest import CORPUS, figure

x, y = Polynomial.var("x"), Polynomial.var("y")


def test_parse_figure_1c():
    vp = figure("fig1c")
    assert vp.variables == ("x", "y")
    assert vp.guard_poly == 100 - x * x - y * y
    assert [b.probability for b in vp.branches["y"]] == [Fraction(1, 2)] * 2
    assert vp.branches["y"][0].rest == x


def test_less_than_guard_is_normalized():
    vp = load("x := 1\nwhile x < 5:\n    x = x + 1\n")
    assert vp.guard_poly == 5 - x


def test_implicit_last_probability():
    prog = parse_program("x := 0\nwhile x > -3:\n    x = x + 1 @ 1/3; x - 1 @ 1/6; x\n")
    assert [c.probability for c in prog.updates[0].choices] == [Fraction(1, 3), Fraction(1, 6), Fraction(1, 2)]


def test_polynomial_syntax():
    p = parse_polynomial("2*(x + y)^2 - x**2 / 2 + 0.5", frozenset({"x", "y"}))
    assert p == x * x * Fraction(3, 2) + x * y * 4 + y * y * 2 + Fraction(1, 2)


@pytest.mark.parametrize("source, clause", [
    ("x := 0\nwhile x > 0:\n    while x > 1:\n        x = x - 1\n", "nested loop"),
    ("x := 0\nwhile x > 0:\n    x = x - 1\nwhile x < 3:\n    x = x + 1\n", "sequential loops"),
    ("x := 0\nwhile x > 0:\n    if x > 2:\n        x = x - 1\n", "conditional in loop body"),
    ("x := 1\nwhile x > 0:\n    x = x - 1 @ 1/(x+1); x + 1\n", "non-constant probability"),
    ("x := 1\nwhile x > 0:\n    x = x - 1 @ 2/3; x + 1 @ 2/3\n", "probabilities sum > 1"),
    ("x := 1\nwhile x > 0:\n    x = x - 1 @ 1/3; x + 1 @ 1/3\n", "probabilities do not sum to 1"),
    ("x := 1\nwhile x >= 0:\n    x = x - 1\n", "non-strict guard"),
    ("x := 1\nwhile x > 0 and x < 5:\n    x = x - 1\n", "non-polynomial guard"),
    ("x := 1\nwhile x > 0:\n    x = x^2 - 1\n", "non-linear self-dependence"),
    ("x := 1\nwhile x > 0:\n    x = x*x\n", "non-linear self-dependence"),
    ("x := 1\ny := 1\nwhile x > 0:\n    x = x - y\n    y = y + 1\n", "forward reference"),
    ("x := 1\nwhile x > 0:\n    x = -x + 1\n", "negative self-coefficient"),
    ("x := 1\ny := 0\nwhile x > 0:\n    x = x - 1\n", "missing update"),
])
def test_rejections_name_the_clause(source, clause):
    with pytest.raises(NotProbSolvable) as exc:
        load(source)
    assert exc.value.clause == clause


def test_self_coefficient_depending_on_earlier_variable_is_rejected():
    with pytest.raises(NotProbSolvable) as exc:
        load("y := 1\nx := 1\nwhile x > 0:\n    y = y + 1\n    x = y*x\n")
    assert exc.value.clause == "non-linear self-dependence"


def test_missing_initial_value():
    prog = Program(("x",), (), (x, Polynomial()), (UpdateRule("x", (Choice(x - 1, Fraction(1)),)),))
    with pytest.raises(NotProbSolvable) as exc:
        validate(prog)
    assert exc.value.clause == "missing initial value"


@pytest.mark.parametrize("source, line, col", [
    ("x := 1\nwhile x > 0:\n    x = x + z\n", 3, None),
    ("x := 1\nwhile x > 0:\n    x = x + * 2\n", 3, None),
    ("x := 1\nwhile x > 0\n    x = x - 1\n", 2, None),
    ("x := 1\n", 1, None),
])
def test_parse_errors_carry_positions(source, line, col):
    with pytest.raises(ParseError) as exc:
        parse_program(source)
    assert exc.value.line == line
    assert exc.value.col >= 1


def test_unknown_identifier_column():
    with pytest.raises(ParseError) as exc:
        parse_program("x := 1\nwhile x > 0:\n    x = x + zz\n")
    assert exc.value.col == 13


def test_corpus_files_round_trip():
    for path in sorted(CORPUS.rglob("*.prob")):
        try:
            prog = parse_program(path.read_text())
        except NotProbSolvable:
            continue
        assert parse_program(pretty(prog)) == prog, path.name


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_generated_programs_round_trip_and_validate(seed):
    source = random_program(random.Random(seed))
    prog = parse_program(source)
    again = parse_program(pretty(prog))
    assert again == prog
    assert isinstance(validate(again), ValidatedProgram)


# monomial order -----------------------------------------------------------------

NAMES = ("x", "y", "z")
monos = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)).map(
    lambda e: tuple((n, k) for n, k in zip(NAMES, e) if k))
VP3 = load("x := 0\ny := 0\nz := 0\nwhile x > 0:\n    x = x + 1\n    y = y + x\n    z = z + y\n")


@given(monos, monos)
def test_order_is_total(a, b):
    ka, kb = VP3.mono_key(a), VP3.mono_key(b)
    assert (ka < kb) + (ka > kb) + (a == b) == 1


@given(monos, monos, monos, monos)
def test_order_is_multiplicative(y1, z1, y2, z2):
    key = VP3.mono_key
    if key(y1) <= key(z1) and key(y2) <= key(z2):
        assert key(mono_mul(y1, y2)) <= key(mono_mul(z1, z2))


def test_dependencies_are_smaller():
    for _, vp in _corpus():
        universe = vp.monomial_universe
        for m in universe:
            for n in vp.substitution_images(m):
                assert vp.mono_key(n) <= vp.mono_key(m)


def _corpus():
    from conftest import corpus_programs
    return corpus_programs()


# validate is total ----------------------------------------------------------------

polys = st.lists(
    st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)), max_size=4
).map(lambda ts: sum((x ** a * y ** b * Polynomial.var("z") ** c * k for k, a, b, c in ts), Polynomial()))
probs = st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(0)])


@st.composite
def arbitrary_programs(draw):
    names = draw(st.permutations(NAMES))[: draw(st.integers(1, 3))]
    declared = draw(st.lists(st.sampled_from(NAMES), unique=True, min_size=0, max_size=3))
    init = tuple((n, Fraction(draw(st.integers(-5, 5)))) for n in declared)
    updates = tuple(
        UpdateRule(n, tuple(Choice(draw(polys), draw(probs)) for _ in range(draw(st.integers(1, 2)))))
        for n in names)
    return Program(tuple(names), init, (draw(polys), draw(polys)), updates)


@settings(max_examples=300, deadline=None, derandomize=True)
@given(arbitrary_programs())
def test_validate_is_total(prog):
    try:
        vp = validate(prog)
    except NotProbSolvable as exc:
        assert exc.clause in {
            "missing update", "missing initial value", "non-polynomial guard",
            "non-linear self-dependence", "forward reference", "negative self-coefficient",
            "probabilities sum > 1", "probabilities do not sum to 1",
        }
    else:
        assert isinstance(vp, ValidatedProgram)
        for bs in vp.branches.values():
            assert sum(b.probability for b in bs) == 1
