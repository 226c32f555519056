import random
from fractions import Fraction

import pytest

from probterm.exppoly import ExpPolynomial
from probterm.frontend import load
from probterm.generate import random_program
from probterm.polynomial import ONE, Polynomial
from probterm.rules import (
    AST,
    GOALS,
    NON_AST,
    NON_PAST,
    PAST,
    R_AST,
    R_PAST,
    RSM,
    SM,
    Analyzer,
    analyze,
    check_ast,
    check_past,
    rule_out,
)

from conftest import corpus_programs, figure

CORPUS = corpus_programs()
x, y = Polynomial.var("x"), Polynomial.var("y")
T = ExpPolynomial.term


def verdicts(vp, relaxed=True):
    return {v.goal: v for v in analyze(vp, relaxed=relaxed)}


def certified(vp, relaxed=True):
    return {g for g, v in verdicts(vp, relaxed).items() if v.certified}


def test_fig_1a_sm_witness():
    v = check_ast(figure("fig1a"))
    assert v.certified and v.witness.rule == SM
    assert v.witness.probability == Fraction(1, 2) and v.witness.decrease == 1
    assert certified(figure("fig1a")) == {AST, NON_PAST}


def test_fig_1c_rsm_witness():
    v = check_past(figure("fig1c"))
    assert v.witness.rule == RSM
    assert v.witness.martingale_expression == -x * x - 2
    assert v.witness.epsilon == 1


def test_fig_1b_repulsing_witness():
    v = verdicts(figure("fig1b"))[NON_AST]
    assert v.witness.rule == R_AST
    assert v.witness.epsilon == Fraction(1, 2)
    assert v.witness.difference_bound == 2


def test_fig_1d_needs_relaxation():
    vp = figure("fig1d")
    v = check_past(vp)
    assert v.certified
    parts = Analyzer(vp).moments.split_deterministic(v.witness.martingale_expression)
    assert set(parts) == {ONE}
    assert parts[ONE] == T(Fraction(-1, 2), 2) + T(1, 1) + Fraction(3, 2)
    assert not check_past(vp, relaxed=False).certified


def test_fig_3b_repulsing_witness():
    v = verdicts(figure("fig3b"))[NON_AST]
    assert v.certified and v.witness.bound == ExpPolynomial.const(-1)
    assert v.witness.difference_bound == 1
    assert not verdicts(figure("fig3b"), relaxed=False)[NON_AST].certified


def test_rule_out():
    assert rule_out(figure("fig1b")) >= {RSM, SM}
    assert RSM in rule_out(figure("fig1a")) and R_PAST not in rule_out(figure("fig1a"))
    assert {R_AST, R_PAST} <= rule_out(figure("fig1c"))


def test_ruled_out_goals_are_reported():
    v = verdicts(figure("fig1b"))[PAST]
    assert not v.certified and RSM in v.ruled_out
    assert "ruled out" in v.diagnostics[0]


def test_goal_subset():
    out = analyze(figure("fig1c"), goals=[NON_PAST])
    assert [v.goal for v in out] == [NON_PAST]
    assert "skipped" in out[0].diagnostics[0]


def test_ambiguity_degrades_to_unknown():
    # x takes both signs, so the sign of the x^3 coefficient alone decides nothing
    vp = load("x := 0\ny := 1\nwhile y > 0:\n    x = x + 1 @ 1/2; x - 1\n    y = y + x^3 - x @ 1/2; y - 1\n")
    for v in analyze(vp):
        assert v.certified == (v.witness is not None)


def _check_exclusion(vs):
    c = {g for g, v in vs.items() if v.certified}
    assert not ({PAST, AST} & c and NON_AST in c)
    assert not (PAST in c and NON_PAST in c)
    for v in vs.values():
        assert v.certified == (v.witness is not None)


@pytest.mark.parametrize("relaxed", [True, False])
@pytest.mark.parametrize("name, vp", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_mutual_exclusion_and_determinism(name, vp, relaxed):
    a = verdicts(vp, relaxed)
    b = verdicts(vp, relaxed)
    _check_exclusion(a)
    for g in GOALS:
        assert a[g].result == b[g].result
        assert a[g].witness == b[g].witness
        assert a[g].diagnostics == b[g].diagnostics


@pytest.mark.parametrize("name, vp", CORPUS, ids=[n for n, _ in CORPUS])
def test_light_mode_never_certifies_more(name, vp):
    assert certified(vp, relaxed=False) <= certified(vp, relaxed=True)


def test_fuzzed_programs_mutual_exclusion():
    rng = random.Random(1234)
    for _ in range(60):
        vp = load(random_program(rng))
        _check_exclusion(verdicts(vp))
