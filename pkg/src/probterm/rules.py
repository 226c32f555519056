"""Proof rules for PAST, AST, non-AST and non-PAST with the guard polynomial as
the (super)martingale candidate.

In relaxed mode (the default) the rule conditions only need to hold
eventually, which is what asymptotic bounding functions deliver.  With
``relaxed=False`` every condition is demanded from the first iteration on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .bounds import UPPER, AmbiguousSign, BoundsEngine
from .exppoly import (
    ExpPolynomial,
    SymbolicAmbiguity,
    bounded_above_by_negative,
    dominating,
    eventual_sign,
    is_O1,
    is_Omega1,
    limit_at_infinity,
    positive_from,
)
from .frontend import ValidatedProgram
from .moments import MomentEngine, expected_guard_change
from .polynomial import ONE, Polynomial
from .semantics import (
    DEFAULT_BRANCH_CAP,
    MINUS,
    PLUS,
    BranchExplosion,
    SignAnalysis,
    can_reach_any_iteration,
    martingale_expression,
    one_step_distribution,
)

PAST, AST, NON_AST, NON_PAST = "PAST", "AST", "NonAST", "NonPAST"
GOALS = (PAST, AST, NON_AST, NON_PAST)
RSM, SM, R_AST, R_PAST = "RSM", "SM", "R-AST", "R-PAST"
CERTIFIED, UNKNOWN = "Certified", "Unknown"


@dataclass(frozen=True)
class Witness:
    rule: str
    martingale_expression: Polynomial
    bound: ExpPolynomial | None = None
    epsilon: object = None  # Fraction or ExpPolynomial
    branch: Polynomial | None = None
    probability: Fraction | None = None
    decrease: Fraction | None = None
    difference_bound: object = None
    relaxed: bool = True


@dataclass
class Verdict:
    goal: str
    result: str = UNKNOWN
    witness: Witness | None = None
    ruled_out: frozenset = frozenset()
    diagnostics: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.result == CERTIFIED


class _Fail(Exception):
    pass


class Analyzer:
    """Runs the proof rules on one program; owns all memo tables."""

    def __init__(self, vp: ValidatedProgram, relaxed: bool = True, branch_cap: int = DEFAULT_BRANCH_CAP):
        self.vp = vp
        self.relaxed = relaxed
        self.cap = branch_cap
        self.moments = MomentEngine(vp, branch_cap)
        self.signs = SignAnalysis(vp, branch_cap)
        self.bounds = BoundsEngine(vp, self.moments, self.signs)

    # helpers ----------------------------------------------------------------

    def _exact_constant(self, expr: Polynomial):
        """The value of ``expr`` if it is the same constant in every iteration."""
        parts = self.moments.split_deterministic(expr)
        if set(parts) - {ONE}:
            return None
        c0 = parts.get(ONE, ExpPolynomial())
        if not c0.is_constant():
            return None
        return c0.constant_value().constant_value()

    def _always_nonpositive(self, expr: Polynomial, strict: bool) -> bool:
        """Termwise certificate that ``expr <= 0`` (or ``<= -eps``) in every iteration."""
        parts = self.moments.split_deterministic(expr)
        for mono, c in parts.items():
            if mono == ONE:
                continue
            os = self.signs.oversign(mono)
            if PLUS not in os and positive_from(c, 0, strict=False):
                continue
            if MINUS not in os and positive_from(-c, 0, strict=False):
                continue
            return False
        c0 = parts.get(ONE, ExpPolynomial())
        if strict:
            return bounded_above_by_negative(c0)
        return positive_from(-c0, 0, strict=False)

    def _eventually_nonpositive(self, u: ExpPolynomial) -> bool:
        s = eventual_sign(u)
        if s == "ambiguous":
            raise _Fail(f"eventual sign of {u} is ambiguous")
        return s in ("-", "0")

    def _initially_inside(self) -> bool:
        return self.vp.guard_poly.evaluate(self.vp.init_env()) > 0

    # rules --------------------------------------------------------------------

    def check_past(self) -> Verdict:
        v = Verdict(PAST)
        return self._run(v, self._rsm)

    def _rsm(self, v: Verdict) -> None:
        g = self.vp.guard_poly
        e = martingale_expression(self.vp, g)
        u = self.bounds.bound_expression(e, UPPER)
        if self.relaxed:
            lim = limit_at_infinity(u)
            if not lim < 0:
                raise _Fail(f"upper bound {u} of the martingale expression does not tend below 0")
        elif not self._always_nonpositive(e, strict=True):
            raise _Fail(f"martingale expression {e} is not below a negative constant from the start")
        exact = self._exact_constant(e)
        eps = -exact if exact is not None else -u
        v.result = CERTIFIED
        v.witness = Witness(RSM, e, bound=u, epsilon=eps, relaxed=self.relaxed)

    def check_ast(self) -> Verdict:
        return self._run(Verdict(AST), self._sm)

    def _sm(self, v: Verdict) -> None:
        g = self.vp.guard_poly
        e = martingale_expression(self.vp, g)
        u = self.bounds.bound_expression(e, UPPER)
        if self.relaxed:
            if not self._eventually_nonpositive(u):
                raise _Fail(f"upper bound {u} of the martingale expression is not eventually <= 0")
        elif not self._always_nonpositive(e, strict=False):
            raise _Fail(f"martingale expression {e} is not <= 0 from the start")
        for branch, p in one_step_distribution(self.vp, g, self.cap):
            diff = branch - g
            if self.relaxed:
                d = self.bounds.bound_expression(diff, UPPER)
                if not limit_at_infinity(d) < 0:
                    continue
            elif not self._always_nonpositive(diff, strict=True):
                continue
            else:
                d = self.bounds.bound_expression(diff, UPPER)
            exact = self._exact_constant(diff)
            dec = -exact if exact is not None else Fraction(1)
            v.result = CERTIFIED
            v.witness = Witness(SM, e, bound=d, branch=branch, probability=p, decrease=dec, relaxed=self.relaxed)
            return
        raise _Fail("no branch decreases the guard by a constant")

    def check_non_ast(self) -> Verdict:
        return self._run(Verdict(NON_AST), self._r_ast)

    def _difference_bound(self, m: Polynomial):
        bounds = []
        values = []
        for branch, _ in one_step_distribution(self.vp, m, self.cap):
            diff = branch - m
            bounds.append(self.bounds.absolute_bound(diff))
            values.append(self._exact_constant(diff))
        c = dominating(bounds)
        if not is_O1(c):
            raise _Fail(f"differences are not bounded: absolute bound {c}")
        if all(x is not None for x in values):
            return max(abs(x) for x in values)
        return c

    def _reach(self) -> None:
        if self.relaxed:
            if not can_reach_any_iteration(self.vp, self.signs, self.moments):
                raise _Fail("cannot show that every iteration is reached with positive probability")
        elif not self._initially_inside():
            raise _Fail("guard does not hold initially")

    def _r_ast(self, v: Verdict) -> None:
        m = -self.vp.guard_poly
        e = martingale_expression(self.vp, m)
        u = self.bounds.bound_expression(e, UPPER)
        if self.relaxed:
            if not self._eventually_nonpositive(u):
                raise _Fail(f"upper bound {u} of the martingale expression is not eventually <= 0")
            if not is_Omega1(-u):
                raise _Fail(f"epsilon {-u} vanishes")
        elif not self._always_nonpositive(e, strict=True):
            raise _Fail(f"martingale expression {e} is not below a negative constant from the start")
        self._reach()
        c = self._difference_bound(m)
        exact = self._exact_constant(e)
        eps = -exact if exact is not None else -u
        v.result = CERTIFIED
        v.witness = Witness(R_AST, e, bound=u, epsilon=eps, difference_bound=c, relaxed=self.relaxed)

    def check_non_past(self) -> Verdict:
        return self._run(Verdict(NON_PAST), self._r_past)

    def _r_past(self, v: Verdict) -> None:
        m = -self.vp.guard_poly
        e = martingale_expression(self.vp, m)
        if self.moments.split_deterministic(e):
            raise _Fail(f"martingale expression {e} is not identically 0")
        self._reach()
        c = self._difference_bound(m)
        v.result = CERTIFIED
        v.witness = Witness(R_PAST, e, bound=ExpPolynomial(), epsilon=Fraction(0), difference_bound=c, relaxed=self.relaxed)

    def _run(self, v: Verdict, rule) -> Verdict:
        try:
            rule(v)
        except _Fail as exc:
            v.diagnostics.append(str(exc))
        except (AmbiguousSign, SymbolicAmbiguity, BranchExplosion) as exc:
            v.diagnostics.append(f"{type(exc).__name__}: {exc}")
        return v

    # pre-filter and dispatch ----------------------------------------------------

    def rule_out(self) -> frozenset:
        try:
            change = expected_guard_change(self.vp, self.moments)
        except BranchExplosion:
            return frozenset()
        out = set()
        s = eventual_sign(change)
        if s == "+":
            out |= {RSM, SM}
        elif s == "0":
            out.add(RSM)
        if s in ("-", "0"):  # sign of the change of -G is + or 0
            out.add(R_AST)
        if not change.is_zero():
            out.add(R_PAST)
        return frozenset(out)

    def analyze(self, goals=GOALS) -> list:
        goals = set(goals)
        ruled = self.rule_out()
        done: dict = {}
        for goal in GOALS:
            if goal not in goals and not self._needed(goal, goals):
                continue
            done[goal] = self._decide(goal, ruled, done)
        return [done[g] for g in GOALS if g in goals]

    @staticmethod
    def _needed(goal: str, goals: set) -> bool:
        # earlier goals feed implications and contradiction checks of later ones
        if goal == PAST:
            return bool(goals & {AST, NON_AST, NON_PAST})
        if goal == AST:
            return NON_AST in goals
        if goal == NON_AST:
            return NON_PAST in goals
        return False

    def _decide(self, goal: str, ruled: frozenset, done: dict) -> Verdict:
        rule = {PAST: RSM, AST: SM, NON_AST: R_AST, NON_PAST: R_PAST}[goal]
        check = {PAST: self.check_past, AST: self.check_ast,
                 NON_AST: self.check_non_ast, NON_PAST: self.check_non_past}[goal]

        def certified(g):
            return g in done and done[g].certified

        if goal in (NON_AST, NON_PAST) and (certified(PAST) or (goal == NON_AST and certified(AST))):
            return Verdict(goal, ruled_out=ruled, diagnostics=["skipped: termination already certified"])
        if rule in ruled:
            v = Verdict(goal, ruled_out=ruled, diagnostics=[f"{rule} ruled out by the expected change of the guard"])
        else:
            v = check()
            v.ruled_out = ruled
        if not v.certified and goal == AST and certified(PAST):
            v.result = CERTIFIED
            v.witness = done[PAST].witness
            v.diagnostics.append("implied by PAST")
        if not v.certified and goal == NON_PAST and certified(NON_AST):
            v.result = CERTIFIED
            v.witness = done[NON_AST].witness
            v.diagnostics.append("implied by NonAST")
        return v


def check_past(vp, relaxed=True):
    return Analyzer(vp, relaxed).check_past()


def check_ast(vp, relaxed=True):
    return Analyzer(vp, relaxed).check_ast()


def check_non_ast(vp, relaxed=True):
    return Analyzer(vp, relaxed).check_non_ast()


def check_non_past(vp, relaxed=True):
    return Analyzer(vp, relaxed).check_non_past()


def rule_out(vp):
    return Analyzer(vp).rule_out()


def analyze(vp, goals=GOALS, relaxed=True, branch_cap=DEFAULT_BRANCH_CAP):
    return Analyzer(vp, relaxed, branch_cap).analyze(goals)
