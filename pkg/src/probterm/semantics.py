"""One-step distributions, martingale expressions and static sign facts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .frontend import ValidatedProgram
from .polynomial import ONE, Polynomial

DEFAULT_BRANCH_CAP = 4096
PLUS, MINUS = "+", "-"


class BranchExplosion(RuntimeError):
    pass


@dataclass(frozen=True)
class OneStepDistribution:
    branches: tuple  # ((Polynomial, Fraction), ...)

    def __iter__(self):
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def expectation(self) -> Polynomial:
        total = Polynomial()
        for b, p in self.branches:
            total = total + b * p
        return total


def one_step_distribution(vp: ValidatedProgram, expr: Polynomial, cap: int = DEFAULT_BRANCH_CAP) -> OneStepDistribution:
    """Distribution of ``expr`` after one iteration, in terms of the current state.

    Assignments are substituted from the last to the first so that a later
    update sees the fresh values of earlier variables.
    """
    dist: dict = {expr: Fraction(1)}
    for name in reversed(vp.variables):
        options = vp.branches[name]
        nxt: dict = {}
        for poly, p in dist.items():
            if name not in poly.variables():
                nxt[poly] = nxt.get(poly, 0) + p
                continue
            if len(nxt) + len(options) > cap:
                raise BranchExplosion(f"more than {cap} branches for {expr}")
            for b in options:
                q = poly.subs({name: b.expr(name)})
                nxt[q] = nxt.get(q, 0) + p * b.probability
        dist = nxt
    return OneStepDistribution(tuple(dist.items()))


def expected_next(vp: ValidatedProgram, expr: Polynomial) -> Polynomial:
    """``E(expr_{i+1} | F_i)`` as a polynomial in the current state."""
    for name in reversed(vp.variables):
        if name not in expr.variables():
            continue
        total = Polynomial()
        for b in vp.branches[name]:
            total = total + expr.subs({name: b.expr(name)}) * b.probability
        expr = total
    return expr


def martingale_expression(vp: ValidatedProgram, expr: Polynomial) -> Polynomial:
    return expected_next(vp, expr) - expr


class SignAnalysis:
    """Over-approximation of the signs a monomial can take during execution."""

    def __init__(self, vp: ValidatedProgram, cap: int = DEFAULT_BRANCH_CAP):
        self.vp = vp
        self.cap = cap
        self._memo: dict = {}

    def init_value(self, mono) -> Fraction:
        env = self.vp.init_env()
        return Polynomial.monomial(mono).evaluate(env)

    def oversign(self, mono) -> frozenset:
        if mono in self._memo:
            return self._memo[mono]
        if all(e % 2 == 0 for _, e in mono):
            self._memo[mono] = frozenset({PLUS})
            return self._memo[mono]
        signs = {PLUS, MINUS}
        try:
            dist = one_step_distribution(self.vp, Polynomial.monomial(mono), self.cap)
        except BranchExplosion:
            dist = None
        if dist is not None:
            m0 = self.init_value(mono)
            if m0 >= 0 and all(self._keeps(mono, b, 1) for b, _ in dist):
                signs.discard(MINUS)
            if m0 <= 0 and all(self._keeps(mono, b, -1) for b, _ in dist):
                signs.discard(PLUS)
        if len(mono) > 1:
            signs &= self._product_signs(mono)
        result = frozenset(signs)
        self._memo[mono] = result
        return result

    def _product_signs(self, mono) -> set:
        signs = {PLUS}
        for name, e in mono:
            factor = self.oversign(((name, e),))
            nxt = set()
            for a in signs:
                for b in factor:
                    nxt.add(PLUS if a == b else MINUS)
            signs = nxt
        return signs

    def _keeps(self, mono, branch: Polynomial, sign: int) -> bool:
        """Every term of ``branch`` preserves ``sign`` (1: stays >= 0, -1: <= 0)."""
        for n, c in branch.items():
            if n == mono:
                if c < 0:
                    return False
                continue
            if n == ONE:
                if c * sign < 0:
                    return False
                continue
            os = self.oversign(n)
            if c * sign > 0:
                if MINUS in os:
                    return False
            elif PLUS in os:
                return False
        return True


def oversign(vp: ValidatedProgram, mono) -> frozenset:
    return SignAnalysis(vp).oversign(mono)


def can_reach_any_iteration(vp: ValidatedProgram, signs: SignAnalysis | None = None, moments=None) -> bool:
    """Sound check that every iteration is reached with positive probability:
    the guard holds initially and some branch never decreases the guard."""
    from .exppoly import positive_from
    from .moments import MomentEngine

    signs = signs or SignAnalysis(vp)
    moments = moments or MomentEngine(vp)
    g = vp.guard_poly
    if not g.evaluate(vp.init_env()) > 0:
        return False
    for branch, _ in one_step_distribution(vp, g, signs.cap):
        if _nonnegative_always(branch - g, signs, moments, positive_from):
            return True
    return False


def _nonnegative_always(diff: Polynomial, signs: SignAnalysis, moments, positive_from) -> bool:
    parts = moments.split_deterministic(diff)
    for mono, coeff in parts.items():
        if mono == ONE:
            if not positive_from(coeff, 0, strict=False):
                return False
            continue
        os = signs.oversign(mono)
        if os <= {PLUS} and positive_from(coeff, 0, strict=False):
            continue
        if os <= {MINUS} and positive_from(-coeff, 0, strict=False):
            continue
        return False
    return True
