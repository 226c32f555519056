"""Asymptotic bounding functions for monomials and polynomial expressions.

Bounds hold eventually, almost surely among runs still inside the loop, and
up to a positive constant factor.  They are returned in canonical form
``s * i**d * b**i``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exppoly import (
    ExpPolynomial,
    SignedAsymptoticClass,
    ZERO_CLASS,
    asymptotic_class,
    dominated,
    dominating,
    eventual_sign,
)
from .frontend import ValidatedProgram
from .moments import MomentEngine
from .polynomial import ONE, Polynomial
from .recurrence import FirstOrderRecurrence, solve
from .semantics import MINUS, PLUS, SignAnalysis, one_step_distribution

C1 = Polynomial.var("c1")
C2 = Polynomial.var("c2")
D = Polynomial.var("d")

UPPER, LOWER = "upper", "lower"


class AmbiguousSign(ValueError):
    pass


@dataclass(frozen=True)
class BoundingFunctions:
    lower: ExpPolynomial
    upper: ExpPolynomial
    absolute: ExpPolynomial
    exact: bool = False
    upper_candidates: tuple = ()
    lower_candidates: tuple = ()


def _zero() -> ExpPolynomial:
    return ExpPolynomial()


class BoundsEngine:
    """Bounding functions for one program, memoized per monomial."""

    def __init__(self, vp: ValidatedProgram, moments: MomentEngine | None = None,
                 signs: SignAnalysis | None = None):
        self.vp = vp
        self.moments = moments or MomentEngine(vp)
        self.signs = signs or SignAnalysis(vp, self.moments.cap)
        self._memo: dict = {}
        self._stack: set = set()

    # monomials --------------------------------------------------------------

    def bounding_functions(self, mono) -> BoundingFunctions:
        if mono in self._memo:
            return self._memo[mono]
        if mono in self._stack:
            raise AssertionError(f"cyclic bound dependency at {mono}")
        self._stack.add(mono)
        try:
            result = self._compute(mono)
        finally:
            self._stack.discard(mono)
        self._memo[mono] = result
        return result

    def _compute(self, mono) -> BoundingFunctions:
        if mono == ONE or self.moments.is_deterministic(mono):
            cf = self.moments.closed_form(mono).closed_form
            return BoundingFunctions(cf, cf, dominating([cf, -cf]), exact=True)
        if len(mono) == 1 and mono[0][1] > 1 and mono[0][1] % 2 == 1:
            name, p = mono[0]
            base = self.bounding_functions(((name, 1),))
            if not base.exact:
                lower = asymptotic_class(base.lower).realize() ** p
                upper = asymptotic_class(base.upper).realize() ** p
                return BoundingFunctions(lower, upper, dominating([upper, -lower]))
        return self._algorithm(mono)

    def _algorithm(self, mono) -> BoundingFunctions:
        dist = one_step_distribution(self.vp, Polynomial.monomial(mono), self.moments.cap)
        recs = []
        inhom_upper = []
        inhom_lower = []
        for branch, _ in dist:
            r = branch.coeff(mono)
            rest = branch - Polynomial.monomial(mono, r)
            recs.append(r)
            inhom_upper.append(self.bound_expression(rest, UPPER))
            inhom_lower.append(self.bound_expression(rest, LOWER))
        big_u = dominating(inhom_upper)
        big_l = dominated(inhom_lower)
        os = self.signs.oversign(mono)
        starts = []
        if PLUS in os:
            starts.append(C1)
        if MINUS in os:
            starts.append(-C2)
        if not starts:
            zero = _zero()
            return BoundingFunctions(zero, zero, zero)
        rates = sorted({min(recs), max(recs)})
        upper_c = tuple(solve(FirstOrderRecurrence(r, big_u * D, y0)) for r in rates for y0 in starts)
        lower_c = tuple(solve(FirstOrderRecurrence(r, big_l * D, y0)) for r in rates for y0 in starts)
        upper = dominating(upper_c)
        lower = dominated(lower_c)
        # a sign excluded by the static analysis caps the bound at zero
        if MINUS not in os and asymptotic_class(lower).sign < 0:
            lower = _zero()
        if PLUS not in os and asymptotic_class(upper).sign > 0:
            upper = _zero()
        return BoundingFunctions(lower, upper, dominating([upper, -lower]), False, upper_c, lower_c)

    # expressions ------------------------------------------------------------

    def terms(self, expr: Polynomial, direction: str) -> list:
        """Per-monomial bound terms of ``expr`` (deterministic parts exact)."""
        parts = self.moments.split_deterministic(expr)
        out = []
        for mono, coeff in parts.items():
            if mono == ONE:
                out.append(coeff)
                continue
            s = eventual_sign(coeff)
            if s == "ambiguous":
                raise AmbiguousSign(f"coefficient {coeff} of {mono} has no eventual sign")
            bf = self.bounding_functions(mono)
            want_upper = (s == "+") == (direction == UPPER)
            out.append(coeff * (bf.upper if want_upper else bf.lower))
        return out

    def bound_expression(self, expr: Polynomial, direction: str) -> ExpPolynomial:
        """Upper or lower bounding function of a polynomial in the variables and ``i``."""
        return collapse(self.terms(expr, direction), direction)

    def absolute_bound(self, expr: Polynomial) -> ExpPolynomial:
        upper = self.bound_expression(expr, UPPER)
        lower = self.bound_expression(expr, LOWER)
        return dominating([upper, -lower])


def collapse(terms, direction: str) -> ExpPolynomial:
    """Class of a sum of terms each known up to a positive factor: the largest
    magnitude wins; opposing signs at that magnitude give the safe side."""
    classes = [asymptotic_class(t, mixed=1 if direction == UPPER else -1) for t in terms]
    classes = [c for c in classes if c.sign != 0]
    if not classes:
        return _zero()
    top = max(c.magnitude() for c in classes)
    signs = {c.sign for c in classes if c.magnitude() == top}
    if len(signs) == 1:
        sign = signs.pop()
    else:
        sign = 1 if direction == UPPER else -1
    return SignedAsymptoticClass(sign, *top).realize()


def bounding_functions(vp: ValidatedProgram, mono) -> BoundingFunctions:
    return BoundsEngine(vp).bounding_functions(mono)


def bound_expression(vp: ValidatedProgram, expr: Polynomial, direction: str) -> ExpPolynomial:
    return BoundsEngine(vp).bound_expression(expr, direction)


def absolute_bound(vp: ValidatedProgram, expr: Polynomial) -> ExpPolynomial:
    return BoundsEngine(vp).absolute_bound(expr)


__all__ = [
    "AmbiguousSign", "BoundingFunctions", "BoundsEngine", "UPPER", "LOWER",
    "bounding_functions", "bound_expression", "absolute_bound", "collapse", "ZERO_CLASS",
]
