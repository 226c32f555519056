"""Closed forms of first-order linear recurrences ``y(i+1) = r*y(i) + h(i)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exppoly import ExpPolynomial
from .polynomial import Polynomial, as_fraction


@dataclass(frozen=True)
class FirstOrderRecurrence:
    r: Fraction
    h: ExpPolynomial
    y0: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "r", as_fraction(self.r))
        object.__setattr__(self, "h", ExpPolynomial.lift(self.h))
        object.__setattr__(self, "y0", Polynomial.lift(self.y0))
        if self.r < 0:
            raise ValueError("recurrence coefficient must be non-negative")

    def iterate(self, n: int) -> list:
        """Exact values ``y(0..n)`` by direct iteration."""
        values = [self.y0]
        for i in range(n):
            values.append(values[-1] * self.r + self.h.at(i))
        return values


def _particular(base: Fraction, coeffs: dict, r: Fraction) -> dict:
    """Polynomial q with ``base*q(i+1) - r*q(i) = p(i)``; coefficients by degree."""
    top = max(coeffs)
    zero = Polynomial()
    q: dict = {}
    if base != r:
        for n in range(top, -1, -1):
            acc = coeffs.get(n, zero)
            for k in range(n + 1, top + 1):
                if k in q:
                    acc = acc - q[k] * (base * math.comb(k, n))
            q[n] = acc / (base - r)
    else:
        # resonance: q has one degree more and no constant term
        for n in range(top, -1, -1):
            acc = coeffs.get(n, zero) / r
            for k in range(n + 2, top + 2):
                if k in q:
                    acc = acc - q[k] * math.comb(k, n)
            q[n + 1] = acc / (n + 1)
    return {k: v for k, v in q.items() if not v.is_zero()}


def solve(rec: FirstOrderRecurrence) -> ExpPolynomial:
    """Exact closed form ``s`` with ``s(0) = y0`` and ``s(i+1) = r*s(i) + h(i)``."""
    r, h, y0 = rec.r, rec.h, rec.y0
    if r == 0:
        pins = {0: y0}
        pins.update({k + 1: v for k, v in h.overrides.items()})
        s = h.regular().shift(-1).with_overrides(pins)
    else:
        by_base: dict = {}
        for (base, deg), c in h.terms.items():
            by_base.setdefault(base, {})[deg] = c
        terms: dict = {}
        for base, coeffs in by_base.items():
            for deg, c in _particular(base, coeffs, r).items():
                terms[(base, deg)] = c
        part = ExpPolynomial(terms)
        last = h.max_override()
        exact = rec.iterate(last + 1)
        amp = (exact[last + 1] - part.at(last + 1)) / (r ** (last + 1))
        s = part + ExpPolynomial.term(amp, 0, r)
        s = s.with_overrides({k: exact[k] for k in range(last + 1)})
    check = s.shift(1) - s * r - h
    if not check.is_zero() or s.at(0) != y0:
        raise ArithmeticError(f"closed form {s} does not satisfy the recurrence")
    return s
