"""Exponential polynomials in the iteration index ``i`` and their asymptotics.

An :class:`ExpPolynomial` is ``sum_j p_j(i) * b_j**i`` with positive rational
bases, plus finitely many point overrides (``f(k) = v`` for small ``k``), which
is how terms with base 0 and the ``r = 0`` recurrence solutions are kept exact.
Coefficients are :class:`Polynomial` values over the positive symbolic
constants ``c1``, ``c2`` and ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .polynomial import ONE, Polynomial, as_fraction

SYMBOLS = ("c1", "c2", "d")
INF = float("inf")
NEG_INF = float("-inf")


class SymbolicAmbiguity(ValueError):
    """The answer depends on the values of the symbolic constants."""


def coeff_sign(c: Polynomial) -> str:
    """Sign of a coefficient over positive symbols: '+', '-', '0' or '?'."""
    if c.is_zero():
        return "0"
    signs = {v > 0 for _, v in c.items()}
    if signs == {True}:
        return "+"
    if signs == {False}:
        return "-"
    return "?"


def _binom_shift(coeffs: Mapping[int, Polynomial], k: int) -> dict:
    """Coefficients of p(i + k) given those of p(i)."""
    out: dict = {}
    for deg, c in coeffs.items():
        for n in range(deg + 1):
            term = c * (math.comb(deg, n) * Fraction(k) ** (deg - n))
            out[n] = out.get(n, Polynomial()) + term
    return {n: c for n, c in out.items() if not c.is_zero()}


class ExpPolynomial:
    __slots__ = ("_terms", "_overrides", "_hash")

    def __init__(self, terms: Mapping | Iterable = (), overrides: Mapping | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        regular: dict = {}
        zero_base: dict = {}
        for (base, deg), coeff in items:
            base = as_fraction(base)
            coeff = Polynomial.lift(coeff)
            if base < 0:
                raise ValueError(f"negative base {base}")
            if deg < 0:
                raise ValueError(f"negative degree {deg}")
            if coeff.is_zero():
                continue
            if base == 0:
                # 0**i * i**deg is non-zero only at i = 0 (and only for deg = 0)
                if deg == 0:
                    zero_base[0] = zero_base.get(0, Polynomial()) + coeff
                continue
            key = (base, deg)
            regular[key] = regular.get(key, Polynomial()) + coeff
        self._terms = {k: c for k, c in regular.items() if not c.is_zero()}
        pinned = {int(k): Polynomial.lift(v) for k, v in (overrides or {}).items()}
        for k, extra in zero_base.items():
            pinned[k] = pinned.get(k, self._regular_at(k)) + extra
        self._overrides = {}
        for k, v in pinned.items():
            if k < 0:
                raise ValueError("override index must be non-negative")
            if v != self._regular_at(k):
                self._overrides[k] = v
        self._hash = None

    # construction ---------------------------------------------------------

    @classmethod
    def const(cls, value) -> "ExpPolynomial":
        return cls({(Fraction(1), 0): Polynomial.lift(value)})

    @classmethod
    def term(cls, coeff=1, degree: int = 0, base=1) -> "ExpPolynomial":
        return cls({(as_fraction(base), degree): Polynomial.lift(coeff)})

    @classmethod
    def lift(cls, value) -> "ExpPolynomial":
        if isinstance(value, ExpPolynomial):
            return value
        return cls.const(value)

    @classmethod
    def from_poly_in_i(cls, p: Polynomial, name: str = "i") -> "ExpPolynomial":
        """Interpret a polynomial whose only variables are ``name`` and symbols."""
        terms: dict = {}
        for mono, c in p.items():
            deg = 0
            rest = []
            for n, e in mono:
                if n == name:
                    deg = e
                else:
                    rest.append((n, e))
            key = (Fraction(1), deg)
            terms[key] = terms.get(key, Polynomial()) + Polynomial.monomial(tuple(rest), c)
        return cls(terms)

    # inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def overrides(self) -> dict:
        return dict(self._overrides)

    def _regular_at(self, i: int) -> Polynomial:
        total = Polynomial()
        for (base, deg), c in self._terms.items():
            total = total + c * (Fraction(i) ** deg * base ** i)
        return total

    def at(self, i: int) -> Polynomial:
        """Exact value at ``i`` (a polynomial in the symbolic constants)."""
        if i in self._overrides:
            return self._overrides[i]
        return self._regular_at(i)

    def value(self, i: int, env: Mapping[str, Fraction] | None = None) -> Fraction:
        v = self.at(i)
        if v.is_constant():
            return v.constant_value()
        env = env or {}
        return as_fraction(v.evaluate({s: as_fraction(env.get(s, 1)) for s in SYMBOLS}))

    def float_value(self, i: int, env: Mapping[str, float] | None = None) -> float:
        if i in self._overrides:
            return float(self.value(i, env))
        env = env or {}
        sym = {s: float(env.get(s, 1.0)) for s in SYMBOLS}
        total = 0.0
        for (base, deg), c in self._terms.items():
            total += float(c.evaluate(sym)) * float(i) ** deg * float(base) ** i
        return total

    def is_zero(self) -> bool:
        return not self._terms and not self._overrides

    def is_eventually_zero(self) -> bool:
        return not self._terms

    def symbols(self) -> frozenset:
        out: set = set()
        for c in self._terms.values():
            out |= c.variables()
        for c in self._overrides.values():
            out |= c.variables()
        return frozenset(out)

    def is_constant(self) -> bool:
        return not self._overrides and all(k == (1, 0) for k in self._terms)

    def constant_value(self) -> Polynomial:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get((Fraction(1), 0), Polynomial())

    def max_override(self) -> int:
        return max(self._overrides, default=-1)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "ExpPolynomial":
        other = ExpPolynomial.lift(other)
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, Polynomial()) + c
        keys = set(self._overrides) | set(other._overrides)
        return ExpPolynomial(terms, {k: self.at(k) + other.at(k) for k in keys})

    __radd__ = __add__

    def __neg__(self) -> "ExpPolynomial":
        return ExpPolynomial(
            {k: -c for k, c in self._terms.items()},
            {k: -v for k, v in self._overrides.items()},
        )

    def __sub__(self, other) -> "ExpPolynomial":
        return self + (-ExpPolynomial.lift(other))

    def __rsub__(self, other) -> "ExpPolynomial":
        return ExpPolynomial.lift(other) - self

    def __mul__(self, other) -> "ExpPolynomial":
        if not isinstance(other, ExpPolynomial):
            c = Polynomial.lift(other)
            return ExpPolynomial(
                {k: v * c for k, v in self._terms.items()},
                {k: v * c for k, v in self._overrides.items()},
            )
        terms: dict = {}
        for (b1, d1), c1 in self._terms.items():
            for (b2, d2), c2 in other._terms.items():
                key = (b1 * b2, d1 + d2)
                terms[key] = terms.get(key, Polynomial()) + c1 * c2
        keys = set(self._overrides) | set(other._overrides)
        return ExpPolynomial(terms, {k: self.at(k) * other.at(k) for k in keys})

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExpPolynomial":
        return self * (1 / as_fraction(other))

    def __pow__(self, k: int) -> "ExpPolynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a non-negative integer")
        out = ExpPolynomial.const(1)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "ExpPolynomial":
        """Return ``i -> f(i + k)``; for negative ``k`` the first ``-k`` values are
        left to the regular part and callers pin them with overrides."""
        by_base: dict = {}
        for (base, deg), c in self._terms.items():
            by_base.setdefault(base, {})[deg] = c
        terms: dict = {}
        for base, coeffs in by_base.items():
            factor = base ** k
            for deg, c in _binom_shift(coeffs, k).items():
                terms[(base, deg)] = terms.get((base, deg), Polynomial()) + c * factor
        overrides = {j - k: v for j, v in self._overrides.items() if j - k >= 0}
        return ExpPolynomial(terms, overrides)

    def with_overrides(self, values: Mapping[int, Polynomial]) -> "ExpPolynomial":
        merged = dict(self._overrides)
        merged.update({k: Polynomial.lift(v) for k, v in values.items()})
        return ExpPolynomial(self._terms, merged)

    def regular(self) -> "ExpPolynomial":
        return ExpPolynomial(self._terms)

    def subs_symbols(self, env: Mapping[str, Polynomial]) -> "ExpPolynomial":
        return ExpPolynomial(
            {k: c.subs(env) for k, c in self._terms.items()},
            {k: v.subs(env) for k, v in self._overrides.items()},
        )

    # comparison / display -------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Polynomial)):
            other = ExpPolynomial.const(other)
        if not isinstance(other, ExpPolynomial):
            return NotImplemented
        return self._terms == other._terms and self._overrides == other._overrides

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._terms.items()), frozenset(self._overrides.items())))
        return self._hash

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for (base, deg), c in sorted(self._terms.items(), reverse=True):
            factors = []
            if deg == 1:
                factors.append("i")
            elif deg > 1:
                factors.append(f"i^{deg}")
            if base != 1:
                factors.append(_base_str(base))
            sign = coeff_sign(c)
            if c.is_constant() or len(c.terms) == 1:
                neg = next(iter(c.terms.values())) < 0
                mag = -c if neg else c
                if factors and mag == Polynomial.const(1):
                    body = "*".join(factors)
                else:
                    body = "*".join([str(mag)] + factors)
                parts.append(("-" if neg else "+", body))
            else:
                del sign
                parts.append(("+", "*".join([f"({c})"] + factors)))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1] if parts else "0"
        for s, body in parts[1:]:
            text += f" {s} {body}"
        if self._overrides:
            pins = ", ".join(f"i={k}: {v}" for k, v in sorted(self._overrides.items()))
            text += f" [{pins}]"
        return text

    def __repr__(self) -> str:
        return f"ExpPolynomial({str(self)!r})"


def _base_str(base: Fraction) -> str:
    if base.denominator == 1:
        return f"{base.numerator}^i"
    if base.numerator == 1:
        return f"{base.denominator}^(-i)"
    return f"({base.numerator}/{base.denominator})^i"


# asymptotic classes -----------------------------------------------------------


@dataclass(frozen=True)
class SignedAsymptoticClass:
    """``sign * i**degree * base**i`` up to a positive constant."""

    sign: int  # -1, 0, 1
    base: Fraction = Fraction(0)
    degree: int = 0

    def key(self) -> tuple:
        if self.sign > 0:
            return (1, self.base, self.degree)
        if self.sign < 0:
            return (-1, -self.base, -self.degree)
        return (0, 0, 0)

    def __lt__(self, other: "SignedAsymptoticClass") -> bool:
        return self.key() < other.key()

    def __le__(self, other: "SignedAsymptoticClass") -> bool:
        return self.key() <= other.key()

    def magnitude(self) -> tuple:
        return (self.base, self.degree)

    def realize(self) -> ExpPolynomial:
        if self.sign == 0:
            return ExpPolynomial()
        return ExpPolynomial.term(self.sign, self.degree, self.base)

    def __str__(self) -> str:
        return str(self.realize())


ZERO_CLASS = SignedAsymptoticClass(0)


def leading(f: ExpPolynomial):
    """Leading ``((base, degree), coefficient)`` or ``None`` for eventually-zero f."""
    if not f.terms:
        return None
    key = max(f.terms)
    return key, f.terms[key]


def asymptotic_class(f: ExpPolynomial, mixed: int = 0) -> SignedAsymptoticClass:
    """Class of ``f``; a mixed symbolic leading coefficient takes sign ``mixed``
    (or raises :class:`SymbolicAmbiguity` when ``mixed`` is 0)."""
    lead = leading(f)
    if lead is None:
        return ZERO_CLASS
    (base, deg), c = lead
    s = coeff_sign(c)
    if s == "?":
        if not mixed:
            raise SymbolicAmbiguity(f"sign of {c} depends on the symbolic constants")
        sign = mixed
    else:
        sign = 1 if s == "+" else -1
    return SignedAsymptoticClass(sign, base, deg)


def eventual_sign(f: ExpPolynomial) -> str:
    """'+', '-', '0' or 'ambiguous' for all sufficiently large ``i``."""
    lead = leading(f)
    if lead is None:
        return "0"
    s = coeff_sign(lead[1])
    return "ambiguous" if s == "?" else s


def limit_at_infinity(f: ExpPolynomial):
    """Exact limit as ``i -> oo``: a Fraction, ``INF`` or ``NEG_INF``."""
    lead = leading(f)
    if lead is None:
        return Fraction(0)
    (base, deg), c = lead
    if base < 1:
        return Fraction(0)
    if base == 1 and deg == 0:
        if not c.is_constant():
            raise SymbolicAmbiguity(f"limit {c} depends on the symbolic constants")
        return c.constant_value()
    s = coeff_sign(c)
    if s == "?":
        raise SymbolicAmbiguity(f"sign of {c} depends on the symbolic constants")
    return INF if s == "+" else NEG_INF


def dominating(fs: Iterable[ExpPolynomial]) -> ExpPolynomial:
    """Canonical ``s * i**d * b**i`` eventually above every member modulo a constant."""
    classes = [asymptotic_class(f, mixed=1) for f in fs]
    if not classes:
        raise ValueError("dominating of an empty set")
    return max(classes, key=SignedAsymptoticClass.key).realize()


def dominated(fs: Iterable[ExpPolynomial]) -> ExpPolynomial:
    """Canonical function eventually below every member modulo a constant."""
    classes = [asymptotic_class(f, mixed=-1) for f in fs]
    if not classes:
        raise ValueError("dominated of an empty set")
    return min(classes, key=SignedAsymptoticClass.key).realize()


def is_O1(f: ExpPolynomial) -> bool:
    lead = leading(f)
    if lead is None:
        return True
    base, deg = lead[0]
    return base < 1 or (base == 1 and deg == 0)


def is_Omega1(f: ExpPolynomial) -> bool:
    lead = leading(f)
    if lead is None:
        return False
    return lead[0][0] >= 1


# all-i sign certification -----------------------------------------------------

_MAX_THRESHOLD = 4096


def _tail_threshold(f: ExpPolynomial, start: int):
    """Index from which the leading term strictly outweighs all other terms,
    or ``None`` if no such index is found below the search cap."""
    (lb, ld), lc = leading(f)
    lead_mag = abs(lc.constant_value())
    others = []
    mono = max(start, 1)
    for (b, d), c in f.terms.items():
        if (b, d) == (lb, ld):
            continue
        ratio = abs(c.constant_value()) / lead_mag
        e = d - ld
        q = b / lb
        if q < 1 and e > 0:
            mono = max(mono, math.ceil(e / math.log(1 / float(q))) + 1)
        others.append((ratio, e, q))
    i = max(mono, f.max_override() + 1)
    while i <= _MAX_THRESHOLD:
        total = sum(r * Fraction(i) ** e * q ** i for r, e, q in others)
        if total < 1:
            return i
        i = max(i + 1, i * 2)
    return None


def positive_from(f: ExpPolynomial, start: int = 0, strict: bool = True) -> bool:
    """Certify ``f(i) > 0`` (or ``>= 0``) for every ``i >= start``.

    Sound but incomplete: returns False when it cannot certify.  ``f`` must be
    free of symbolic constants.
    """
    if f.symbols():
        raise SymbolicAmbiguity("cannot certify signs with symbolic constants")
    lead = leading(f)
    if lead is None:
        values = [v.constant_value() for k, v in f.overrides.items() if k >= start]
        if strict:
            return False
        return all(v >= 0 for v in values)
    if coeff_sign(lead[1]) != "+":
        return False
    threshold = _tail_threshold(f, start)
    if threshold is None:
        return False
    for i in range(start, threshold):
        v = f.value(i)
        if v < 0 or (strict and v == 0):
            return False
    return True


def bounded_above_by_negative(f: ExpPolynomial, start: int = 0) -> bool:
    """Certify ``sup_{i >= start} f(i) < 0``."""
    lim = limit_at_infinity(f)
    if not lim < 0:
        return False
    return positive_from(-f, start, strict=True)
