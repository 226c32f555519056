"""Exact multivariate polynomials with rational coefficients.

A monomial is a tuple of ``(name, exponent)`` pairs sorted by name, with all
exponents positive; the empty tuple is the constant monomial ``1``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

Monomial = tuple  # tuple[tuple[str, int], ...]
Scalar = Union[int, Fraction]

ONE: Monomial = ()


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


def mono_pow(a: Monomial, k: int) -> Monomial:
    if k == 0:
        return ONE
    return tuple((name, e * k) for name, e in a)


def mono_degree(a: Monomial) -> int:
    return sum(e for _, e in a)


def mono_variables(a: Monomial) -> frozenset:
    return frozenset(name for name, _ in a)


def mono_exponent(a: Monomial, name: str) -> int:
    for n, e in a:
        if n == name:
            return e
    return 0


def mono_divide(a: Monomial, b: Monomial) -> Monomial:
    """Return ``a / b``; ``b`` must divide ``a``."""
    exps = dict(a)
    for name, e in b:
        left = exps.get(name, 0) - e
        if left < 0:
            raise ValueError(f"{mono_str(b)} does not divide {mono_str(a)}")
        if left:
            exps[name] = left
        else:
            del exps[name]
    return tuple(sorted(exps.items()))


def mono_from(exps: Mapping[str, int]) -> Monomial:
    return tuple(sorted((n, e) for n, e in exps.items() if e))


def mono_str(a: Monomial) -> str:
    if not a:
        return "1"
    return "*".join(name if e == 1 else f"{name}^{e}" for name, e in a)


def _fmt_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class Polynomial:
    """Immutable polynomial; ``terms`` maps monomials to non-zero Fractions."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict = {}
        for mono, coeff in items:
            c = as_fraction(coeff)
            if c:
                clean[mono] = clean.get(mono, 0) + c
        self._terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    # construction ---------------------------------------------------------

    @classmethod
    def const(cls, value: Scalar) -> "Polynomial":
        return cls({ONE: value})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls({((name, 1),): 1})

    @classmethod
    def monomial(cls, mono: Monomial, coeff: Scalar = 1) -> "Polynomial":
        return cls({mono: coeff})

    @staticmethod
    def lift(value) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        return Polynomial.const(value)

    # inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def monomials(self) -> list:
        return list(self._terms)

    def coeff(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == ONE for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get(ONE, Fraction(0))

    def variables(self) -> frozenset:
        out: set = set()
        for m in self._terms:
            out.update(n for n, _ in m)
        return frozenset(out)

    def degree(self, name: str | None = None) -> int:
        if not self._terms:
            return -1
        if name is None:
            return max(mono_degree(m) for m in self._terms)
        return max(mono_exponent(m, name) for m in self._terms)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = Polynomial.lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-Polynomial.lift(other))

    def __rsub__(self, other) -> "Polynomial":
        return Polynomial.lift(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            return Polynomial({m: v * c for m, v in self._terms.items()})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            other = other.constant_value()
        c = as_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / c)

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"polynomial power needs a non-negative integer, got {k!r}")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def subs(self, mapping: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Simultaneous substitution of variables by polynomials."""
        if not mapping:
            return self
        cache: dict = {}
        out = Polynomial()
        for mono, c in self._terms.items():
            term = Polynomial.const(c)
            rest = []
            for name, e in mono:
                if name in mapping:
                    key = (name, e)
                    if key not in cache:
                        cache[key] = Polynomial.lift(mapping[name]) ** e
                    term = term * cache[key]
                else:
                    rest.append((name, e))
            if rest:
                term = term * Polynomial.monomial(tuple(rest))
            out = out + term
        return out

    def evaluate(self, env: Mapping[str, object]):
        """Evaluate with values from ``env`` (Fractions, floats or numpy arrays)."""
        total = 0
        for mono, c in self._terms.items():
            term = c
            for name, e in mono:
                term = term * env[name] ** e
            total = total + term
        return total

    def split(self, names: Iterable[str]) -> dict:
        """Group by the monomial over ``names``; values are polynomials in the rest."""
        names = frozenset(names)
        out: dict = {}
        for mono, c in self._terms.items():
            inner = tuple(p for p in mono if p[0] in names)
            outer = tuple(p for p in mono if p[0] not in names)
            out.setdefault(inner, {})[outer] = c
        return {m: Polynomial(t) for m, t in out.items()}

    # comparison / display ---------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sorted_terms(self) -> list:
        return sorted(
            self._terms.items(),
            key=lambda mc: (-mono_degree(mc[0]), [(n, -e) for n, e in mc[0]]),
        )

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono == ONE:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono_str(mono)
            else:
                body = f"{_fmt_coeff(a)}*{mono_str(mono)}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


ZERO_POLY = Polynomial()
