"""Exact first-order moments ``E(m_i)`` of monomials under the update dynamics.

The guard is ignored: moments describe the unconditioned process.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .exppoly import ExpPolynomial
from .frontend import ValidatedProgram
from .polynomial import ONE, Polynomial, mono_from
from .recurrence import FirstOrderRecurrence, solve
from .semantics import expected_next, one_step_distribution, DEFAULT_BRANCH_CAP, BranchExplosion

ITER = "i"


@dataclass(frozen=True)
class MomentClosedForm:
    monomial: tuple
    closed_form: ExpPolynomial
    deterministic: bool


class MomentEngine:
    """Per-program memo of monomial moments."""

    def __init__(self, vp: ValidatedProgram, cap: int = DEFAULT_BRANCH_CAP):
        self.vp = vp
        self.cap = cap
        self._memo: dict = {}
        self._det: dict = {}
        self._lock = threading.RLock()

    def closed_form(self, mono) -> MomentClosedForm:
        with self._lock:
            if mono not in self._memo:
                self._memo[mono] = self._compute(mono)
            return self._memo[mono]

    def _compute(self, mono) -> MomentClosedForm:
        if mono == ONE:
            return MomentClosedForm(ONE, ExpPolynomial.const(1), True)
        nxt = expected_next(self.vp, Polynomial.monomial(mono))
        r = nxt.coeff(mono)
        h = ExpPolynomial()
        for n, c in nxt.items():
            if n == mono:
                continue
            if self.vp.mono_key(n) >= self.vp.mono_key(mono):
                raise AssertionError("monomial dependency is not acyclic")
            h = h + self.closed_form(n).closed_form * c
        y0 = Polynomial.monomial(mono).evaluate(self.vp.init_env())
        return MomentClosedForm(mono, solve(FirstOrderRecurrence(r, h, y0)), self.is_deterministic(mono))

    def is_deterministic(self, mono) -> bool:
        """True when the monomial takes one value per iteration on every run."""
        with self._lock:
            if mono in self._det:
                return self._det[mono]
            if mono == ONE:
                return True
            try:
                dist = one_step_distribution(self.vp, Polynomial.monomial(mono), self.cap)
            except BranchExplosion:
                result = False
            else:
                result = len(dist) == 1 and all(
                    n == mono or self.is_deterministic(n) for n in dist.branches[0][0].monomials()
                )
            self._det[mono] = result
            return result

    def deterministic_variables(self) -> frozenset:
        return frozenset(v for v in self.vp.variables if self.is_deterministic(((v, 1),)))

    def expected(self, expr: Polynomial) -> ExpPolynomial:
        """Closed form of ``E(expr_i)``; ``expr`` may mention the index ``i``."""
        total = ExpPolynomial()
        for mono, c in expr.items():
            exps = dict(mono)
            k = exps.pop(ITER, 0)
            factor = ExpPolynomial.term(c, k)
            total = total + factor * self.closed_form(mono_from(exps)).closed_form
        return total

    def split_deterministic(self, expr: Polynomial) -> dict:
        """Write ``expr`` as ``sum_m c_m(i) * m`` with ``m`` over non-deterministic
        variables and ``c_m`` exact closed forms in ``i``."""
        det = self.deterministic_variables()
        out: dict = {}
        for mono, c in expr.items():
            exps = dict(mono)
            k = exps.pop(ITER, 0)
            inner = mono_from({v: e for v, e in exps.items() if v in det})
            outer = mono_from({v: e for v, e in exps.items() if v not in det})
            coeff = ExpPolynomial.term(c, k) * self.closed_form(inner).closed_form
            out[outer] = out.get(outer, ExpPolynomial()) + coeff
        return {m: c for m, c in out.items() if not c.is_zero()}


def expected_closed_form(vp: ValidatedProgram, mono) -> MomentClosedForm:
    return MomentEngine(vp).closed_form(mono)


def expected_guard_change(vp: ValidatedProgram, engine: MomentEngine | None = None) -> ExpPolynomial:
    engine = engine or MomentEngine(vp)
    eg = engine.expected(vp.guard_poly)
    return eg.shift(1) - eg
