"""Random Prob-solvable loops for fuzzing and property tests."""

from __future__ import annotations

import random
from fractions import Fraction

NAMES = ("x", "y", "z")
PROBS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4), Fraction(1, 5))
SELF_COEFFS = (Fraction(1), Fraction(1), Fraction(1), Fraction(2), Fraction(1, 2), Fraction(0))


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _poly(rng: random.Random, names, max_degree: int, max_terms: int) -> str:
    """A small random polynomial over ``names`` rendered in source syntax."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        c = rng.choice((-3, -2, -1, -1, 1, 1, 2, 3))
        factors = []
        if names:
            for _ in range(rng.randint(0, max_degree)):
                factors.append(rng.choice(names))
        body = "*".join([str(abs(c))] + factors) if abs(c) != 1 or not factors else "*".join(factors)
        terms.append(("-" if c < 0 else "+", body))
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for s, body in terms[1:]:
        text += f" {s} {body}"
    return text


def random_program(rng: random.Random, max_vars: int = 3, max_branches: int = 3, max_degree: int = 2) -> str:
    """Source text of a random valid loop."""
    names = list(NAMES[: rng.randint(1, max_vars)])
    lines = [f"{n} := {rng.randint(-3, 10)}" for n in names]
    guard = _poly(rng, names, max_degree, 2)
    op = rng.choice((">", "<"))
    lines.append(f"while {guard} {op} {rng.randint(-5, 20)}:")
    for j, n in enumerate(names):
        earlier = names[:j]
        k = rng.randint(1, max_branches)
        probs = []
        left = Fraction(1)
        for _ in range(k - 1):
            options = [p for p in PROBS if p < left]
            if not options:
                break
            p = rng.choice(options)
            probs.append(p)
            left -= p
        branches = []
        for _ in range(len(probs) + 1):
            a = rng.choice(SELF_COEFFS)
            rest = _poly(rng, earlier, max_degree, 2)
            if a == 0:
                branches.append(rest)
            elif a == 1:
                branches.append(f"{n} - {rest[1:]}" if rest.startswith("-") else f"{n} + {rest}")
            else:
                branches.append(f"{_frac(a)}*{n} - {rest[1:]}" if rest.startswith("-") else f"{_frac(a)}*{n} + {rest}")
        parts = [f"{b} @ {_frac(p)}" for b, p in zip(branches, probs)] + [branches[-1]]
        lines.append(f"    {n} = " + "; ".join(parts))
    return "\n".join(lines) + "\n"
