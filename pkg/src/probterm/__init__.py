"""Automated termination analysis of probabilistic polynomial while-loops."""

from .exppoly import ExpPolynomial, dominated, dominating, eventual_sign, is_O1, is_Omega1, limit_at_infinity
from .frontend import NotProbSolvable, ParseError, load, parse_program, validate
from .polynomial import Polynomial
from .rules import Analyzer, Verdict, analyze

__all__ = [
    "Analyzer", "ExpPolynomial", "NotProbSolvable", "ParseError", "Polynomial", "Verdict",
    "analyze", "dominated", "dominating", "eventual_sign", "is_O1", "is_Omega1",
    "limit_at_infinity", "load", "parse_program", "validate",
]
__version__ = "0.1.0"
