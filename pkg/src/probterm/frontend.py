"""Parser and validator for probabilistic polynomial while-loops.

Concrete syntax (see ``docs/grammar.md``)::

    x := 10
    y := 0
    while x > 0:
        y = y + 1
        x = x + y @ 1/3; x - 1

Updates are applied in the order they are written; that order is the
variable order used by the analysis.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .polynomial import ONE, Polynomial, mono_from, mono_mul

RESERVED = frozenset({"i", "while"})


class FrontendError(Exception):
    """Base class for rejected input."""


class ParseError(FrontendError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class NotProbSolvable(FrontendError):
    def __init__(self, clause: str, detail: str = ""):
        super().__init__(f"not Prob-solvable: {clause}" + (f" ({detail})" if detail else ""))
        self.clause = clause
        self.detail = detail


# AST --------------------------------------------------------------------------


@dataclass(frozen=True)
class Choice:
    expr: Polynomial
    probability: Fraction
    explicit: bool = True


@dataclass(frozen=True)
class UpdateRule:
    variable: str
    choices: tuple


@dataclass(frozen=True)
class Program:
    variables: tuple
    init: tuple  # ((name, Fraction), ...) in source order
    guard: tuple  # (P, Q) meaning P > Q
    updates: tuple

    def init_value(self, name: str) -> Fraction:
        return dict(self.init)[name]


# tokenizer / expression parser ------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?|\.\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip()) if m is None else pos
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad + 1)
        kind = m.lastgroup
        start = m.start(kind)
        tok = m.group(kind)
        toks.append(_Tok(kind, "^" if tok == "**" else tok, col0 + start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text) + 1))
    return toks


class _ExprParser:
    def __init__(self, text: str, line: int, col0: int, known: frozenset | None):
        self.toks = _tokenize(text, line, col0)
        self.pos = 0
        self.line = line
        self.known = known
        self.identifiers: list = []

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.toks[self.pos]
        raise ParseError(msg, self.line, tok.col)

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            self.error("expected an expression")
        value = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return value

    def expr(self) -> Polynomial:
        value = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Polynomial:
        value = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                value = value * rhs
            else:
                if not rhs.is_constant():
                    self.error("division is only allowed by constants", op)
                if rhs.is_zero():
                    self.error("division by zero", op)
                value = value / rhs.constant_value()
        return value

    def unary(self) -> Polynomial:
        if self.peek().text == "-":
            self.take()
            return -self.unary()
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek().text == "^":
            op = self.take()
            tok = self.take()
            if tok.kind != "num" or not tok.text.isdigit() or int(tok.text) < 1:
                self.error("exponent must be a positive integer literal", tok if tok.kind != "end" else op)
            base = base ** int(tok.text)
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "num":
            return Polynomial.const(Fraction(tok.text))
        if tok.kind == "id":
            if self.known is not None and tok.text not in self.known:
                raise ParseError(f"unknown identifier {tok.text!r}", self.line, tok.col)
            self.identifiers.append(tok)
            return Polynomial.var(tok.text)
        if tok.text == "(":
            value = self.expr()
            if self.peek().text != ")":
                self.error("expected ')'")
            self.take()
            return value
        self.error("expected a number, variable or '('" if tok.kind != "end" else "unexpected end of expression", tok)


def parse_polynomial(text: str, known=None, line: int = 1, col0: int = 0) -> Polynomial:
    """Parse a polynomial expression; ``known`` restricts the identifiers."""
    return _ExprParser(text, line, col0, frozenset(known) if known is not None else None).parse()


def _constant(text: str, line: int, col0: int, what: str) -> Fraction:
    names = [t for t in _tokenize(text, line, col0) if t.kind == "id"]
    if names:
        if what == "probability":
            raise NotProbSolvable("non-constant probability", f"line {line}: {text.strip()}")
        raise ParseError(f"{what} must be a rational constant", line, names[0].col)
    return _ExprParser(text, line, col0, None).parse().constant_value()


# program parser ---------------------------------------------------------------

_INIT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:=(.*)$")
_UPDATE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=(?!=)(.*)$")
_WHILE = re.compile(r"^while\b(.*?):?\s*$")


def _indent(raw: str) -> int:
    return len(raw) - len(raw.lstrip(" \t"))


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def parse_program(source: str) -> Program:
    """Parse loop source text into a :class:`Program` (no Prob-solvability checks
    beyond those needed to build the AST)."""
    lines = [(n + 1, _strip_comment(raw)) for n, raw in enumerate(source.splitlines())]
    lines = [(n, raw) for n, raw in lines if raw.strip()]
    init: list = []
    seen_init: dict = {}
    k = 0
    while k < len(lines) and not lines[k][1].strip().startswith("while"):
        n, raw = lines[k]
        text = raw.strip()
        m = _INIT.match(text)
        if not m:
            if _UPDATE.match(text):
                raise ParseError("assignment before the loop; use ':=' for initial values", n, _indent(raw) + 1)
            raise ParseError("expected an initializer 'name := value'", n, _indent(raw) + 1)
        name = m.group(1)
        if name in RESERVED:
            raise ParseError(f"{name!r} is a reserved name", n, _indent(raw) + 1)
        if name in seen_init:
            raise ParseError(f"variable {name!r} initialized twice", n, _indent(raw) + 1)
        col0 = _indent(raw) + m.start(2)
        value = _constant(m.group(2), n, col0, "initial value")
        seen_init[name] = value
        init.append((name, value))
        k += 1
    if k == len(lines):
        raise ParseError("missing 'while' loop", lines[-1][0] if lines else 1, 1)
    if not init:
        raise ParseError("program declares no variables", lines[k][0], 1)
    known = frozenset(seen_init)

    n, raw = lines[k]
    head_indent = _indent(raw)
    text = raw.strip()
    if not text.endswith(":"):
        raise ParseError("expected ':' after the loop guard", n, len(raw) + 1)
    guard = _parse_guard(text[len("while"):-1], n, head_indent + len("while"), known)
    k += 1

    updates: list = []
    order: list = []
    body = []
    while k < len(lines) and _indent(lines[k][1]) > head_indent:
        body.append(lines[k])
        k += 1
    if k < len(lines):
        n2, raw2 = lines[k]
        if any(r.strip().startswith("while") for _, r in lines[k:]):
            raise NotProbSolvable("sequential loops", f"second loop at line {[m for m, r in lines[k:] if r.strip().startswith('while')][0]}")
        raise ParseError("statements after the loop body are not supported", n2, _indent(raw2) + 1)
    if not body:
        raise ParseError("empty loop body", n, head_indent + 1)
    for n, raw in body:
        text = raw.strip()
        if text.startswith("while"):
            raise NotProbSolvable("nested loop", f"line {n}")
        if text.startswith("if ") or text.startswith("if("):
            raise NotProbSolvable("conditional in loop body", f"line {n}")
        m = _UPDATE.match(text)
        if not m:
            if _INIT.match(text):
                raise ParseError("initializer inside the loop body; use '='", n, _indent(raw) + 1)
            raise ParseError("expected an update 'name = branch @ p; branch'", n, _indent(raw) + 1)
        name = m.group(1)
        if name not in known:
            raise ParseError(f"unknown identifier {name!r}", n, _indent(raw) + 1)
        if name in order:
            raise ParseError(f"variable {name!r} updated twice", n, _indent(raw) + 1)
        col0 = _indent(raw) + m.start(2)
        updates.append(UpdateRule(name, _parse_choices(m.group(2), n, col0, known)))
        order.append(name)
    return Program(tuple(order), tuple(init), guard, tuple(updates))


def _parse_guard(text: str, line: int, col0: int, known) -> tuple:
    for bad, clause in ((r">=", "non-strict guard"), (r"<=", "non-strict guard"),
                        (r"==", "non-polynomial guard"), (r"!=", "non-polynomial guard"),
                        (r"\band\b|\bor\b|&&|\|\||\bnot\b", "non-polynomial guard")):
        if re.search(bad, text):
            hint = "use a strict comparison such as 'x > 0'" if clause == "non-strict guard" else "only a single comparison P > Q or P < Q is supported"
            raise NotProbSolvable(clause, hint)
    ops = [m for m in re.finditer(r"[<>]", text)]
    if len(ops) != 1:
        raise ParseError("guard must be a single comparison 'P > Q' or 'P < Q'", line, col0 + 1)
    op = ops[0]
    lhs = parse_polynomial(text[: op.start()], known, line, col0)
    rhs = parse_polynomial(text[op.end():], known, line, col0 + op.end())
    return (lhs, rhs) if op.group() == ">" else (rhs, lhs)


def _parse_choices(text: str, line: int, col0: int, known) -> tuple:
    segments = []
    start = 0
    for m in re.finditer(";", text):
        segments.append((start, text[start: m.start()]))
        start = m.end()
    segments.append((start, text[start:]))
    parsed = []
    for idx, (off, seg) in enumerate(segments):
        last = idx == len(segments) - 1
        if "@" in seg:
            at = seg.index("@")
            expr_text, prob_text = seg[:at], seg[at + 1:]
            prob = _constant(prob_text, line, col0 + off + at + 1, "probability")
            if prob < 0 or prob > 1:
                raise ParseError(f"probability {prob} outside [0, 1]", line, col0 + off + at + 2)
            explicit = True
        else:
            if not last:
                raise ParseError("every branch but the last needs '@ probability'", line, col0 + off + len(seg) + 1)
            expr_text, prob, explicit = seg, None, False
        expr = parse_polynomial(expr_text, known, line, col0 + off)
        parsed.append((expr, prob, explicit))
    total = sum((p for _, p, e in parsed if e), Fraction(0))
    if total > 1:
        raise NotProbSolvable("probabilities sum > 1", f"line {line}: total {total}")
    choices = []
    for expr, prob, explicit in parsed:
        if not explicit:
            if len(parsed) > 1 and total >= 1:
                raise NotProbSolvable("probabilities sum > 1", f"line {line}: explicit total {total} leaves nothing for the last branch")
            prob = 1 - total
        choices.append(Choice(expr, prob, explicit))
    if parsed[-1][2] and total != 1:
        raise NotProbSolvable("probabilities do not sum to 1", f"line {line}: total {total}")
    return tuple(choices)


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def pretty(program: Program) -> str:
    """Render a program in the concrete syntax accepted by :func:`parse_program`."""
    out = [f"{name} := {_fmt_fraction(v)}" for name, v in program.init]
    p, q = program.guard
    out.append(f"while {p} > {q}:")
    for rule in program.updates:
        parts = []
        for ch in rule.choices:
            parts.append(f"{ch.expr} @ {_fmt_fraction(ch.probability)}" if ch.explicit else str(ch.expr))
        out.append(f"    {rule.variable} = " + "; ".join(parts))
    return "\n".join(out) + "\n"


# validation -------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """``coefficient * x + rest`` taken with ``probability``."""

    coefficient: Fraction
    rest: Polynomial
    probability: Fraction

    def expr(self, name: str) -> Polynomial:
        return Polynomial.var(name) * self.coefficient + self.rest


@dataclass(frozen=True)
class ValidatedProgram:
    program: Program
    guard_poly: Polynomial
    branches: dict = field(hash=False)  # name -> tuple[Branch] (positive probability only)

    @property
    def variables(self) -> tuple:
        return self.program.variables

    def init_value(self, name: str) -> Fraction:
        return self.program.init_value(name)

    def init_env(self) -> dict:
        return dict(self.program.init)

    def update_choices(self, name: str) -> tuple:
        return self.branches[name]

    def mono_key(self, mono) -> tuple:
        """Total order on monomials: exponent vectors compared from the last
        variable to the first."""
        exps = dict(mono)
        return tuple(exps.get(v, 0) for v in reversed(self.variables))

    def substitution_images(self, mono) -> set:
        """Monomials that can occur in the one-step image of ``mono``."""
        current = {mono}
        for name in reversed(self.variables):
            images = set()
            for b in self.branches[name]:
                images |= {m for m in b.expr(name).monomials()}
            nxt = set()
            for m in current:
                e = dict(m).get(name, 0)
                if not e:
                    nxt.add(m)
                    continue
                rest = mono_from({k: v for k, v in m if k != name})
                for combo in itertools.combinations_with_replacement(sorted(images), e):
                    acc = rest
                    for part in combo:
                        acc = mono_mul(acc, part)
                    nxt.add(acc)
            current = nxt
        return current

    @cached_property
    def monomial_universe(self) -> tuple:
        return self.closure(self.guard_poly.monomials())

    def closure(self, monos) -> tuple:
        seen = set()
        stack = [m for m in monos if m != ONE]
        while stack:
            m = stack.pop()
            if m in seen:
                continue
            seen.add(m)
            for n in self.substitution_images(m):
                if n != ONE and n not in seen:
                    if self.mono_key(n) > self.mono_key(m):
                        raise AssertionError("monomial dependency is not acyclic")
                    stack.append(n)
        return tuple(sorted(seen, key=self.mono_key))


def validate(program: Program) -> ValidatedProgram:
    """Check the Prob-solvable restrictions and build the analysis view."""
    names = program.variables
    declared = {n for n, _ in program.init}
    for name in declared - set(names):
        raise NotProbSolvable("missing update", f"variable {name} has an initial value but no update")
    for name in set(names) - declared:
        raise NotProbSolvable("missing initial value", f"variable {name}")
    guard = program.guard[0] - program.guard[1]
    if not guard.variables() <= declared:
        raise NotProbSolvable("non-polynomial guard", "guard mentions undeclared names")
    branches = {}
    for j, rule in enumerate(program.updates):
        x = rule.variable
        earlier = set(names[:j])
        total = sum((ch.probability for ch in rule.choices), Fraction(0))
        if total > 1 or any(ch.probability < 0 for ch in rule.choices):
            raise NotProbSolvable("probabilities sum > 1", f"update of {x}: total {total}")
        if total != 1:
            raise NotProbSolvable("probabilities do not sum to 1", f"update of {x}: total {total}")
        out = []
        for ch in rule.choices:
            split = ch.expr.split([x])
            coeff = Polynomial()
            rest = Polynomial()
            for mono, part in split.items():
                e = dict(mono).get(x, 0)
                if e == 0:
                    rest = rest + part
                elif e == 1:
                    coeff = coeff + part
                else:
                    raise NotProbSolvable("non-linear self-dependence", f"{x} = {ch.expr}")
            if not coeff.is_constant():
                raise NotProbSolvable("non-linear self-dependence", f"{x} = {ch.expr}")
            later = rest.variables() - earlier
            if later:
                raise NotProbSolvable("forward reference", f"{x} = {ch.expr} uses {', '.join(sorted(later))}")
            a = coeff.constant_value()
            if a < 0:
                raise NotProbSolvable("negative self-coefficient", f"{x} = {ch.expr}")
            if ch.probability > 0:
                out.append(Branch(a, rest, ch.probability))
        branches[x] = tuple(out)
    return ValidatedProgram(program, guard, branches)


def load(source: str) -> ValidatedProgram:
    return validate(parse_program(source))
