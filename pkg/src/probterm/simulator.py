"""Monte-Carlo execution of loops, used to cross-check the symbolic analysis.

Two backends share the same branch-selection scheme (64-bit uniform draws
compared against ``floor(cumulative_probability * 2**64)``):

* ``float``: numpy, vectorized over runs, float64 state.  Runs are processed
  in fixed-size blocks, each with its own substream spawned from the seed.
* ``exact``: one run at a time with Fraction state; run ``k`` uses the
  substream ``SeedSequence([seed, k])``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exppoly import ExpPolynomial
from .frontend import ValidatedProgram
from .polynomial import Polynomial

MAGNITUDE_CAP = 2.0 ** 256
BLOCK = 16384
_TWO64 = 1 << 64


def _thresholds(branches) -> list:
    cum = Fraction(0)
    out = []
    for b in branches[:-1]:
        cum += b.probability
        out.append(min(math.floor(cum * _TWO64), _TWO64 - 1))
    return out


class _Compiled:
    """Float evaluation of polynomials over numpy state arrays."""

    def __init__(self, poly: Polynomial, names: tuple):
        index = {n: k for k, n in enumerate(names)}
        self.terms = [(float(c), [(index[n], e) for n, e in mono]) for mono, c in poly.items()]

    def __call__(self, state: np.ndarray) -> np.ndarray:
        out = None
        for c, factors in self.terms:
            term = None
            for k, e in factors:
                f = state[k] if e == 1 else state[k] ** e
                term = f if term is None else term * f
            if term is None:
                term = np.full(state.shape[1], c)
            elif c != 1.0:
                term = term * c
            out = term if out is None else out + term
        return np.zeros(state.shape[1]) if out is None else out


@dataclass
class StepStat:
    i: int
    count: int
    mean: float
    var: float
    min: float
    max: float


@dataclass
class SimulationStats:
    runs: int
    max_steps: int
    seed: int
    terminated: int
    diverged: int
    termination_fraction: Fraction
    mean_steps_among_terminated: float
    per_step: dict = field(default_factory=dict)  # expr text -> list[StepStat]
    samples: dict = field(default_factory=dict)  # expr text -> {i: ndarray}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["expression", "i", "count", "mean", "variance", "min", "max"])
            for expr, rows in self.per_step.items():
                for s in rows:
                    w.writerow([expr, s.i, s.count, s.mean, s.var, s.min, s.max])


class _Accumulator:
    def __init__(self, exprs, names, track_steps, keep_samples):
        self.exprs = [(str(e), _Compiled(e, names)) for e in exprs]
        self.track_steps = track_steps
        self.keep = keep_samples
        self.parts: dict = {str(e): {} for e in exprs}

    def record(self, i: int, state: np.ndarray) -> None:
        if i > self.track_steps:
            return
        for text, f in self.exprs:
            self.parts[text].setdefault(i, []).append(f(state))

    def finish(self):
        per_step, samples = {}, {}
        for text, by_i in self.parts.items():
            rows, keep = [], {}
            for i in sorted(by_i):
                vals = np.concatenate(by_i[i])
                if self.keep:
                    keep[i] = vals
                if len(vals):
                    rows.append(StepStat(i, len(vals), float(vals.mean()), float(vals.var(ddof=1)) if len(vals) > 1 else 0.0,
                                         float(vals.min()), float(vals.max())))
                else:
                    rows.append(StepStat(i, 0, math.nan, math.nan, math.nan, math.nan))
            per_step[text] = rows
            samples[text] = keep
        return per_step, samples


class FloatStepper:
    """One loop iteration applied to a batch of states."""

    def __init__(self, vp: ValidatedProgram):
        self.names = vp.variables
        self.guard = _Compiled(vp.guard_poly, self.names)
        self.updates = []
        for k, name in enumerate(self.names):
            branches = vp.branches[name]
            fns = [_Compiled(b.expr(name), self.names) for b in branches]
            th = np.array(_thresholds(branches), dtype=np.uint64)
            self.updates.append((k, fns, th))

    def step(self, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        state = state.copy()
        n = state.shape[1]
        for k, fns, th in self.updates:
            if len(fns) == 1:
                state[k] = fns[0](state)
                continue
            draws = rng.bit_generator.random_raw(n)
            new = fns[-1](state)
            for j in range(len(fns) - 2, -1, -1):
                new = np.where(draws < th[j], fns[j](state), new)
            state[k] = new
        return state


def simulate(vp: ValidatedProgram, runs: int, max_steps: int, seed: int = 42,
             tracked: Iterable[Polynomial] = (), respect_guard: bool = True,
             track_steps: int | None = None, keep_samples: bool = False,
             backend: str = "float", cap: float = MAGNITUDE_CAP) -> SimulationStats:
    """Simulate ``runs`` executions for at most ``max_steps`` iterations.

    Tracked expressions are recorded at every ``i <= track_steps`` over the
    runs whose guard held at iterations ``0..i`` (all runs when the guard is
    ignored).
    """
    if runs <= 0 or max_steps <= 0:
        raise ValueError("runs and max_steps must be positive")
    tracked = [Polynomial.lift(e) for e in tracked]
    track_steps = max_steps if track_steps is None else track_steps
    if backend == "exact":
        return _simulate_exact(vp, runs, max_steps, seed, tracked, respect_guard, track_steps, keep_samples, cap)
    stepper = FloatStepper(vp)
    acc = _Accumulator(tracked, vp.variables, track_steps, keep_samples)
    init = np.array([float(vp.init_value(n)) for n in vp.variables])
    blocks = [(s, min(BLOCK, runs - s)) for s in range(0, runs, BLOCK)]
    streams = np.random.SeedSequence(seed).spawn(len(blocks))
    terminated = diverged = 0
    steps_total = 0
    for (start, size), ss in zip(blocks, streams):
        rng = np.random.Generator(np.random.Philox(ss))
        state = np.repeat(init[:, None], size, axis=1)
        for i in range(max_steps + 1):
            if state.shape[1] == 0:
                break
            if respect_guard:
                inside = stepper.guard(state) > 0
                done = int((~inside).sum())
                if done:
                    terminated += done
                    steps_total += done * i
                    state = state[:, inside]
            acc.record(i, state)
            if i == max_steps or state.shape[1] == 0:
                break
            state = stepper.step(state, rng)
            ok = np.all(np.isfinite(state) & (np.abs(state) <= cap), axis=0)
            if not ok.all():
                diverged += int((~ok).sum())
                state = state[:, ok]
    per_step, samples = acc.finish()
    return SimulationStats(runs, max_steps, seed, terminated, diverged, Fraction(terminated, runs),
                           steps_total / terminated if terminated else math.nan, per_step, samples)


def _exact_rules(vp: ValidatedProgram) -> list:
    rules = []
    for n in vp.variables:
        exprs = [tuple(b.expr(n).items()) for b in vp.branches[n]]
        rules.append((n, exprs, _thresholds(vp.branches[n])))
    return rules


def _eval_terms(terms, env: dict) -> Fraction:
    total = Fraction(0)
    for mono, c in terms:
        t = c
        for v, e in mono:
            t *= env[v] ** e
        total += t
    return total


def _exact_step(rules, env: dict, rng: np.random.Generator) -> None:
    for name, branches, th in rules:
        k = 0
        if len(branches) > 1:
            draw = int(rng.bit_generator.random_raw())
            while k < len(th) and draw >= th[k]:
                k += 1
        env[name] = _eval_terms(branches[k], env)


def _simulate_exact(vp, runs, max_steps, seed, tracked, respect_guard, track_steps, keep_samples, cap):
    rules = _exact_rules(vp)
    guard = tuple(vp.guard_poly.items())
    exprs = [(str(e), tuple(e.items())) for e in tracked]
    values: dict = {text: {} for text, _ in exprs}
    terminated = diverged = 0
    steps_total = 0
    bits = int(math.log2(cap))
    for run in range(runs):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, run])))
        env = vp.init_env()
        for i in range(max_steps + 1):
            if respect_guard and not _eval_terms(guard, env) > 0:
                terminated += 1
                steps_total += i
                break
            if i <= track_steps:
                for text, terms in exprs:
                    values[text].setdefault(i, []).append(float(_eval_terms(terms, env)))
            if i == max_steps:
                break
            _exact_step(rules, env, rng)
            if any(max(abs(v.numerator).bit_length(), v.denominator.bit_length()) > bits for v in env.values()):
                diverged += 1
                break
    per_step, samples = {}, {}
    for text, by_i in values.items():
        rows, keep = [], {}
        for i in sorted(by_i):
            vals = np.array(by_i[i])
            keep[i] = vals
            rows.append(StepStat(i, len(vals), float(vals.mean()), float(vals.var(ddof=1)) if len(vals) > 1 else 0.0,
                                 float(vals.min()), float(vals.max())))
        per_step[text] = rows
        samples[text] = keep if keep_samples else {}
    return SimulationStats(runs, max_steps, seed, terminated, diverged, Fraction(terminated, runs),
                           steps_total / terminated if terminated else math.nan, per_step, samples)


def sample_step(vp: ValidatedProgram, state: dict, n: int, seed: int = 42) -> dict:
    """``n`` independent one-step successors of ``state`` (guard ignored)."""
    stepper = FloatStepper(vp)
    arr = np.array([[float(state[v])] * n for v in vp.variables])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out = stepper.step(arr, rng)
    return {v: out[k] for k, v in enumerate(vp.variables)}


# empirical bound validation ---------------------------------------------------


@dataclass
class BoundCheckReport:
    monomial: str
    alpha: float | None
    beta: float | None
    checked_steps: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _fit(extreme: float, bound: float, upper: bool):
    """Positive factor ``k`` with ``sample <= k*bound`` (upper) or
    ``sample >= k*bound`` (lower) at the fitting step, with a factor-2 margin."""
    if bound == 0:
        ok = extreme <= 0 if upper else extreme >= 0
        return 1.0 if ok else None
    r = extreme / bound
    if (bound > 0) == upper:
        # sample <= k*bound with bound > 0 (or sample >= k*bound with bound < 0)
        return 2 * r if r > 0 else 1.0
    # sample <= k*bound with bound < 0 (or >= with bound > 0): k <= r
    return r / 2 if r > 0 else None


def empirical_bound_check(vp: ValidatedProgram, mono, bounds, runs: int = 10_000,
                          i_range=(16, 64), seed: int = 42, stats: SimulationStats | None = None,
                          rel_tol: float = 1e-9) -> BoundCheckReport:
    """Check ``alpha*l(i) <= m_i <= beta*u(i)`` on surviving runs over ``i_range``
    with ``alpha``, ``beta`` fitted at the first step of the range."""
    expr = Polynomial.monomial(mono)
    lo, hi = i_range
    if stats is None:
        stats = simulate(vp, runs, hi, seed, tracked=[expr], track_steps=hi, keep_samples=True)
    samples = stats.samples[str(expr)]
    lower, upper = ExpPolynomial.lift(bounds.lower), ExpPolynomial.lift(bounds.upper)
    violations = []
    alpha = beta = None
    checked = 0
    for i in range(lo, hi + 1):
        vals = samples.get(i)
        if vals is None or len(vals) == 0:
            continue
        vmin, vmax = float(vals.min()), float(vals.max())
        l_i, u_i = lower.float_value(i), upper.float_value(i)
        if bounds.exact:
            ok = abs(vmin - u_i) <= rel_tol * max(1.0, abs(u_i)) and abs(vmax - u_i) <= rel_tol * max(1.0, abs(u_i))
            if not ok:
                violations.append((i, vmin, vmax, u_i))
            checked += 1
            continue
        if alpha is None and beta is None:
            alpha, beta = _fit(vmin, l_i, upper=False), _fit(vmax, u_i, upper=True)
            if alpha is None or beta is None:
                violations.append((i, vmin, vmax, "no positive constant fits"))
                break
        tol_u = rel_tol * max(1.0, abs(beta * u_i))
        tol_l = rel_tol * max(1.0, abs(alpha * l_i))
        if vmax > beta * u_i + tol_u or vmin < alpha * l_i - tol_l:
            violations.append((i, vmin, vmax, (alpha * l_i, beta * u_i)))
        checked += 1
    return BoundCheckReport(str(expr), alpha, beta, checked, violations)


def trajectory(vp: ValidatedProgram, steps: int, seed: int = 42, run: int = 0) -> list:
    """Exact states ``0..steps`` of one run; after the guard fails the state
    repeats unchanged."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, run])))
    rules = _exact_rules(vp)
    env = vp.init_env()
    states = [dict(env)]
    for _ in range(steps):
        if vp.guard_poly.evaluate(env) > 0:
            _exact_step(rules, env, rng)
        states.append(dict(env))
    return states
