"""Fuzz the analyzer with random loops.

Checks that verdicts are deterministic and never contradict each other, and
optionally simulates each certified program as a soundness smoke test.
"""

import argparse
import random
import sys
import time
from dataclasses import dataclass

from probterm.frontend import load
from probterm.generate import random_program
from probterm.rules import AST, GOALS, NON_AST, NON_PAST, PAST, Analyzer
from probterm.simulator import simulate


@dataclass
class FuzzConfig:
    programs: int = 500
    seed: int = 42
    max_vars: int = 3
    max_branches: int = 3
    max_degree: int = 2
    simulate_runs: int = 0  # 0 disables the simulation check
    simulate_steps: int = 2000
    show: bool = False


def contradictory(certified: set) -> bool:
    return bool(({PAST, AST} & certified and NON_AST in certified) or {PAST, NON_PAST} <= certified)


def run(cfg: FuzzConfig) -> int:
    rng = random.Random(cfg.seed)
    problems, counts = [], {g: 0 for g in GOALS}
    t0 = time.perf_counter()
    for k in range(cfg.programs):
        source = random_program(rng, cfg.max_vars, cfg.max_branches, cfg.max_degree)
        try:
            first = Analyzer(load(source)).analyze(GOALS)
            second = Analyzer(load(source)).analyze(GOALS)
        except Exception as exc:
            problems.append((k, f"{type(exc).__name__}: {exc}", source))
            continue
        if [(v.result, v.witness) for v in first] != [(v.result, v.witness) for v in second]:
            problems.append((k, "non-deterministic verdicts", source))
        certified = {v.goal for v in first if v.certified}
        for g in certified:
            counts[g] += 1
        if contradictory(certified):
            problems.append((k, f"contradictory verdicts {sorted(certified)}", source))
        if cfg.simulate_runs and certified & {PAST, NON_AST}:
            stats = simulate(load(source), cfg.simulate_runs, cfg.simulate_steps, cfg.seed)
            frac = float(stats.termination_fraction)
            # divergent runs are dropped by the simulator and count as non-terminated
            if PAST in certified and stats.terminated + stats.diverged < cfg.simulate_runs:
                problems.append((k, f"PAST but only {frac:.3f} terminated", source))
            if NON_AST in certified and frac > 0.99:
                problems.append((k, f"NonAST but {frac:.3f} terminated", source))
        if cfg.show:
            print(f"--- program {k}: {sorted(certified)}\n{source}")
    dt = time.perf_counter() - t0
    print(f"{cfg.programs} programs in {dt:.1f} s; certified: "
          + ", ".join(f"{g} {n}" for g, n in counts.items()))
    for k, what, source in problems:
        print(f"\nprogram {k}: {what}\n{source}")
    print(f"{len(problems)} problem(s)")
    return 1 if problems else 0


def parse_args(argv=None) -> FuzzConfig:
    d = FuzzConfig()
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--programs", type=int, default=d.programs)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--max-vars", type=int, default=d.max_vars)
    p.add_argument("--max-branches", type=int, default=d.max_branches)
    p.add_argument("--max-degree", type=int, default=d.max_degree)
    p.add_argument("--simulate-runs", type=int, default=d.simulate_runs)
    p.add_argument("--simulate-steps", type=int, default=d.simulate_steps)
    p.add_argument("--show", action="store_true")
    return FuzzConfig(**vars(p.parse_args(argv)))


if __name__ == "__main__":
    sys.exit(run(parse_args()))
