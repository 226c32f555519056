"""Cross-check certified verdicts against Monte-Carlo simulation.

PAST-certified programs must terminate in every run; NonAST-certified
programs must leave a visible fraction of runs inside the loop.
"""

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from probterm.frontend import FrontendError, load
from probterm.rules import GOALS, NON_AST, PAST, Analyzer
from probterm.simulator import simulate

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class SimulationConfig:
    corpus: Path = ROOT / "corpus"
    runs: int = 10_000
    past_steps: int = 1_000_000
    nast_steps: int = 10_000
    nast_threshold: float = 0.95
    seed: int = 42


def run(cfg: SimulationConfig) -> int:
    bad = 0
    print(f"{'program':<36} {'verdict':<10} {'terminated':>11} {'mean steps':>11} {'time':>7}")
    for path in sorted(cfg.corpus.rglob("*.prob")):
        try:
            vp = load(path.read_text())
        except FrontendError:
            continue
        certified = {v.goal for v in Analyzer(vp).analyze(GOALS) if v.certified}
        if PAST in certified:
            goal, steps = PAST, cfg.past_steps
        elif NON_AST in certified:
            goal, steps = NON_AST, cfg.nast_steps
        else:
            continue
        t0 = time.perf_counter()
        stats = simulate(vp, cfg.runs, steps, cfg.seed)
        frac = float(stats.termination_fraction)
        ok = stats.terminated == cfg.runs if goal == PAST else frac < cfg.nast_threshold
        bad += not ok
        mean = "-" if stats.terminated == 0 else f"{stats.mean_steps_among_terminated:.1f}"
        print(f"{path.stem:<36} {goal:<10} {frac:>11.4f} {mean:>11} {time.perf_counter() - t0:>6.1f}s"
              + ("" if ok else "  <-- inconsistent"))
    print(f"\n{bad} inconsistent program(s)")
    return 1 if bad else 0


def parse_args(argv=None) -> SimulationConfig:
    d = SimulationConfig()
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--corpus", type=Path, default=d.corpus)
    p.add_argument("--runs", type=int, default=d.runs)
    p.add_argument("--past-steps", type=int, default=d.past_steps)
    p.add_argument("--nast-steps", type=int, default=d.nast_steps)
    p.add_argument("--nast-threshold", type=float, default=d.nast_threshold)
    p.add_argument("--seed", type=int, default=d.seed)
    return SimulationConfig(**vars(p.parse_args(argv)))


if __name__ == "__main__":
    sys.exit(run(parse_args()))
