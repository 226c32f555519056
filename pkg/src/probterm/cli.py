"""Command-line entry point: ``probterm analyze`` and ``probterm bench``."""

from __future__ import annotations

import argparse
import json
import signal
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .exppoly import ExpPolynomial
from .frontend import FrontendError, NotProbSolvable, ParseError, load, parse_polynomial
from .polynomial import Polynomial
from .rules import AST, GOALS, NON_AST, NON_PAST, PAST, Analyzer, Verdict
from .semantics import DEFAULT_BRANCH_CAP

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = "1.0"
DEFAULT_TIMEOUT = 50.0
GOAL_FLAGS = {"past": PAST, "ast": AST, "nast": NON_AST, "npast": NON_PAST}
SECTIONS = {"past": PAST, "ast": AST, "nast": NON_AST}
MODES = ("relaxed", "light")


class AnalysisTimeout(Exception):
    pass


def _on_alarm(signum, frame):
    raise AnalysisTimeout()


# rendering --------------------------------------------------------------------


def render(value):
    if value is None:
        return None
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (Polynomial, ExpPolynomial)):
        return str(value)
    if isinstance(value, (int, float, str, bool)):
        return value
    return str(value)


def verdict_dict(v: Verdict) -> dict:
    w = v.witness
    witness = None
    if w is not None:
        witness = {
            "rule": w.rule,
            "martingale_expression": render(w.martingale_expression),
            "bound": render(w.bound),
            "epsilon": render(w.epsilon),
            "branch": render(w.branch),
            "probability": render(w.probability),
            "decrease": render(w.decrease),
            "difference_bound": render(w.difference_bound),
            "relaxed": w.relaxed,
        }
    return {
        "goal": v.goal,
        "result": v.result,
        "witness": witness,
        "ruled_out": sorted(v.ruled_out),
        "diagnostics": list(v.diagnostics),
    }


def analyze_file(path: str, goals=GOALS, relaxed: bool = True, branch_cap: int = DEFAULT_BRANCH_CAP,
                 timeout: float = DEFAULT_TIMEOUT) -> dict:
    """Analyze one file and return the JSON-ready report."""
    report = {"schema_version": SCHEMA_VERSION, "program": str(path), "relaxed": relaxed,
              "validation": {"ok": True, "error": None, "clause": None}, "verdicts": [], "timing": {}}
    t0 = time.perf_counter()
    try:
        vp = load(Path(path).read_text(encoding="utf-8"))
    except FrontendError as exc:
        report["validation"] = {"ok": False, "error": str(exc),
                                "clause": exc.clause if isinstance(exc, NotProbSolvable) else "syntax"}
        report["timing"]["parse"] = round(time.perf_counter() - t0, 6)
        return report
    t1 = time.perf_counter()
    report["timing"]["parse"] = round(t1 - t0, 6)
    use_alarm = timeout and timeout > 0 and hasattr(signal, "setitimer")
    if use_alarm:
        try:
            old = signal.signal(signal.SIGALRM, _on_alarm)
        except ValueError:  # not in the main thread
            use_alarm = False
    try:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, timeout)
        verdicts = Analyzer(vp, relaxed, branch_cap).analyze(goals)
    except AnalysisTimeout:
        verdicts = [Verdict(g, diagnostics=[f"timeout after {timeout} s"]) for g in GOALS if g in set(goals)]
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, old)
    report["verdicts"] = [verdict_dict(v) for v in verdicts]
    report["timing"]["analyze"] = round(time.perf_counter() - t1, 6)
    return report


def format_report(report: dict, witness: bool) -> str:
    lines = [f"{report['program']}"]
    val = report["validation"]
    if not val["ok"]:
        lines.append(f"  error: {val['error']}")
        return "\n".join(lines)
    for v in report["verdicts"]:
        w = v["witness"]
        mark = "✓" if v["result"] == "Certified" else "?"
        summary = f"  {mark} {v['goal']:<8} {v['result']}"
        if w:
            summary += f" ({w['rule']}-Rule"
            if w["rule"] == "SM":
                summary += f", p={w['probability']}, d={w['decrease']}"
            if w["rule"] in ("R-AST", "RSM") and w["epsilon"] is not None:
                summary += f", eps={w['epsilon']}"
            if w["rule"] in ("R-AST", "R-PAST"):
                summary += f", c={w['difference_bound']}"
            summary += ")"
        lines.append(summary)
        if witness and w:
            for key in ("martingale_expression", "bound", "epsilon", "branch", "probability", "decrease",
                        "difference_bound"):
                if w[key] is not None:
                    lines.append(f"      {key}: {w[key]}")
        if witness or not w:
            for d in v["diagnostics"]:
                lines.append(f"      note: {d}")
    return "\n".join(lines)


# analyze ----------------------------------------------------------------------


def cmd_analyze(args) -> int:
    goals = GOALS if args.goal == "all" else (GOAL_FLAGS[args.goal],)
    report = analyze_file(args.file, goals, not args.no_relaxation, args.branch_cap, args.timeout)
    if not report["validation"]["ok"]:
        if args.json:
            print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
        else:
            print(report["validation"]["error"], file=sys.stderr)
        return 2
    if args.simulate:
        report["simulation"] = _simulate(args)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(format_report(report, args.witness))
        if args.simulate:
            s = report["simulation"]
            print(f"  simulation: {s['runs']} runs x {s['max_steps']} steps (seed {s['seed']}): "
                  f"terminated {s['terminated']}, diverged {s['diverged']}, "
                  f"mean steps {s['mean_steps_among_terminated']}")
    return 0


def _simulate(args) -> dict:
    from .simulator import simulate

    vp = load(Path(args.file).read_text(encoding="utf-8"))
    runs, steps, seed = args.simulate
    tracked = [parse_polynomial(t, vp.variables) for t in args.track] or \
        [vp.guard_poly] + [Polynomial.var(v) for v in vp.variables]
    stats = simulate(vp, runs, steps, seed, tracked=tracked, track_steps=min(steps, args.track_steps))
    if args.csv:
        stats.to_csv(args.csv)
    return {
        "runs": stats.runs, "max_steps": stats.max_steps, "seed": stats.seed,
        "terminated": stats.terminated, "diverged": stats.diverged,
        "termination_fraction": str(stats.termination_fraction),
        "mean_steps_among_terminated": None if stats.terminated == 0 else round(stats.mean_steps_among_terminated, 6),
    }


# bench ------------------------------------------------------------------------


def load_manifest(path: Path) -> dict:
    """``{stem: (section, {mode: expected})}`` from an expected-results file."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    out = {}
    for section, entries in data.items():
        if section not in SECTIONS:
            continue
        for name, expected in entries.items():
            if isinstance(expected, str):
                expected = {m: expected for m in MODES}
            out[name] = (section, dict(expected))
    return out


def _outcome(report: dict, goal: str) -> str:
    if not report["validation"]["ok"]:
        return "out-of-scope"
    for v in report["verdicts"]:
        if v["goal"] == goal:
            return "certified" if v["result"] == "Certified" else "unknown"
    return "unknown"


def _bench_job(job):
    path, goal, relaxed, cap, timeout = job
    return analyze_file(path, (goal,), relaxed, cap, timeout)


def cmd_bench(args) -> int:
    root = Path(args.dir)
    manifest_path = Path(args.expected) if args.expected else root / "expected.toml"
    if not manifest_path.exists() and (root / manifest_path).exists():
        manifest_path = root / manifest_path
    if not manifest_path.exists():
        print(f"manifest not found: {manifest_path}", file=sys.stderr)
        return 2
    manifest = load_manifest(manifest_path)
    files = {p.stem: p for p in sorted(root.rglob("*.prob"))}
    modes = MODES if args.mode == "both" else (args.mode,)
    jobs, keys = [], []
    for name in sorted(manifest):
        if name not in files:
            print(f"manifest entry without program: {name}", file=sys.stderr)
            return 2
        section = manifest[name][0]
        for mode in modes:
            jobs.append((str(files[name]), SECTIONS[section], mode == "relaxed", args.branch_cap, args.timeout))
            keys.append((name, mode))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            reports = list(pool.map(_bench_job, jobs))
    else:
        reports = [_bench_job(j) for j in jobs]
    results = {}
    for (name, mode), rep in zip(keys, reports):
        results.setdefault(name, {})[mode] = (_outcome(rep, SECTIONS[manifest[name][0]]), rep)

    symbol = {"certified": "✓", "unknown": "✗", "out-of-scope": "n.a."}
    mismatches = 0
    summary = {}
    for section in SECTIONS:
        names = sorted(n for n in manifest if manifest[n][0] == section)
        if not names:
            continue
        print(f"\n{SECTIONS[section]} benchmarks")
        print(f"  {'program':<36}" + "".join(f"{m:>10}" for m in modes))
        totals = {m: 0 for m in modes}
        for name in names:
            row = f"  {name:<36}"
            for mode in modes:
                got = results[name][mode][0]
                want = manifest[name][1].get(mode)
                cell = symbol[got]
                if want is not None and want != got:
                    cell += "!"
                    mismatches += 1
                if got == "certified":
                    totals[mode] += 1
                row += f"{cell:>10}"
            print(row)
        print(f"  {'Total ✓':<36}" + "".join(f"{totals[m]:>10}" for m in modes) + f"   of {len(names)}")
        summary[section] = {"total": len(names), **{m: totals[m] for m in modes}}
    if args.json:
        out = {"schema_version": SCHEMA_VERSION, "summary": summary,
               "results": {n: {m: r[0] for m, r in v.items()} for n, v in sorted(results.items())}}
        Path(args.json).write_text(json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    if mismatches:
        print(f"\n{mismatches} verdict(s) differ from {manifest_path} (marked '!')")
        return 1
    print(f"\nall verdicts match {manifest_path}")
    return 0


# entry ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probterm", description="Termination analysis of probabilistic polynomial loops.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze one .prob file")
    a.add_argument("file")
    a.add_argument("--goal", choices=["past", "ast", "nast", "npast", "all"], default="all")
    a.add_argument("--json", action="store_true", help="print the JSON report")
    a.add_argument("--witness", action="store_true", help="show full witnesses and diagnostics")
    a.add_argument("--branch-cap", type=int, default=DEFAULT_BRANCH_CAP)
    a.add_argument("--no-relaxation", action="store_true", help="demand rule conditions from the first iteration")
    a.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    a.add_argument("--simulate", nargs=3, type=int, metavar=("RUNS", "STEPS", "SEED"))
    a.add_argument("--track", action="append", default=[], help="expression to record during simulation")
    a.add_argument("--track-steps", type=int, default=100, help="record tracked expressions up to this step")
    a.add_argument("--csv", help="write per-step simulation statistics to this file")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="run a corpus against its expected-results manifest")
    b.add_argument("dir")
    b.add_argument("--expected", help="manifest (default: DIR/expected.toml)")
    b.add_argument("--mode", choices=["relaxed", "light", "both"], default="both")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--branch-cap", type=int, default=DEFAULT_BRANCH_CAP)
    b.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    b.add_argument("--json", help="write a machine-readable summary to this file")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "simulate", None) and (args.simulate[0] <= 0 or args.simulate[1] <= 0):
        parser.error("--simulate needs positive RUNS and STEPS")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
