"""Reproduce the benchmark tables: verdict per program in relaxed and light mode."""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from probterm.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class TablesConfig:
    corpus: Path = ROOT / "corpus"
    jobs: int = 1
    timeout: float = 50.0
    json_out: Path | None = None


def run(cfg: TablesConfig) -> int:
    argv = ["bench", str(cfg.corpus), "--mode", "both", "--jobs", str(cfg.jobs), "--timeout", str(cfg.timeout)]
    if cfg.json_out:
        argv += ["--json", str(cfg.json_out)]
    return cli_main(argv)


def parse_args(argv=None) -> TablesConfig:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--corpus", type=Path, default=TablesConfig.corpus)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timeout", type=float, default=50.0)
    p.add_argument("--json", dest="json_out", type=Path)
    return TablesConfig(**vars(p.parse_args(argv)))


if __name__ == "__main__":
    sys.exit(run(parse_args()))
