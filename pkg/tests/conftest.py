from pathlib import Path

import pytest

from probterm.frontend import FrontendError, load

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIGURES = CORPUS / "figures"
BENCHMARKS = CORPUS / "benchmarks"

# lines reported by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list = []


def figure(name: str):
    return load((FIGURES / f"{name}.prob").read_text())


def corpus_programs():
    """(name, ValidatedProgram) for every analyzable corpus file."""
    out = []
    for path in sorted(CORPUS.rglob("*.prob")):
        try:
            out.append((path.stem, load(path.read_text())))
        except FrontendError:
            pass
    return out


@pytest.fixture(scope="session")
def corpus():
    return corpus_programs()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
