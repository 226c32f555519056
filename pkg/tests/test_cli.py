import json
import subprocess
import sys

import pytest

from probterm.cli import analyze_file, main

from conftest import CORPUS, FIGURES


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_text(capsys):
    code, out, _ = run(["analyze", str(FIGURES / "fig1a.prob")], capsys)
    assert code == 0
    assert "AST      Certified (SM-Rule, p=1/2, d=1)" in out
    assert "NonPAST  Certified" in out


def test_analyze_witness(capsys):
    code, out, _ = run(["analyze", str(FIGURES / "fig1c.prob"), "--goal", "past", "--witness"], capsys)
    assert code == 0
    assert "martingale_expression: -x^2 - 2" in out


def test_json_report_round_trips(capsys):
    code, out, _ = run(["analyze", str(FIGURES / "fig1b.prob"), "--json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == "1.0"
    again = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)
    assert again == out.rstrip("\n")
    goals = {v["goal"]: v for v in report["verdicts"]}
    assert goals["NonAST"]["result"] == "Certified"
    assert goals["NonAST"]["witness"]["epsilon"] == "1/2"


def test_no_relaxation_flag(capsys):
    _, out, _ = run(["analyze", str(FIGURES / "fig1d.prob"), "--json", "--no-relaxation"], capsys)
    report = json.loads(out)
    assert report["relaxed"] is False
    assert all(v["result"] == "Unknown" for v in report["verdicts"])


def test_frontend_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.prob"
    bad.write_text("x := 1\nwhile x > 0:\n    x = x^2\n")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 2 and "non-linear self-dependence" in err
    code, out, _ = run(["analyze", str(bad), "--json"], capsys)
    assert code == 2 and json.loads(out)["validation"]["clause"] == "non-linear self-dependence"
    bad.write_text("x := 1\nwhile x > 0\n")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 2 and "line 2" in err


def test_simulate_and_csv(tmp_path, capsys):
    path = tmp_path / "sim.csv"
    code, out, _ = run(["analyze", str(FIGURES / "fig1c.prob"), "--json", "--simulate", "1000", "500", "42",
                        "--track", "x^2 + y^2", "--track-steps", "10", "--csv", str(path)], capsys)
    assert code == 0
    sim = json.loads(out)["simulation"]
    assert sim["terminated"] == 1000 and sim["termination_fraction"] == "1"
    assert path.read_text().startswith("expression,i,count")


def test_timeout_gives_unknown(tmp_path):
    report = analyze_file(FIGURES / "fig1c.prob", timeout=1e-6)
    assert len(report["verdicts"]) == 4
    for v in report["verdicts"]:
        assert v["result"] == "Unknown"
        assert v["diagnostics"][0].startswith("timeout")


def test_bench_matches_manifest(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    code, text, _ = run(["bench", str(CORPUS), "--json", str(out1)], capsys)
    assert code == 0, text
    assert "all verdicts match" in text
    code, _, _ = run(["bench", str(CORPUS), "--jobs", "2", "--json", str(out2)], capsys)
    assert code == 0
    assert out1.read_text() == out2.read_text()


def test_bench_reports_mismatch(tmp_path, capsys):
    (tmp_path / "walk.prob").write_text((FIGURES / "fig1a.prob").read_text())
    (tmp_path / "expected.toml").write_text('[past]\nwalk = "certified"\n')
    code, out, _ = run(["bench", str(tmp_path)], capsys)
    assert code == 1 and "✗!" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "probterm", "analyze", str(FIGURES / "fig3a.prob"), "--goal", "ast"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "AST      Certified" in proc.stdout
