import json
import subprocess
import sys

import pytest

from charp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_universal_L(capsys):
    code, out, _ = run(capsys, "universal", "L", "--p", "3")
    assert code == 0
    assert out.strip() == "xxy + xyx + xyy + yxx + yxy + yyx"


def test_cartier(capsys):
    code, out, _ = run(capsys, "cartier", "--p", "3", "--m", "1", "--form", "x^2 dx0")
    assert (code, out.strip()) == (0, "dx0")


def test_darboux(capsys):
    code, out, _ = run(capsys, "darboux", "--p", "3", "--m", "2", "--form", "dx0^dx1 + x0 dx0^dx1")
    assert (code, out.strip()) == (0, "x0 -> x0 - x0^2; x1 -> x1")


def test_weyl_center(capsys):
    code, out, _ = run(capsys, "weyl", "center", "--p", "3", "--n", "1", "--trunc", "3")
    assert code == 0
    assert len(out.strip().splitlines()) == 11


def test_weyl_fiber(capsys):
    code, out, _ = run(capsys, "weyl", "fiber", "--p", "3", "--c", "2")
    assert code == 0
    assert json.loads(out)["bijective"] is True


def test_verify_report_schema(capsys):
    code, out, _ = run(capsys, "verify", "theorem-cent", "--p", "3", "--m", "2", "--samples", "10", "--seed", "7")
    report = json.loads(out)
    assert code == 0
    assert report["schema"] == 1
    assert report["failed"] == 0 and report["passed"] == report["cases"]
    assert "wall_time" not in report


def test_reports_are_deterministic(capsys, monkeypatch, tmp_path):
    argv = ["verify", "restricted", "--p", "3", "--m", "2", "--cases", "4", "--samples", "10", "--seed", "3"]
    first = run(capsys, *argv)[1]
    monkeypatch.setenv("CHARP_THREADS", "3")
    second = run(capsys, *argv)[1]
    assert first == second
    target = tmp_path / "r.json"
    assert main(argv + ["--out", str(target)]) == 0
    assert target.read_text() == first


def test_timing_opt_in(capsys):
    _, out, _ = run(capsys, "verify", "lemma-sq", "--p", "3", "--timing")
    assert "wall_time" in json.loads(out)


def test_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "hI", "--p", "3", "--m", "1")
    assert code == 1
    report = json.loads(out)
    assert report["counterexamples"][0]["check"] == "hI(1) = 0"


@pytest.mark.parametrize("argv", [
    ["verify", "no-such-suite", "--p", "3"],
    ["verify", "cartier", "--p", "4"],
    ["verify", "darboux", "--p", "3", "--m", "3"],
    ["verify", "weyl", "--p", "3", "--trunc", "20"],
    ["cartier", "--p", "3", "--m", "1", "--form", "x^2 dq"],
    ["cartier", "--p", "3", "--m", "2", "--form", "x1 dx0"],
    ["universal", "L"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("charp:")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "charp", "universal", "L", "--p", "3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "xxy + xyx + xyy + yxx + yxy + yyx"
