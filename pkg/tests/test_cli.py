import json
import subprocess
import sys

import pytest

from kdescent.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_triangle_csv(capsys):
    code, out, _ = run(capsys, "triangle", "--k", "3", "--n", "8", "--no-meta")
    assert code == 0
    assert out.strip().splitlines()[-1] == "3,8,8,1107"
    assert out.startswith("# config: ")


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--k", "4", "--no-meta")
    assert code == 0
    assert "1.038415637" in out
    doc = json.loads(out)
    assert doc["config"]["k"] == 4
    assert "meta" not in doc


def test_count_plain(capsys):
    code, out, _ = run(capsys, "count", "--k", "3", "--set", "1", "--n", "4", "--no-meta")
    assert code == 0
    assert out.strip().splitlines()[-1] == "3"


def test_big_counts_are_strings(capsys):
    code, out, _ = run(capsys, "oracle", "--k", "3", "--n", "4", "--no-meta")
    doc = json.loads(out)
    assert doc["result"]["I=[]"] == "17"
    code, out, _ = run(capsys, "triangle", "--k", "3", "--n", "30", "--format", "json", "--no-meta")
    rows = json.loads(out)["result"]
    assert all(isinstance(r["value"], str) for r in rows)
    assert rows[-1] == {"k": 3, "n": 30, "m": 30, "value": str(int(rows[-1]["value"]))}


def test_meta_header_only_when_requested(capsys):
    _, with_meta, _ = run(capsys, "count", "--k", "3", "--set", "1", "--n", "4")
    _, without, _ = run(capsys, "count", "--k", "3", "--set", "1", "--n", "4", "--no-meta")
    assert with_meta.startswith("# generated:")
    assert with_meta.splitlines()[1:] == without.splitlines()


@pytest.mark.parametrize("argv", [
    ["triangle", "--k", "3"],
    ["triangle", "--k", "3", "--n", "8", "--bogus"],
    ["count", "--k", "3", "--set", "x", "--n", "4"],
    ["constants", "--k", "2"],
    ["oracle", "--k", "3", "--n", "12"],
    ["equidist", "--k", "3", "--a", "1", "--samples", "10"],
    ["series-check", "--cap", "3"],
    ["converge", "--k", "3", "--set", "1", "--n", "50"],
])
def test_parameter_errors_exit_1(capsys, argv):
    # argparse failures raise SystemExit, validation failures return the code
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_unknown_flag_prints_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["phi", "--k", "3", "--nope"])
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_phi_csv(capsys):
    code, out, _ = run(capsys, "phi", "--k", "3", "--grid", "4", "--no-meta")
    lines = out.strip().splitlines()
    assert lines[1] == "x,phi"
    assert len(lines) == 2 + 4
    assert lines[-1].startswith("1,0.66057728325")


def test_other_commands(capsys):
    code, out, _ = run(capsys, "orderstat", "--n", "10", "--t", "4", "--s", "2", "--no-meta")
    assert json.loads(out)["result"]["mean"] == "22/5"
    code, out, _ = run(capsys, "c-of-i", "--k", "3", "--set", "1", "--no-meta")
    assert json.loads(out)["result"]["value"] == pytest.approx(0.2091995761561453, abs=1e-13)
    code, out, _ = run(capsys, "ratios", "--k", "3", "--max-i", "4", "--no-meta")
    assert code == 0 and "1.1321" in out
    code, out, _ = run(capsys, "series-check", "--cap", "12", "--no-meta")
    assert json.loads(out)["result"]["max_residual"] == "0"
    code, out, _ = run(capsys, "converge", "--k", "3", "--set", "1", "--n-list", "50,100", "--no-meta")
    assert out.splitlines()[1] == "n,ratio_exact,constant,rel_gap"
    code, out, _ = run(capsys, "param-count", "--k", "3", "--m", "2", "--n", "5", "--no-meta")
    assert out.strip().splitlines()[-1] == "17"
    code, out, _ = run(capsys, "equidist", "--k", "3", "--a", "1", "--samples", "100000", "--no-meta")
    assert code == 0


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("KDESCENT_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "count", "--k", "3", "--set", "1", "--n", "4", "--no-meta", "-o", "c.txt")
    assert code == 0
    assert (tmp_path / "c.txt").read_text().strip().endswith("3")


@pytest.fixture(scope="module")
def verify_default():
    cmd = [sys.executable, "-m", "kdescent.cli", "verify", "--no-meta"]
    return [subprocess.run(cmd, capture_output=True, text=True) for _ in range(2)]


def test_verify_passes_and_is_deterministic(verify_default):
    a, b = verify_default
    assert a.returncode == 0, a.stdout
    assert a.stdout == b.stdout
    report = json.loads(a.stdout)["result"]
    assert report["passed"] and not report["reduced_coverage"]
    names = [c["name"] for c in report["checks"]]
    assert names == sorted(names)
    assert all("tolerance" in c and "measured" in c for c in report["checks"])


def test_verify_reduced_cap(capsys):
    code, out, _ = run(capsys, "verify", "--oracle-cap", "6", "--no-meta")
    report = json.loads(out)["result"]
    assert code == 0
    assert report["reduced_coverage"] is True


def test_verify_fault_injection(capsys):
    code, out, _ = run(capsys, "verify", "--oracle-cap", "6", "--corrupt-cell", "3", "10", "--no-meta")
    assert code == 3
    failed = {c["name"] for c in json.loads(out)["result"]["checks"] if not c["passed"]}
    assert "exact.kth_difference_recurrence" in failed
