import csv
import io
import json
import math
import subprocess
import sys

import pytest

from disclab import cli

BALL = '{"kind": "ball", "radius": 1.0, "dim": 2}'
ELLIPSE = '{"kind": "ellipsoid", "matrix": [[2, 0], [0, 1]]}'


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ball_file(tmp_path):
    p = tmp_path / "ball.json"
    p.write_text(BALL)
    return str(p)


@pytest.fixture
def uniform_file(tmp_path):
    p = tmp_path / "uniform.json"
    p.write_text('{"kind": "uniform"}')
    return str(p)


def test_critical_example(capsys):
    code, out, _ = run(capsys, "critical", "--d", "2", "--beta", "0")
    assert code == 0
    assert json.loads(out) == {"p_critical": 4.0, "log_power": 0.25}


def test_critical_full(capsys):
    code, out, _ = run(capsys, "critical", "--d", "2", "--beta", "2", "--ellipse", "--full")
    data = json.loads(out)
    assert code == 0 and data["p_critical"] == 6.0 and data["z6"] == 1.5


def test_count_example(capsys, ball_file):
    code, out, _ = run(capsys, "count", "--body", ball_file, "--r", "2", "--x", "0,0")
    data = json.loads(out)
    assert code == 0 and data["count"] == 13
    assert data["D"] == pytest.approx(13 - 4 * math.pi)


def test_count_inline_body(capsys):
    code, out, _ = run(capsys, "count", "--body", ELLIPSE, "--r", "1", "--x", "0.5,0.5")
    assert code == 0 and "count" in json.loads(out)


def test_measure_fft_example(capsys, uniform_file):
    code, out, _ = run(capsys, "measure-fft", "--measure", uniform_file, "--xi", "1")
    data = json.loads(out)
    assert code == 0
    assert abs(data["re"]) <= 1e-14 and abs(data["im"]) <= 1e-14


def test_ft_and_discrepancy(capsys, ball_file):
    code, out, _ = run(capsys, "ft", "--body", ball_file, "--xi", "3,4", "--h", "0")
    data = json.loads(out)
    assert code == 0 and set(data) >= {"exact", "asymptotic"}
    code, out, _ = run(capsys, "discrepancy", "--body", ball_file, "--r", "5", "--grid", "8",
                       "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["x1", "x2", "D"] and len(rows) == 65


def test_phi_summary_is_json(capsys):
    code, out, _ = run(capsys, "phi", "--body", ELLIPSE, "--delta", "0.2", "--z", "1.5",
                       "--r", "20")
    data = json.loads(out)
    assert code == 0 and data["max_imag"] <= 1e-9 * data["max_abs"]


def test_norm_scan_csv_and_report(capsys, tmp_path, ball_file):
    rep = tmp_path / "fit.json"
    code, out, _ = run(capsys, "norm-scan", "--body", ball_file, "--measure", '{"kind":"dirac"}',
                       "--p", "2", "--R-min", "10", "--R-max", "40", "--points", "8",
                       "--report", str(rep))
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["R", "I"] and len(rows) == 9
    assert json.loads(rep.read_text())["fit"]["model"] in ("bounded", "log")


def test_lemma_check_crucial(capsys):
    code, out, _ = run(capsys, "lemma-check", "crucial", "--case", "2", "--alpha", "1.5",
                       "--beta", "0.7", "--X-max", "10", "--n-X", "4")
    assert code == 0 and json.loads(out)["lemma"] == "crucial(2)"


def test_validation_exit_codes(capsys, ball_file):
    assert run(capsys, "count", "--body", ball_file, "--r", "-1", "--x", "0,0")[0] == 2
    assert run(capsys, "critical", "--d", "3", "--beta", "0", "--ellipse")[0] == 2
    assert run(capsys, "count", "--body", '{"kind": "cube"}', "--r", "1", "--x", "0,0")[0] == 2
    assert run(capsys, "lemma-check", "crucial", "--case", "1", "--alpha", "1.2",
               "--beta", "0.5")[0] == 2
    assert run(capsys, "phi", "--body", ELLIPSE, "--delta", "0.1", "--z", "1.5", "--r", "10",
               "--grid", "12")[0] == 2


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["count", "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_resolution_error_exits_3(capsys):
    code, _, err = run(capsys, "phi", "--body", ELLIPSE, "--delta", "0.02", "--z", "1.5",
                       "--r", "10", "--grid", "16")
    assert code == 3 and "grid" in err


def test_atomic_output(capsys, tmp_path, ball_file):
    target = tmp_path / "count.json"
    code, out, _ = run(capsys, "count", "--body", ball_file, "--r", "2", "--x", "0,0",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["count"] == 13
    assert [p.name for p in tmp_path.iterdir() if p.name.endswith(".tmp")] == []


def test_failed_run_leaves_no_file(capsys, tmp_path, ball_file):
    target = tmp_path / "none.json"
    run(capsys, "count", "--body", ball_file, "--r", "0", "--x", "0,0", "--out", str(target))
    assert list(tmp_path.iterdir()) == [tmp_path / "ball.json"]


def test_json_output_deterministic(capsys):
    argv = ["lemma-check", "ellipse-integral", "--case", "5", "--alpha", "2", "--k-max", "10",
            "--n-k", "2"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("DISCLAB_THREADS", "2")
    argv = ["phi", "--body", ELLIPSE, "--delta", "0.2", "--z", "1.5", "--r", "20"]
    assert run(capsys, *argv)[0] == 0
    monkeypatch.setenv("DISCLAB_THREADS", "many")
    assert run(capsys, *argv)[0] == 2
    monkeypatch.setenv("DISCLAB_THREADS", "0")
    assert run(capsys, *argv)[0] == 2


def test_verify_all_subset(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify-all", "--criteria", "9", "--out", str(target))
    assert code == 0 and out.startswith("PASS")
    assert json.loads(target.read_text())["criteria"][0]["number"] == 9


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "disclab.cli", "critical", "--d", "3",
                           "--beta", "2"], capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout) == {"p_critical": 4.0, "log_power": 0.5}
