import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cournot_duo import Axis, make_spec, sweep2d
from cournot_duo.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("{"))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_equilibrium_report():
    code, text = run("equilibrium", "--model", "gr", "--cost", "quadratic", "--c1", "1", "--c2", "4", "--k", "1")
    assert code == 0
    d = kv(text)
    assert float(d["q1"]) == pytest.approx(1 / 3, rel=1e-14)
    assert float(d["q2"]) == pytest.approx(1 / 6, rel=1e-14)
    assert d["criterion_stable"] == "true" and d["numeric_class"] == "stable"
    assert float(d["R_GR1"]) == pytest.approx(-153.0)


def test_equilibrium_record_line():
    code, text = run("equilibrium", "--model", "ga", "--l", "0.5", "--k", "1", "--c1", "1", "--c2", "1",
                     "--cost", "quadratic", "--record")
    assert code == 0
    assert "R_GA1" in kv(text)
    record = json.loads(text.splitlines()[-1])
    assert record["model"] == "ga" and record["L"] == 0.5
    assert record["R_GA1"] == pytest.approx(float(kv(text)["R_GA1"]))


def test_invalid_flag_exits_two(capsys):
    code, _ = run("equilibrium", "--model", "gr", "--c1", "0")
    assert code == 2
    assert "c1 must be positive" in capsys.readouterr().err


def test_bad_axis_exits_two(tmp_path):
    code, _ = run("sweep", "--model", "gr", "--x", "l:0.1:0.9:3", "--y", "k:0.1:1:3")
    assert code == 2


def test_sweep_files(tmp_path):
    csv_path, pgm_path = tmp_path / "gr.csv", tmp_path / "gr.pgm"
    code, text = run("sweep", "--model", "gr", "--cost", "quadratic", "--x", "c1:0.1:5:200",
                     "--y", "k:0.1:3:200", "--c2", "1", "--mode", "both", "-o", str(csv_path),
                     "--pgm", str(pgm_path))
    assert code == 0
    assert "cells=40000" in text and "disagreements=0" in text
    rows = read_csv(csv_path)
    assert rows[0] == ["x", "y", "class", "jury1", "jury2", "jury3", "rho", "crit_primary"]
    assert len(rows) == 40_001
    for row in rows[1:50]:
        for field in row[:2] + row[3:]:
            assert field == format(float(field), ".17g")
    # row-major with x fastest
    assert float(rows[1][0]) < float(rows[2][0]) and rows[1][1] == rows[2][1]

    lines = pgm_path.read_text().splitlines()
    assert lines[0] == "P2"
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    assert body[0] == "200 200" and body[1] == "255"
    pixels = np.array([[int(v) for v in ln.split()] for ln in body[2:]])
    assert pixels.shape == (200, 200)
    assert set(np.unique(pixels)) <= {0, 64, 128, 255}
    grid = sweep2d(make_spec("gr", "quadratic", 2.55, 1, 1.55), Axis("c1", 0.1, 5, 200), Axis("K", 0.1, 3, 200))
    levels = np.vectorize({0: 0, 1: 255, 2: 128, 3: 64}.get)(grid.classes)
    assert (pixels == levels[::-1]).all()  # row 0 is the largest K
    classes = np.array([r[2] for r in rows[1:]]).reshape(200, 200)
    assert (np.where(classes == "stable", 0, 255) == levels).all()


def test_verify_gb():
    code, text = run("verify", "--model", "gb", "--samples", "10000", "--seed", "7")
    assert code == 0
    d = dict(part.split("=") for part in text.split())
    assert d["disagree"] == "0"
    assert int(d["agree"]) + int(d["near_boundary"]) == 10_000


def test_bifurcation_branches(tmp_path):
    path = tmp_path / "bif.csv"
    code, text = run("bifurcation", "--model", "gr", "--cost", "quadratic", "--c1", "1", "--c2", "1",
                     "--param", "k:1.0:2.0:400", "-o", str(path))
    assert code == 0
    rows = read_csv(path)
    assert rows[0] == ["param", "value"]
    data = np.array(rows[1:], dtype=float)
    branches = {}
    for k, v in data:
        branches.setdefault(k, set()).add(round(v, 8))
    assert all(len(b) == 1 for k, b in branches.items() if k < 1.40)
    assert all(len(b) == 2 for k, b in branches.items() if 1.43 < k < 1.6)
    first = float(kv(text.replace(" ", "\n"))["first_split"])
    assert abs(first - 2 ** 0.5) < 0.01


def test_simulate_csv(tmp_path):
    path = tmp_path / "sim.csv"
    code, text = run("simulate", "--model", "gl", "--cost", "linear", "--c1", "1", "--c2", "2",
                     "--k", "0.3", "--steps", "50", "-o", str(path))
    assert code == 0
    rows = read_csv(path)
    assert rows[0] == ["t", "q1", "q2"] and len(rows) == 52
    assert [r[0] for r in rows[1:4]] == ["0", "1", "2"]
    assert "escaped=false" in text


def test_simulate_reports_escape():
    code, text = run("simulate", "--model", "gg", "--k", "100", "--k2", "100", "--q1", "0.3",
                     "--q2", "0.3", "--steps", "100")
    assert code == 0
    assert "escaped=true" in text and "escape_index=2" in text


def test_lyapunov_command():
    code, text = run("lyapunov", "--model", "gr", "--k", "1", "--steps", "2000")
    assert code == 0
    assert float(text.strip().split("=")[1]) < 0


def test_containment_exit_codes():
    code, text = run("containment", "--preset", "gr-c1-gt-4", "--samples", "20000")
    assert code == 0 and "violations=0" in text
    code, text = run("containment", "--preset", "gg-equal-k", "--samples", "20000")
    assert code == 1
    code, text = run("containment", "--preset", "gl-witness", "--samples", "20000")
    assert code == 0 and "witness=" in text


def test_containment_box_flag():
    code, text = run("containment", "--model", "gr", "--box", "c2:3:20", "--samples", "5000")
    assert code == 0
    code, _ = run("containment", "--model", "gr", "--box", "c:3:20", "--samples", "5000")
    assert code == 2


def test_unwritable_output_exits_three(tmp_path):
    code, _ = run("verify", "--model", "gr", "--samples", "10", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == 3


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "--model", "gl", "--cost", "linear", "--samples", "3000", "--seed", "3"),
        ("containment", "--model", "ga", "--samples", "3000", "--seed", "5"),
        ("containment", "--preset", "gg-witness", "--samples", "3000", "--seed", "5"),
    ],
)
def test_outputs_do_not_depend_on_thread_count(tmp_path, argv):
    texts, files = [], []
    for threads in ("1", "2", "5"):
        path = tmp_path / f"out{threads}.csv"
        code, text = run(*argv, "--threads", threads, "-o", str(path))
        texts.append(text)
        files.append(path.read_bytes())
    assert texts[0] == texts[1] == texts[2]
    assert files[0] == files[1] == files[2]


def _cli(args, **env):
    full = dict(os.environ, **env)
    return subprocess.run([sys.executable, "-m", "cournot_duo", *args], capture_output=True, text=True, env=full)


@pytest.mark.slow
def test_array_backend_gives_the_same_verdicts(tmp_path):
    args = ["verify", "--model", "ga", "--samples", "2000", "--seed", "9"]
    fast = _cli(args + ["-o", str(tmp_path / "a.csv")])
    slow = _cli(args + ["-o", str(tmp_path / "b.csv")], COURNOT_DISABLE_JIT="1")
    assert fast.returncode == slow.returncode == 0
    assert fast.stdout == slow.stdout
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert _cli(["--backend"], COURNOT_DISABLE_JIT="1").stdout.strip() == "numpy"


def test_thread_env_cap(tmp_path):
    out = _cli(["verify", "--model", "gr", "--samples", "500"], COURNOT_THREADS="1")
    assert out.returncode == 0
    assert out.stdout == _cli(["verify", "--model", "gr", "--samples", "500"], COURNOT_THREADS="3").stdout
