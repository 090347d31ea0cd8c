import json

import pytest

from dampwall import artifacts
from dampwall.cli import run

from helpers import order4
from test_percolation import S11_ROWS


def test_usage_errors_exit_2(capsys):
    assert run([]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["specialize", "--order", "5"]) == 2
    assert "error" in capsys.readouterr().err


def test_float_r_rejected(capsys):
    assert run(["specialize", "--r", "1.5", "--order", "5"]) == 2
    assert "exact rational" in capsys.readouterr().err
    assert run(["specialize", "--r", "3/0", "--order", "5"]) == 2


def test_series_prefix_and_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["-q", "series", "--m", "1", "--y", "1", "--order", "20", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    s = artifacts.series_from_json(json.loads(a.read_text()))
    for n in range(4):
        assert list(s.row(n).coeffs) == S11_ROWS[n]


def test_specialize_and_guess_rec(tmp_path, capsys):
    path = tmp_path / "r2.json"
    assert run(["-q", "specialize", "--r", "2", "--order", "49", "--out", str(path)]) == 0
    assert run(["-q", "guess-rec", "--in", str(path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert (data["order"], data["degree"]) == (6, 2)


def test_specialize_mod(capsys):
    assert run(["-q", "specialize", "--r", "2", "--order", "6", "--prime", "101"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kind"] == "mod" and data["coeffs"] == [str(c % 101) for c in (1, 3, 6, 16, 30, 84, 130)]


def test_reconstruct_dry(tmp_path, capsys):
    path = tmp_path / "dry.json"
    assert run(["-q", "specialize", "--r", "0", "--order", "40", "--out", str(path)]) == 0
    assert run(["-q", "reconstruct", "--in", str(path), "--k", "1", "--d", "2"]) == 0
    op = artifacts.operator_from_json(json.loads(capsys.readouterr().out))
    assert op.order == 1 and op.head.degree == 2


def test_exponents_at_half():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "dampwall.cli", "-q", "exponents", "--r", "7/4", "--point", "1/2"],
                         capture_output=True, text=True, check=True).stdout
    assert out.strip() == "-1, 1, 1, 3"


def test_exponents_from_operator_file(tmp_path, capsys):
    op, report = order4(3)
    path = tmp_path / "op.json"
    path.write_text(artifacts.dumps(artifacts.operator_to_json(op, report.verified_order, report.primes)))
    assert run(["-q", "exponents", "--r", "3", "--point", "infinity", "--ode", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "1, 2, 2, 4"
    assert run(["-q", "exponents", "--r", "3", "--point", "P4", "--ode", str(path), "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 4 and all(row["exponents"] == ["0", "0.5", "1", "2"] for row in rows)
    assert run(["-q", "exponents", "--r", "3", "--point", "0.5", "--ode", str(path)]) == 2


def test_singularities_json(capsys):
    assert run(["-q", "singularities", "--r", "3"]) == 0
    data = json.loads(capsys.readouterr().out)
    values = {p["value"] for p in data["points"]}
    assert {"1/3", "2/3", "1/2", "1"} <= values


def test_estimate_gamma_wet(capsys):
    assert run(["-q", "estimate-gamma", "--wet", "--order", "100"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["gamma"] - 2) < 0.05


def test_verify_rejects_r2():
    assert run(["-q", "verify-factorization", "--r", "2"]) == 2


def test_repro_fig2_csv(tmp_path):
    path = tmp_path / "fig2.csv"
    assert run(["-q", "repro", "fig2", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "p,value" and len(lines) == 490
    assert float(lines[1].split(",")[0]) == pytest.approx(0.001)


def test_repro_eq_recurrence(capsys):
    assert run(["-q", "repro", "eq-recurrence", "--format", "text"]) == 0
    assert all(line.startswith("PASS") for line in capsys.readouterr().out.splitlines())
