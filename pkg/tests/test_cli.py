import csv
import io
import math

import numpy as np
import pytest

from qwthermo import cli
from qwthermo.errors import InvalidInputError, NumericalError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], rows[1:]


def meta(text):
    return dict(line[2:].split(" = ", 1) for line in text.splitlines()[1:] if line.startswith("# "))


def test_parse_float():
    assert cli.parse_float("pi/2") == pytest.approx(math.pi / 2)
    assert cli.parse_float("3pi/4") == pytest.approx(3 * math.pi / 4)
    assert cli.parse_float("-pi") == -math.pi
    assert cli.parse_float("2*pi") == 2 * math.pi
    assert cli.parse_float("inf") == math.inf
    assert cli.parse_float("0.25") == 0.25
    for bad in ("pie", "1/0", "pi/0", "", "nan"):
        with pytest.raises(InvalidInputError):
            cli.parse_float(bad)
    assert cli.parse_vector("0.5, -pi/4") == (0.5, -math.pi / 4)


def test_sweep_x(capsys):
    code, out, _ = run(capsys, "sweep-x", "--samples", "5")
    assert code == 0
    assert out.splitlines()[0].startswith("# qwthermo ") and out.splitlines()[0].endswith(" sweep-x")
    head, rows = table(out)
    assert head == ["x", "lambda_1", "lambda_2", "lambda_3", "lambda_4", "T"]
    xs = [float(r[0]) for r in rows]
    assert xs == [-1.0, -0.5, 0.0, 0.5, 1.0]
    t = {x: float(r[-1]) for x, r in zip(xs, rows)}
    assert t[-1.0] == 0.0 and t[1.0] == 0.0
    assert t[0.0] == pytest.approx(1 / math.log(2))
    assert t[-0.5] == pytest.approx(2 / math.log(2))
    for r in rows:
        assert sum(map(float, r[1:5])) == pytest.approx(1.0, abs=1e-14)


def test_header_records_every_parameter(capsys):
    _, out, _ = run(capsys, "sweep-x", "--samples", "3", "--theta", "pi/2")
    m = meta(out)
    assert "workers" not in m and "out" not in m
    for key in ("coin", "p", "family", "gamma", "phi", "theta", "sigma", "k0", "grid_m", "t_max", "seed"):
        assert key in m
    assert float(m["theta"]) == pytest.approx(math.pi / 2)


def test_bloch_map_rows(capsys):
    code, out, _ = run(capsys, "bloch-map", "--n-gamma", "4", "--n-phi", "6")
    assert code == 0
    head, rows = table(out)
    assert head == ["gamma", "phi", "x", "T"]
    assert len(rows) == 5 * 6


@pytest.mark.slow
def test_sweep_gamma_deterministic_across_workers(capsys):
    args = ("sweep-gamma", "--samples", "3", "--grid-m", "64")
    _, one, _ = run(capsys, *args, "--workers", "1")
    _, three, _ = run(capsys, *args, "--workers", "3")
    assert one == three
    head, rows = table(one)
    assert head == ["gamma", "T_printed", "T_oracle", "abs_diff"]
    mid = rows[1]
    assert float(mid[0]) == pytest.approx(math.pi / 2)
    assert mid[1] == "inf" and mid[2] == "inf" and float(mid[3]) == 0.0
    assert float(rows[0][1]) == 0.0 and float(rows[0][2]) == 0.0


def test_sweep_gamma_needs_grover_half(capsys):
    code, _, err = run(capsys, "sweep-gamma", "--p", "0.3", "--samples", "3", "--grid-m", "16")
    assert code == 2 and "invalid configuration" in err


def test_thermo_family_two(capsys):
    code, out, _ = run(capsys, "thermo", "--family", "II", "--gamma", "1.0", "--grid-m", "64")
    assert code == 0
    head, rows = table(out)
    rec = dict(zip(head, rows[0]))
    assert rec["T"] == "inf"
    assert float(rec["S"]) == pytest.approx(math.log(4), abs=1e-9)
    assert meta(out)["method"] == "quadrature"


def test_thermo_delta_limit(capsys):
    code, out, _ = run(capsys, "thermo", "--sigma", "inf", "--k0", "0,0", "--gamma", "0", "--theta", "pi")
    assert code == 0
    head, rows = table(out)
    rec = dict(zip(head, rows[0]))
    assert float(rec["T"]) == pytest.approx(1 / math.log(2))
    assert meta(out)["method"] == "delta-limit"


def test_thermo_gaussian_quadrature(capsys):
    code, out, _ = run(capsys, "thermo", "--sigma", "4", "--k0", "0.7,-1.1", "--grid-m", "64")
    assert code == 0
    head, rows = table(out)
    lam = np.array([float(rows[0][head.index(f"lambda_{i}")]) for i in range(1, 5)])
    assert lam.sum() == pytest.approx(1.0, abs=1e-10)


def test_invalid_inputs_exit_2(capsys):
    for argv in (
        ["thermo", "--gamma", "4"],
        ["thermo", "--grid-m", "30"],
        ["thermo", "--k0", "0.1"],
        ["simulate", "--sigma", "inf"],
        ["thermo", "--coin", "/nonexistent/coin.txt"],
        ["thermo", "--p", "abc"],
    ):
        code, _, err = run(capsys, *argv)
        assert code == 2, argv
        assert err.startswith("qwthermo: invalid configuration")


def test_numerical_error_exit_3(capsys, monkeypatch):
    def boom(cfg):
        raise NumericalError("negative spectrum")

    monkeypatch.setitem(cli.COMMANDS, "thermo", ("", boom))
    code, out, err = run(capsys, "thermo")
    assert code == 3 and out == "" and "numerical failure" in err


def test_validate_exit_codes(capsys, monkeypatch):
    code, out, _ = run(capsys, "validate", "--seed", "1")
    assert code == 0
    head, rows = table(out)
    assert head == ["check", "status", "measured", "tolerance"]
    assert rows and all(r[1] == "PASS" for r in rows)

    from qwthermo import validate

    failing = [validate.CheckResult("forced", False, 1.0, 0.1)]
    monkeypatch.setattr(validate, "run_all", lambda seed=0: failing)
    code, out, _ = run(capsys, "validate")
    assert code == 1 and "forced,FAIL" in out


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nsamples = 3\ntheta = pi/2\n")
    _, out, _ = run(capsys, "sweep-x", "--config", str(cfg), "--samples", "4")
    m = meta(out)
    assert m["samples"] == "4"
    assert float(m["theta"]) == pytest.approx(math.pi / 2)
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    code, _, _ = run(capsys, "sweep-x", "--config", str(bad))
    assert code == 2


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "x.csv"
    code, out, _ = run(capsys, "sweep-x", "--samples", "3", "--out", str(dest))
    assert code == 0 and out == ""
    assert table(dest.read_text())[0][0] == "x"


def test_custom_coin_file(tmp_path, capsys):
    path = tmp_path / "hadamard.txt"
    np.savetxt(path, np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))
    code, out, _ = run(capsys, "thermo", "--coin", str(path), "--k0", "0.4", "--sigma", "3", "--grid-m", "128")
    assert code == 0
    assert meta(out)["ordering"] == "eigenphase"
    head, rows = table(out)
    assert head[:2] == ["lambda_1", "lambda_2"]


@pytest.mark.slow
def test_simulate_defaults_converge(capsys):
    code, out, _ = run(capsys, "simulate")
    assert code == 0
    head, rows = table(out)
    assert head == ["t", "S", "distance"]
    assert len(rows) == 401
    assert rows[50][2] == "nan"
    assert float(rows[-1][2]) < 1e-2
    assert int(meta(out)["t_burn_resolved"]) == 100
