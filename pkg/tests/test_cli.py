import csv
import io
import json

import numpy as np
import pytest

from flrwc import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


# ------------------------------------------------------------ classify / conditions


def test_classify_radiation(capsys):
    code, doc = run_json(capsys, "classify", "--family", "power-law", "--epsilon", "2")
    assert code == cli.EXIT_OK
    assert doc["verdicts"]["applicable"] is True
    assert doc["verdicts"]["source"] == "PaperTable"
    assert doc["checks"]["numeric_agrees_with_table"] is True
    assert doc["version"] == cli.VERSION


def test_classify_excluded_case_is_not_an_error(capsys):
    code, doc = run_json(capsys, "classify", "--family", "power-law", "--epsilon", "1", "--kappa", "-1")
    assert code == cli.EXIT_OK and doc["verdicts"]["applicable"] is False


def test_classify_custom_expression(capsys):
    code, doc = run_json(capsys, "classify", "--scale-factor", "t^(1/3)", "--kappa", "1")
    assert code == cli.EXIT_OK
    assert doc["verdicts"]["applicable"] is True and doc["verdicts"]["source"] == "Numeric"


def test_conditions_log_corrected(capsys):
    code, doc = run_json(capsys, "conditions", "--family", "log-corrected", "--epsilon", "0.5", "--kappa", "1")
    assert code == cli.EXIT_OK
    assert doc["verdicts"]["verdict25"] == "DivergesToMinusInfinity"
    assert all(doc["checks"].values())


def test_conditions_csv(capsys):
    code, out, _ = run(capsys, "conditions", "--family", "power-law", "--epsilon", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 15
    assert float(rows[0]["t"]) == 1.0 and float(rows[0]["I"]) == 0.0


def test_grid_csv(capsys):
    code, out, _ = run(capsys, "classify", "--family", "power-law",
                       "--epsilon-grid", "0.5,1,2", "--kappa-grid=-1,0,1")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "family,epsilon,kappa,C,verdict25,verdict26,applicable,source"
    assert len(lines) == 10
    assert "power-law,1.0,-1.0,1.0," in out


def test_grid_threads_env(capsys, monkeypatch):
    argv = ("classify", "--family", "log-corrected", "--epsilon-grid", "0.5,1,2", "--kappa-grid=-1,0,1")
    monkeypatch.setenv("FLRWC_THREADS", "1")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("FLRWC_THREADS", "3")
    _, parallel, _ = run(capsys, *argv)
    assert serial == parallel
    monkeypatch.setenv("FLRWC_THREADS", "zero")
    assert run(capsys, *argv)[0] == cli.EXIT_CONFIG


def test_json_is_deterministic(capsys):
    argv = ("conditions", "--family", "power-law", "--epsilon", "1.5", "--kappa", "1")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


# ------------------------------------------------------------ configuration errors


@pytest.mark.parametrize("argv, fragment", [
    (("classify", "--family", "power-law"), "--epsilon"),
    (("classify",), "--family"),
    (("conjugate", "--family", "power-law", "--epsilon", "2", "--t-start", "2"), "t_start < t2"),
    (("conjugate", "--family", "power-law", "--epsilon", "2", "--kappa", "1"), "kappa = 0"),
    (("classify", "--scale-factor", "t^^2"), "offset 2"),
    (("classify", "--scale-factor", "tan(t)"), "tan"),
    (("classify", "--family", "power-law", "--epsilon", "-1"), "epsilon"),
    (("classify", "--family", "power-law", "--epsilon", "2", "--scale-factor", "t"), "exclusive"),
    (("reproduce-radiation", "--family", "power-law"), "fixes the model"),
    (("geodesic", "--family", "power-law", "--epsilon", "2", "--timelike", "--null"), "not allowed"),
    (("bogus",), "invalid choice"),
])
def test_config_errors(capsys, argv, fragment):
    code, out, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG and out == ""
    assert fragment in err


def test_config_file_and_override(capsys, tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# radiation\nfamily = power-law\nepsilon = 2\nkappa = -1\n")
    code, doc = run_json(capsys, "classify", "--config", str(path))
    assert code == 0 and doc["config"]["kappa"] == -1.0
    code, doc = run_json(capsys, "classify", "--config", str(path), "--epsilon", "1")
    assert doc["config"]["epsilon"] == 1.0 and doc["verdicts"]["applicable"] is False


def test_config_file_unknown_key(capsys, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("family = power-law\n\nepsilonn = 2\n")
    code, _, err = run(capsys, "classify", "--config", str(path))
    assert code == cli.EXIT_CONFIG and f"{path}:3" in err and "epsilonn" in err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == cli.VERSION


# ------------------------------------------------------------ path subcommands


def test_geodesic_csv(capsys, tmp_path):
    out = tmp_path / "path.csv"
    code, stdout, _ = run(capsys, "geodesic", "--family", "power-law", "--epsilon", "2",
                          "--format", "csv", "--out", str(out))
    assert code == 0 and stdout == ""
    data = np.genfromtxt(out, delimiter=",", names=True)
    a = np.sqrt(data["t"])
    assert np.allclose(data["u0"], np.sqrt(1 + a * a) / a, rtol=1e-9)
    assert data["t"][0] == pytest.approx(1e-10)


def test_conjugate_with_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, doc = run_json(capsys, "conjugate", "--family", "power-law", "--epsilon", "2", "--null",
                         "--trace", str(trace))
    assert code == 0
    assert doc["verdicts"]["n_singular_limit"] == 1 and doc["verdicts"]["n_interior_zero"] == 0
    assert doc["checks"]["frame_orthonormality_drift"] < 1e-8
    header = trace.read_text().splitlines()[0]
    assert header.startswith("t,tau,detA,theta,sigma_norm,omega_norm")


# ------------------------------------------------------------ reproduce-radiation


def test_reproduce_radiation(capsys):
    code, doc = run_json(capsys, "reproduce-radiation")
    assert code == cli.EXIT_OK and all(doc["checks"].values())
    v = doc["verdicts"]
    assert v["n_singular_limit"] == 1 and v["n_interior_zero"] == 0
    assert v["h3_at_0"] == pytest.approx(-1.762747, abs=1e-6)
    assert v["detA_slope"] > 0.5


def test_reproduce_radiation_other_t2(capsys):
    code, doc = run_json(capsys, "reproduce-radiation", "--t2", "4")
    assert code == cli.EXIT_OK
    assert doc["verdicts"]["h3_at_0"] == pytest.approx(-4 * np.arcsinh(2.0), abs=1e-6)


def test_reproduce_radiation_loose_tolerance_fails(capsys):
    code, doc = run_json(capsys, "reproduce-radiation", "--tolerance", "1e-4")
    assert code == cli.EXIT_FAILURE and not all(doc["checks"].values())
