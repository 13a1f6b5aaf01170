import json
import subprocess
import sys

import pytest

from hecke_transfer.cli import main, parse_primes, verify_prime

from conftest import T3


def test_parse_primes():
    assert parse_primes("2..11") == [2, 3, 5, 7, 11]
    assert parse_primes("5,3,3") == [3, 5]
    with pytest.raises(ValueError, match="not prime"):
        parse_primes("4")


def test_verify_all(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--primes", "2..97", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ok"] and len(rep["primes"]) == 25


def test_verify_not_prime(capsys):
    assert main(["verify", "--primes", "4"]) == 2
    assert "not prime" in capsys.readouterr().err


def test_relator_counts():
    rep = verify_prime(3)
    assert rep["involution_relators"] == 2 and rep["triple_relators"] == 1 and rep["ok"]


def test_dump_commands(tmp_path):
    out = tmp_path / "sys.json"
    assert main(["dump-system", "-p", "3", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["branches"]) == 8
    assert main(["dump-operator", "-p", "3", "--alt", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["domains"]) == 4
    assert main(["dump-operator", "-p", "5", "--alt"]) == 2


def test_scan_rejects_bad_re_s():
    with pytest.raises(SystemExit):
        main(["scan", "-p", "5", "--re-s", "1.5"])


def test_scan_grid_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["scan", "-p", "2", "-N", "32", "--t", "0:10:2000", "--no-confirm"]
    assert main(args + ["--csv", str(a), "--json", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--csv", str(b), "--json", str(tmp_path / "b.json")]) == 0
    lines = a.read_text().splitlines()
    assert lines[0] == "t,sigma_min,N,m"
    assert len(lines) - 1 == 2001
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_period_with_compare_choices(tmp_path):
    out = tmp_path / "pf.json"
    assert main(["period", "-p", "3", "--t", f"{T3:.10f}", "--compare-choices", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["residuals"]["eigen_residual"] <= 1e-6
    assert rep["residuals"]["constraint_residual"] <= 1e-6
    assert rep["cohomology"]["antisymmetry"] <= 1e-8
    cc = rep["compare_choices"]
    assert cc["alternate_residual"] <= 10 * cc["residual"]
    assert rep["period_function"]["p"] == 3


def test_period_off_spectrum(capsys):
    assert main(["period", "-p", "3", "--t", "2.0", "-N", "48"]) == 1
    assert "no kernel detected" in capsys.readouterr().err


def test_hejhal_model_file(tmp_path):
    out = tmp_path / "form.json"
    assert main(["hejhal", "-p", "5", "--model", "3.0283762931,-1,1", "--out", str(out)]) == 0
    js = json.loads(out.read_text())
    assert js["level"] == 5 and js["coefficients"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "hecke_transfer", "verify", "--primes", "2,3"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["ok"]
