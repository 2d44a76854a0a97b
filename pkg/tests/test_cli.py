import csv
import io
import json
import subprocess
import sys

import pytest

from tlgram.cli import COEFF_COLUMNS, GRAM_COLUMNS, PROBE_COLUMNS, SWEEP_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_gram_csv_schema_and_row_count(capsys):
    code, out, _ = run(capsys, "gram", "--N", "7", "--k", "2", "--mu-index", "0", "--n-max", "40", "--out", "csv")
    assert code == 0
    assert out.splitlines()[0] == ",".join(GRAM_COLUMNS)
    assert len(rows(out)) == 40 - 2 + 1


def test_gram_accepts_q_and_free_mu(capsys):
    code, out, _ = run(capsys, "gram", "--q", "0.2", "--k", "1", "--mu-re", "0.3", "--n-max", "3")
    assert code == 0
    assert {r["mu_re"] for r in rows(out)} == {"0.3"}


def test_sweep_reports_smallest_N(capsys):
    code, out, err = run(capsys, "sweep", "--N-min", "3", "--N-max", "6", "--k-max", "2", "--n-max", "15")
    assert code == 0
    assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert [r["N"] for r in rows(out)] == ["3", "4", "5", "6"]
    assert "smallest N with margin < 1: 3" in err
    code, out, _ = run(capsys, "sweep", "--N-min", "3", "--N-max", "4", "--k-max", "1", "--n-max", "10", "--out", "json")
    assert json.loads(out)["smallest_N"] == 3


def test_coeffs_csv_and_summary(capsys):
    code, out, err = run(capsys, "coeffs", "--N", "7", "--m", "1", "--l", "2", "--p-max", "20", "--R", "4")
    assert code == 0
    assert out.splitlines()[0] == ",".join(COEFF_COLUMNS)
    assert rows(out)[0] == {"m": "1", "l": "2", "p": "0", "i": "0", "phi_re": "-1.0", "phi_im": "0.0"}
    summary = json.loads(err)
    assert summary["stable"] and summary["R"] == 4.0


def test_probe_orth_csv(capsys):
    code, out, _ = run(capsys, "probe-orth", "--N", "3", "--i-max", "1", "--j-max", "1")
    assert code == 0
    assert out.splitlines()[0] == ",".join(PROBE_COLUMNS)
    assert len(rows(out)) > 0


def test_jw_dump(capsys):
    code, out, _ = run(capsys, "jw", "--N", "3", "--n", "4", "--out", "json")
    terms = json.loads(out)["terms"]
    assert code == 0 and len(terms) == 14
    assert {"diagram", "coefficient_re", "coefficient_im"} == set(terms[0])


def test_oracle_report(capsys):
    code, out, _ = run(capsys, "oracle", "--N", "3", "--check", "gram", "--n-max", "5")
    report = json.loads(out)
    assert code == 0 and report["cases"]
    assert all(c["pass"] and c["residual"] <= c["tol"] for c in report["cases"])


def test_verify_suite_schema(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "rotation", "--seed", "1", "--N", "3")
    report = json.loads(out)
    assert code == 0
    assert set(report) == {"suite", "cases", "config"}
    assert set(report["cases"][0]) == {"name", "params", "residual", "tol", "pass"}


def test_tolerance_override_can_fail_a_case(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "rotation", "--tol", "rho_order=1e-30")
    assert code == 1
    assert not all(c["pass"] for c in json.loads(out)["cases"])


@pytest.mark.parametrize(
    "argv",
    [
        ["gram", "--k", "1", "--n-max", "3"],
        ["gram", "--N", "3", "--q", "0.2", "--k", "1", "--n-max", "3"],
        ["gram", "--N", "2", "--k", "1", "--n-max", "3"],
        ["oracle", "--q", "0.3"],
        ["coeffs", "--N", "7", "--m", "1", "--l", "2", "--R", "1"],
        ["verify", "--tol", "garbage"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_budget_exit_3(capsys):
    assert run(capsys, "oracle", "--N", "3", "--n-max", "7")[0] == 3


def test_rank_ambiguity_exit_4(capsys, monkeypatch):
    from tlgram import fiber_oracle
    from tlgram.errors import RankAmbiguityError

    def boom(*a, **k):
        raise RankAmbiguityError("forced")

    monkeypatch.setattr(fiber_oracle, "ccirc_basis", boom)
    assert run(capsys, "oracle", "--N", "3", "--check", "ccirc", "--n-max", "2")[0] == 4


def test_output_files_byte_identical(tmp_path):
    argv = ["sweep", "--N-min", "3", "--N-max", "5", "--k-max", "2", "--n-max", "10", "--out", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--jobs", "2", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "tlgram", "verify", "--suite", "ccirc", "--seed", "5"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and json.loads(first)["suite"] == "ccirc"
