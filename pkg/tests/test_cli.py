import json
import subprocess
import sys

import pytest

from symfer.cli import main
from symfer.reports import Report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def strip_timing(obj):
    obj = dict(obj)
    obj.pop("elapsed_ms", None)
    return obj


def test_c2_dims_pass(capsys):
    code, rep = run(capsys, "c2-dims", "--d", "1", "--threads", "1")
    assert code == 0 and rep["pass"]
    assert set(rep) >= {"suite", "d", "params", "items", "pass", "elapsed_ms", "version"}
    total = next(it for it in rep["items"] if it["name"] == "total")
    assert total["expected"] == total["actual"] == 11
    for it in rep["items"]:
        assert set(it) == {"name", "expected", "actual", "pass"}


def test_threads_do_not_change_output(capsys):
    _, a = run(capsys, "c2-dims", "--d", "2", "--threads", "1")
    _, b = run(capsys, "c2-dims", "--d", "2", "--threads", "2")
    assert strip_timing(a) == strip_timing(b)


def test_bad_rank_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["c2-dims", "--d", "0"])
    assert exc.value.code == 2


def test_missing_suite_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--d", "1", "--suite", "nope"])
    assert exc.value.code == 2


def test_j4_needs_d2(capsys):
    assert main(["verify", "--suite", "j4", "--d", "1"]) == 2


def test_j4_stated_identity_fails(capsys):
    code, rep = run(capsys, "verify", "--suite", "j4", "--d", "2")
    assert code == 1 and not rep["pass"]
    assert "twisted blocks not independently verified" in rep["notes"]
    # the coefficients are serialized as exact rationals
    assert rep["params"]["coeffs"]["5"] == "-144/5"


def test_zhu_reps(capsys):
    code, rep = run(capsys, "zhu", "--d", "2", "--method", "reps")
    assert code == 0
    names = [it["name"] for it in rep["items"]]
    assert "dim A_d" in names and "dim center" in names


def test_zhu_direct_stabilizes(capsys):
    code, rep = run(capsys, "zhu", "--d", "1", "--method", "direct", "--cap", "12")
    assert code == 0
    assert rep["metadata"]["quotient_by_cap"][-1] == 11


def test_zhu_direct_short_cap_inconclusive(capsys):
    code, rep = run(capsys, "zhu", "--d", "2", "--method", "direct", "--cap", "6")
    assert code == 3
    assert rep["inconclusive"] and not rep["pass"]


@pytest.mark.parametrize("suite", ["invariants", "center", "functionals", "coprimality", "bd-basis", "nilpotency", "skew-symmetry"])
def test_verify_suites_d1(capsys, suite):
    code, rep = run(capsys, "verify", "--suite", suite, "--d", "1")
    assert code == 0, rep


def test_out_file_and_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "basis-counts", "--d", "2", "--max-weight", "6", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    obj = json.loads(out.read_text())
    rep = Report.from_json(obj)
    assert rep.to_json() == obj


def test_basis_counts_with_cache(tmp_path, capsys):
    code, _ = run(capsys, "verify", "--suite", "basis-counts", "--d", "1", "--max-weight", "8", "--cache-dir", str(tmp_path))
    assert code == 0
    assert any(tmp_path.iterdir())
    code, _ = run(capsys, "verify", "--suite", "basis-counts", "--d", "1", "--max-weight", "8", "--cache-dir", str(tmp_path))
    assert code == 0


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "symfer", "verify", "--suite", "center", "--d", "1"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["suite"] == "center"
    assert "PASS" in p.stderr


def test_summary_line():
    rep = Report("x", 1)
    rep.add("a", 1, 1)
    assert rep.summary() == "x d=1: PASS (1/1 items)"
    rep.add("b", 1, 2)
    assert rep.exit_code() == 1
    rep.inconclusive = True
    assert rep.exit_code() == 3
