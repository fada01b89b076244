import json
import subprocess
import sys
from fractions import Fraction

import pytest

from quasiinv import cli, fixtures
from quasiinv.cosets import CanonicalLabel
from quasiinv.errors import NumericError
from quasiinv.measure import RMeasure
from quasiinv.transform import PwMap, sup_distance


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: "):])
    header = lines[1].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[2:]]


def test_canon_fixture_labels(tmp_path, capsys):
    g0 = write_json(tmp_path / "g0.json", fixtures.g0().to_dict())
    code, out, _ = run(["canon", g0], capsys)
    assert code == 0
    lbl = CanonicalLabel.from_dict(json.loads(out))
    assert lbl.nu == () and lbl.nu_inf == RMeasure(atoms=((Fraction(1, 2), Fraction(1, 2)),
                                                          (Fraction(3, 2), Fraction(1, 2))))
    code, out, _ = run(["canon", "identity"], capsys)
    assert CanonicalLabel.from_dict(json.loads(out)).nu_inf == RMeasure.atom(1)
    code, out, _ = run(["canon", "h2"], capsys)
    half = fixtures.uniform_law().scale(Fraction(1, 2))
    assert CanonicalLabel.from_dict(json.loads(out)).nu == (half, half)


def test_canon_writes_label_and_table(tmp_path, capsys):
    stem = tmp_path / "h2"
    code, _, _ = run(["canon", "h2", "--out", str(stem), "--samples", "50"], capsys)
    assert code == 0
    rows = csv_rows((tmp_path / "h2.invariants.csv").read_text())
    assert set(rows[0]) == {"y", "F1", "F2", "F"}
    assert json.loads((tmp_path / "h2.label.json").read_text())["nu"]


def test_section_examples(tmp_path, capsys):
    code, out, _ = run(["section", "delta1"], capsys)
    assert code == 0
    assert sup_distance(PwMap.from_dict(json.loads(out)), fixtures.identity()) == 0
    code, out, _ = run(["section", "uniform"], capsys)
    assert sup_distance(PwMap.from_dict(json.loads(out)), fixtures.psi_u()) <= 1e-15


def test_section_precondition_exit_code(tmp_path, capsys):
    bad = write_json(tmp_path / "bad.json", RMeasure.atom(2).to_dict())
    code, out, err = run(["section", bad], capsys)
    assert code == 2 and out == ""
    report = json.loads(err)
    assert report["error"] == "PreconditionError"
    assert set(report["residuals"]) == {"mass", "moment"}


def test_malformed_input_has_file_and_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "atoms": [\n    {"t": 1,\n')
    code, _, err = run(["section", str(path)], capsys)
    assert code == 2
    assert f"{path}:" in json.loads(err)["message"]
    bad = write_json(tmp_path / "neg.json", {"atoms": [{"t": -1, "mass": 1}], "pieces": []})
    code, _, err = run(["section", bad], capsys)
    assert code == 2 and bad in json.loads(err)["message"]


def test_numeric_failure_exit_code(monkeypatch, capsys):
    def boom(args):
        raise NumericError("did not converge", achieved=1e-3)

    monkeypatch.setattr(cli, "cmd_section", boom)
    code, _, err = run(["section", "uniform"], capsys)
    assert code == 3
    assert json.loads(err)["achieved"] == 1e-3


def test_converge_split(capsys):
    code, out, _ = run(["converge", "--engine", "split", "--n-max", "6"], capsys)
    assert code == 0
    d = [float(r["distance"]) for r in csv_rows(out)]
    assert len(d) == 5 and all(a > b for a, b in zip(d, d[1:]))


def test_converge_oscillation(capsys):
    code, out, _ = run(["converge", "--engine", "oscillation", "--j-max", "64"], capsys)
    rows = csv_rows(out)
    err = [float(r["matrix_element_error"]) for r in rows]
    dist = [float(r["gms_distance_to_identity"]) for r in rows]
    assert err[-1] < err[0]
    assert abs(dist[-1] - dist[-2]) <= 1e-3


def test_converge_doubling(capsys):
    code, out, _ = run(["converge", "--engine", "doubling", "--n-max", "10", "--p", "2",
                        "--grid-n", "16384"], capsys)
    norms = [float(r["norm_T_minus_R"]) for r in csv_rows(out)]
    assert all(a > b for a, b in zip(norms, norms[1:]))


def test_converge_discretize(capsys):
    code, out, _ = run(["converge", "--engine", "discretize", "--bins-N", "4"], capsys)
    rows = csv_rows(out)
    assert all(r["exact_bins"] == "true" for r in rows)


def test_quotient_check(capsys):
    code, out, _ = run(["quotient-check", "--pairs", "20"], capsys)
    rep = json.loads(out)
    for name in ("g0", "psi_u", "h2"):
        assert rep["biinvariance"][name]["max_functional_deviation"] == 0
    assert rep["psi_u_vs_h2"]["quotient_identifies_distinct_cosets"] is True
    assert rep["g0_vs_identity"]["phi_distance"] > 0


def test_operator_check(capsys):
    code, out, _ = run(["operator-check", "--maps", "g0", "--grid-n", "16384",
                        "--p-list", "2", "--s-list", "0", "0.7"], capsys)
    rows = csv_rows(out)
    assert len(rows) == 2
    assert all(float(r["dual_gap"]) <= 1e-6 for r in rows)


def test_outputs_are_byte_identical(tmp_path, capsys):
    argv = ["quotient-check", "--pairs", "10", "--seed", "7"]
    first, second = run(argv, capsys)[1], run(argv, capsys)[1]
    assert first == second
    for i in range(2):
        run(["converge", "--engine", "split", "--n-max", "4", "--out", str(tmp_path / "t.csv")], capsys)
        text = (tmp_path / "t.csv").read_bytes()
        if i == 0:
            saved = text
    assert saved == text


def test_invalid_bounds_rejected():
    with pytest.raises(SystemExit):
        cli.main(["converge", "--engine", "split", "--n-max", "0"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "quasiinv", "canon", "g0"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["nu"] == []
