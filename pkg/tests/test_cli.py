import json
import os

import pytest

from qeuclid.cli import atomic_write, main, parse_family
from qeuclid.ncalg import parse_expr
from qeuclid.parser import ParseError
from qeuclid.suites import GOLDEN_CORPUS


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_normalize(capsys):
    code, out = run(capsys, "normalize", "xi[0]^2")
    assert code == 0
    assert json.loads(out.out)["normal_form"] == "(s^4 - s^-4)*xi[-1]*xi[1]"


def test_vacuum(capsys):
    code, out = run(capsys, "normalize", "d[0](1)")
    assert code == 0 and json.loads(out.out)["normal_form"] == "0"


@pytest.mark.parametrize(
    "argv",
    [
        ("normalize", "x[7]"),
        ("normalize", "x[0] +* x[1]"),
        ("normalize",),
        ("verify",),
        ("verify", "--suite", "nope"),
        ("integrate", "--family", "n=3"),
        ("integrate", "--q", "1.2", "--measure", "jackson:beta=0.3"),
        ("integrate", "--q", "1.2", "--family", "n=3,z=1"),
        ("bogus",),
        ("tensors", "--N", "2"),
        ("hodge", "1", "--N", "5"),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 2
    assert "error" in out.err


def test_verify_pass_and_fail_codes(capsys, tmp_path):
    path = tmp_path / "structure.json"
    code, out = run(capsys, "verify", "--suite", "structure", "--N", "3", "--out", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert data["passed"] and all(c["anchor"] for c in data["checks"])
    code, out = run(capsys, "verify", "--suite", "golden")
    assert code == 1
    assert "FAIL" in out.out


def test_inapplicable_is_not_failure(capsys):
    code, out = run(capsys, "stokes", "--q", "1.2", "--family", "n=1,k=1")
    assert code == 0
    assert "INAPPLICABLE" in out.out


def test_failed_checks_carry_counterexamples(capsys, tmp_path):
    path = tmp_path / "g.json"
    run(capsys, "verify", "--suite", "golden", "--out", str(path))
    for c in json.loads(path.read_text())["checks"]:
        if c["status"] == "fail":
            assert c["counterexample"]


def test_hermiticity_command(capsys):
    code, out = run(capsys, "hermiticity", "--N", "3", "--q", "1.2", "--measure", "jackson:beta=0", "--family", "n=3,j=0")
    assert code == 0
    assert out.out.strip().endswith("hermiticity: PASS")


def test_csv_outputs(capsys, tmp_path):
    path = tmp_path / "f.csv"
    assert main(["integrate", "--q", "1.2", "--family", "n=3,k=2", "--format", "csv", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "y,re,im" and len(lines) > 10
    path = tmp_path / "t.csv"
    assert main(["tensors", "--format", "csv", "--out", str(path)]) == 0
    assert path.read_text().startswith("tensor,idx,val")


def test_operator_verbs(capsys):
    for verb, key in (("d", "d"), ("hodge", "hodge"), ("delta", "delta")):
        code, out = run(capsys, verb, "x[0]")
        assert code == 0 and key in json.loads(out.out)
    code, out = run(capsys, "laplacian", "x[0]^2")
    assert json.loads(out.out)["identity_holds"] is True


def test_action_and_harmonics(capsys):
    code, out = run(capsys, "action", "--q", "1.2", "--measure", "uniform", "--family", "n=2,k=2", "--M", "1")
    assert code == 0 and json.loads(out.out)["value"] > 0
    code, out = run(capsys, "harmonics", "--lmax", "2")
    assert [lv["dim"] for lv in json.loads(out.out)["levels"]] == [1, 3, 5]


def test_atomic_write_leaves_no_partial_file(tmp_path):
    path = tmp_path / "a.json"
    atomic_write(str(path), "one")
    atomic_write(str(path), "two")
    assert path.read_text() == "two"
    assert os.listdir(tmp_path) == ["a.json"]


def test_unwritable_output(capsys, tmp_path):
    code, out = run(capsys, "tensors", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == 2


def test_family_parser():
    fam = parse_family("n=3,j=1/2,k=4")
    assert fam["n"] == 3 and str(fam["j"]) == "1/2" and fam["k"] == 4


@pytest.mark.parametrize("text", GOLDEN_CORPUS)
def test_print_parse_round_trip(text):
    e = parse_expr(text)
    assert parse_expr(str(e)) == e
    assert str(parse_expr(str(e))) == str(e)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_expr("x[0] +\n  * x[1]")
    assert (err.value.line, err.value.column) == (2, 3)
