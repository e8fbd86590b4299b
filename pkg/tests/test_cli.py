import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglab.cli import dumps, parse_complex, parse_grid, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def ok(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return out


def test_mag_two_point():
    data = json.loads(ok("mag", "--space", "twopoint", "--R", "1", "--nu", "-1"))
    row = data["rows"][0]
    assert abs(row["re"] - math.e) < 1e-12 and row["im"] == 0


def test_mag_grid_and_csv():
    text = ok("--format", "csv", "mag", "--space", "sphere:n=2", "--R", "1,2", "--nu", "1,-1")
    lines = text.strip().splitlines()
    assert lines[0] == "R,nu,nu_im,re,im"
    assert len(lines) == 5


def test_mag_finite_file(tmp_path):
    path = tmp_path / "two.json"
    path.write_text(json.dumps({"labels": [1, 2], "dist": [[0, 1], [1, 0]]}))
    data = json.loads(ok("mag", "--file", str(path), "--R", "1", "--nu", "-1"))
    assert abs(data["rows"][0]["re"] - 2 / (1 + math.exp(-1))) < 1e-12


def test_strict_metric(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dist": [[0, 1], [2, 0]]}))
    code, _, err = call("mag", "--file", str(path), "--R", "1", "--strict")
    assert code == 3 and json.loads(err)["error"] == "MetricViolation"
    code, _, _ = call("mag", "--file", str(path), "--R", "1")
    assert code == 0


def test_schema_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"labels": [1, 2]}))
    code, _, err = call("mag", "--file", str(path), "--R", "1")
    assert code == 3 and json.loads(err)["error"] == "SchemaError"


@pytest.mark.parametrize("argv,code,name", [
    (("mag", "--space", "sphere:n=0", "--R", "1"), 2, "ParseError"),
    (("mag", "--space", "padic:p=4", "--R", "1"), 3, "NotPrime"),
    (("mag", "--space", "twopoint", "--R", "abc"), 2, "ParseError"),
    (("frobnicate",), 2, "ParseError"),
    ((), 2, "ParseError"),
    (("beta", "--space", "twopoint"), 2, "ParseError"),
    (("beta", "--space", "sphere:n=2", "--z", "-2.5", "--depth", "1,0"), 3, "InsufficientDepth"),
])
def test_errors(argv, code, name):
    got, out, err = call(*argv)
    assert got == code and out == ""
    assert json.loads(err)["error"] == name


def test_beta_values():
    data = json.loads(ok("beta", "--space", "sphere:n=2", "--z", "0.5,-2.5"))
    rows = data["rows"]
    assert rows[0]["method"] == "direct" and rows[1]["method"] == "mellin"
    for row in rows:
        z = row["z_re"]
        assert abs(row["re"] - 2 ** (z + 1) / (z + 2)) < 1e-8


def test_beta_padic_poles():
    data = json.loads(ok("beta", "--space", "padic:p=2", "--poles", "--rect", "-1.5,-0.5,-30,30"))
    entries = data["poles"]["entries"]
    assert len(entries) == 7
    step = 2 * math.pi / math.log(2)
    for e in entries:
        assert abs(e["re"] + 1) < 1e-8
        assert abs(e["im"] / step - round(e["im"] / step)) < 1e-8


def test_expand():
    data = json.loads(ok("expand", "--space", "sphere:n=2:metric=geodesic", "--order", "2"))
    fit = data["fit"]
    assert fit["gamma"] == -2
    assert all(abs(a - b) < 1e-6 for a, b in zip(fit["coeffs"], [0.5, 0, -0.5]))


def test_gtable():
    data = json.loads(ok("gtable", "--max-j", "2"))
    assert data["table"][2]["g"] == "nu*(nu-1)/2*t1^2 + nu*t2"
    assert data["table"][0]["g"] == "1"


def test_verify():
    data = json.loads(ok("verify-thm2", "--space", "sphere:n=2", "--order", "3"))
    assert data["report"]["passed"] is True


def test_output_file(tmp_path):
    dest = tmp_path / "out.json"
    assert ok("--output", str(dest), "gtable", "--max-j", "1") == ""
    assert json.loads(dest.read_text())["max_j"] == 1


def test_convert_exact():
    data = json.loads(ok("convert", "--gamma", "-2", "--coeffs", "1/2,0,-1/2",
                         "--from-nu", "1", "--to-nu", "-1"))
    exp = data["expansion"]
    assert exp["gamma"] == "2" and exp["coeffs"] == ["2", "0", "2"]


@settings(max_examples=15, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=9), min_size=3, max_size=5),
       st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4))
def test_convert_round_trip(rest, a0):
    coeffs = ",".join(str(c) for c in [a0] + rest)
    first = json.loads(ok("convert", "--gamma", "-2", "--coeffs", coeffs,
                          "--from-nu", "-1", "--to-nu", "1"))["expansion"]
    back = json.loads(ok("convert", "--gamma", first["gamma"], "--coeffs",
                         ",".join(first["coeffs"]), "--from-nu", "1", "--to-nu", "-1"))["expansion"]
    assert [Fraction(c) for c in back["coeffs"]] == [a0] + rest
    assert back["gamma"] == "-2"


@pytest.mark.parametrize("argv", [
    ("mag", "--space", "sphere:n=3", "--R", "0.5,5", "--nu", "1/2,-1,2"),
    ("beta", "--space", "padic:p=3", "--z", "1,0.5+1i"),
    ("gtable", "--max-j", "4"),
])
def test_determinism(argv):
    assert ok(*argv) == ok(*argv)


def test_dumps_format():
    text = dumps({"a": 0.1, "b": 1 + 2j, "c": Fraction(1, 3), "d": [float("inf")]})
    data = json.loads(text)
    assert data["a"] == 0.1 and data["b"] == {"re": 1.0, "im": 2.0}
    assert data["c"] == "1/3" and data["d"] == ["inf"]
    assert "0.10000000000000001" in text


def test_parsers():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_grid("1,2,3") == [1.0, 2.0, 3.0]
    assert len(parse_grid("geom:1:100:5")) == 5


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("MAGLAB_TOL", "not-a-number")
    code, _, err = call("beta", "--space", "sphere:n=2", "--z", "0.5")
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "maglab", "gtable", "--max-j", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["table"][1]["g"] == "nu*t1"
