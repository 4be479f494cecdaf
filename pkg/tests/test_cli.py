import io
import json
from pathlib import Path

import pytest

from switchwalk.cli import EXIT_BAD_SPEC, EXIT_FAIL, EXIT_OK, num, parse_spec, run

SPECS = Path(__file__).resolve().parent.parent / "specs"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write_spec(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def entries(table):
    return {k: v for k, v in table["entries"]}


def test_verify_simple_walk():
    code, out, _ = call("verify", "--spec", str(SPECS / "pm1.json"), "--tol", "1e-10")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["passed"] and not doc["failed"]
    assert doc["checks"]["rw_mu_equals_p"]["residual"]["value"] == "0"
    assert doc["checks"]["rw_p_equals_p_prime"]["residual"]["value"] == "0"
    assert doc["constants"]["p"]["value"] == "1/2"


def test_stationary_simple_walk_mu_is_half():
    code, out, _ = call("stationary", "--spec", str(SPECS / "pm1.json"), "--window", "10")
    doc = json.loads(out)
    lo, hi = doc["mu"]["interior"]
    assert code == EXIT_OK
    assert all(v == "1/2" for k, v in doc["mu"]["entries"] if lo <= k <= hi)
    for key in ("window", "interior", "span", "backend", "provenance"):
        assert key in doc["mu"] and key in doc["nu"]


def test_stationary_deterministic():
    code, out, _ = call("stationary", "--spec", str(SPECS / "deterministic.json"))
    doc = json.loads(out)
    assert code == EXIT_OK
    assert entries(doc["nu"]) == {-1: "1", 0: "1"}
    lo, hi = doc["mu"]["interior"]
    mu = {k: v for k, v in doc["mu"]["entries"] if lo <= k <= hi and v != "0"}
    assert mu == {-1: "1", 0: "1"}
    assert entries(doc["mu_normalized"]) == {-1: "1/2", 0: "1/2"}


def test_assumption_violation_exit_code():
    code, _, err = call("verify", "--spec", str(SPECS / "bad_drift.json"))
    assert code == EXIT_BAD_SPEC
    assert "assumption" in err and "E X1" in err


def test_failed_verification_names_residual():
    # a float-backend spec cannot meet a zero tolerance
    code, out, err = call("verify", "--spec", str(SPECS / "borovkov.json"), "--tol", "0")
    assert code == EXIT_FAIL
    failed = json.loads(out)["failed"]
    assert failed and all(name in err for name in failed)


@pytest.mark.parametrize("doc", [
    {"X1": [[-1, "1/2"]], "X1p": [[1, "1"]]},
    {"X1": [[-1, "1"]]},
    {"X1": [[-1, "1"]], "X1p": [[1, "1"]], "base": "2"},
    {"X1": [[-1, "x"]], "X1p": [[1, "1"]]},
    {"X1": {"family": "normal"}, "X1p": [[1, "1"]]},
    {"X1": {"family": "cauchy"}, "X1p": {"family": "normal"}},
    [1, 2],
])
def test_malformed_specs(tmp_path, doc):
    code, _, err = call("ladder", "--spec", write_spec(tmp_path, doc))
    assert code == EXIT_BAD_SPEC and err


def test_unreadable_spec(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert call("ladder", "--spec", str(p))[0] == EXIT_BAD_SPEC
    assert call("ladder", "--spec", str(tmp_path / "missing.json"))[0] == EXIT_BAD_SPEC
    assert call("ladder")[0] == EXIT_BAD_SPEC


def test_continuous_spec_is_simulation_only():
    assert call("verify", "--spec", str(SPECS / "gaussian.json"))[0] == EXIT_BAD_SPEC


def test_rationals_exact_and_floats_not():
    spec, _ = parse_spec({"X1": [[-1, "0.5"], [1, "1/2"]], "X1p": [[-1, 0.5], [1, 0.5]]})
    assert spec.x1.backend == "exact" and spec.x1p.backend == "float"


def test_base_step_and_span(tmp_path):
    doc = {"base": "1/2", "X1": [["-1", "1/2"], ["1", "1/2"]], "X1p": [["-1", "1/2"], ["1", "1/2"]]}
    code, out, _ = call("ladder", "--spec", write_spec(tmp_path, doc))
    assert code == EXIT_OK
    assert json.loads(out)["spec"]["span"] == "1"


def test_ladder_output():
    code, out, _ = call("ladder", "--spec", str(SPECS / "skew.json"))
    doc = json.loads(out)
    assert code == EXIT_OK
    assert entries(doc["laws"]["D"]) == {-2: "1/3", -1: "1/3", 0: "1/3"}
    assert doc["constants"]["p"] == {"provenance": "exact", "value": "2/3"}


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        for cmd in ("ladder", "stationary", "verify", "simulate"):
            code, _, _ = call(cmd, "--spec", str(SPECS / "skew.json"), "--out", str(tmp_path / d),
                              "--format", "csv", "--steps", "20000", "--replicas", "2")
            assert code == EXIT_OK
        assert call("report", "--out", str(tmp_path / d))[0] == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "report.json" in names and "stationary.csv" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert set(report["sections"]) == {"ladder", "stationary", "verify", "simulate"}


def test_csv_tables():
    code, out, _ = call("stationary", "--spec", str(SPECS / "deterministic.json"), "--format", "csv",
                        "--window", "3")
    lines = out.splitlines()
    assert lines[0] == "table,index,x,value"
    assert "nu,-1,-1,1" in lines


def test_report_without_outputs(tmp_path):
    assert call("report", "--out", str(tmp_path))[0] == EXIT_BAD_SPEC


def test_simulate_continuous_interval_map():
    code, out, _ = call("simulate", "--spec", str(SPECS / "interval_map.json"))
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["trajectory"]["positions_head"][:3] == [0.0, -1.0, 0.41421356237309515]


def test_num_serialization():
    from fractions import Fraction
    assert num(Fraction(2, 3)) == "2/3"
    assert num(0.1) == 0.1 and json.dumps(num(0.1)) == "0.1"
    assert num(float("inf")) == "inf"
