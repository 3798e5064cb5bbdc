import json
import math

import pytest

import wbkit


def test_closed_forms():
    c = 0.75
    primal, dual = wbkit.cone_burgers(c, 0.5)
    assert primal == pytest.approx(wbkit.cone_burgers_exact(c, 0.5), rel=1e-6)
    assert dual == pytest.approx(primal, rel=1e-6)
    a = math.pi / 2
    expect = a * a / (2 * math.pi * (1 - a / (2 * math.pi))) * math.log(1 / 0.05)
    assert wbkit.cone_dual_norm_sq(a) == pytest.approx(expect, rel=1e-12)
    assert wbkit.dipole_improved_bound(0.5) > 0


def test_verify_econe_deterministic():
    a = wbkit.verify("econe")
    b = wbkit.verify("econe", jobs=2)
    assert a["failures"] == 0
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert all(c["holds"] for c in a["checks"] if not c.get("informational"))


def test_verify_bad_config():
    with pytest.raises(wbkit.ConfigError):
        wbkit.verify("nope")
    with pytest.raises(wbkit.ConfigError):
        wbkit.verify("cone", {"r0": -1})


def test_loop_check_cap_equality():
    rep = wbkit.loop_check(wbkit.fixture("cap_loop"))
    assert rep["exit_code"] == 0
    assert rep["iso"]["equality"]
    assert rep["burgers"]["magnitude"] == pytest.approx(2 * math.sqrt(3), rel=1e-6)


def test_loop_check_malformed():
    with pytest.raises(wbkit.ParseError):
        wbkit.loop_check({"gamma": [[0, 0, 0]], "normal": [[0, 0, 1]]})


def test_solve_cone_problem():
    rep = wbkit.solve(wbkit.fixture("cone_problem"))
    assert rep["exit_code"] == 0
    assert rep["converged"]
    assert len(rep["u"]) > 100
