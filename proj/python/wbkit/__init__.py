"""Python front end to the wbkit C++ library.

Results come back as plain dicts parsed from the same JSON the CLI writes.
"""

import json
import math
import tempfile
from pathlib import Path

from . import _wbkit
from ._wbkit import ConfigError, ParseError, WbError, cone_burgers, cone_dual_norm_sq, dipole_improved_bound

__all__ = [
    "ConfigError",
    "ParseError",
    "WbError",
    "cone_burgers",
    "cone_burgers_exact",
    "cone_dual_norm_sq",
    "dipole_improved_bound",
    "fixture",
    "fixture_names",
    "loop_check",
    "solve",
    "verify",
]

SCENARIOS = ("cone", "econe", "dipole", "cap", "graph")


def verify(scenario, params=None, *, levels=3, seed=1, jobs=1, tol_scale=1.0):
    """Run a scenario; returns the report dict with an extra "failures" count."""
    params = {str(k): str(v) for k, v in (params or {}).items()}
    failures, text = _wbkit.verify_json(scenario, params, levels, seed, jobs, tol_scale)
    rep = json.loads(text)
    rep["failures"] = failures
    return rep


def fixture_names():
    return list(_wbkit.fixture_names())


def fixture(name):
    """Text of a bundled input file."""
    return _wbkit.fixture_text(name)


def _as_file(src, tmp, name):
    # accepts a path or the JSON text itself
    if isinstance(src, Path) or (isinstance(src, str) and not src.lstrip().startswith("{")):
        return str(src)
    p = Path(tmp) / name
    p.write_text(src if isinstance(src, str) else json.dumps(src))
    return str(p)


def loop_check(loop, *, tol_scale=1.0):
    """Check a framed loop given as a path, JSON text or dict."""
    with tempfile.TemporaryDirectory() as tmp:
        code, summary = _wbkit.loop_check(_as_file(loop, tmp, "loop.json"), tmp, tol_scale)
        out = json.loads((Path(tmp) / "loop_report.json").read_text())
    out.update(exit_code=code, summary=summary)
    return out


def solve(problem, *, out_dir=None, tol_scale=1.0):
    """Solve a problem file; the potential is returned as (x, y, u) rows."""
    with tempfile.TemporaryDirectory() as tmp:
        dest = Path(out_dir) if out_dir else Path(tmp) / "out"
        code, summary = _wbkit.solve(_as_file(problem, tmp, "problem.json"), str(dest), tol_scale)
        out = json.loads((dest / "solution.json").read_text())
        rows = (dest / "u.csv").read_text().splitlines()[1:]
    out["u"] = [tuple(float(v) for v in r.split(",")) for r in rows]
    out.update(exit_code=code, summary=summary)
    return out


def cone_burgers_exact(c, r):
    return 2.0 * r * abs(math.sin(math.pi * c))
