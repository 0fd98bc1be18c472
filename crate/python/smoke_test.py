"""Smoke test for the abmetric Python extension.

Build first:

    cargo build --release -p abmetric-py --features extension-module

then run `python python/smoke_test.py` (or `pytest python/`). The module is
loaded straight from target/release unless ABMETRIC_PY_LIB points elsewhere.
"""

import importlib.machinery
import importlib.util
import json
import math
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    default = ROOT / "target" / "release" / "libabmetric_py.so"
    path = pathlib.Path(os.environ.get("ABMETRIC_PY_LIB", default))
    if not path.exists():
        sys.exit(f"{path} not found; build the extension first")
    loader = importlib.machinery.ExtensionFileLoader("abmetric_py", str(path))
    spec = importlib.util.spec_from_file_location("abmetric_py", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


ab = load()


def test_randers_scalars():
    row = ab.Phi.randers().scalars(0.0, 0.25, 2)
    # Randers: Q = 1 and Δ = 1 + s
    assert row["Q"] == 1.0
    assert row["Delta"] == 1.0
    row = ab.Phi.randers().scalars(0.2, 0.25, 2)
    assert math.isclose(row["Delta"], 1.2, rel_tol=1e-15)
    assert math.isclose(row["Xi"], -1.125, rel_tol=1e-12)


def test_xi_profile():
    prof = ab.Phi.quadratic().xi_profile(0.25, 3)
    assert len(prof["values"]) == 81
    assert not prof["constant"]
    flat = ab.Phi.riemannian().xi_profile(0.25, 3)
    assert all(v == 0.0 for v in flat["values"])


def test_fixture_reports():
    names = ab.Fixture.builtin_names()
    assert "funk" in names
    funk = ab.Fixture.builtin("funk")
    assert funk.n >= 2 and funk.points
    cls = funk.classify()
    assert cls["equivalence_verdict"] != "violation"
    checks = funk.verify()
    assert checks and all(c["pass"] for c in checks)
    curv = funk.curvature(funk.points[0], [1.0] + [0.0] * (funk.n - 1), oracles=True)
    assert abs(curv["S_closed"] - curv["S_oracle"]) < 1e-5 * (1 + abs(curv["S_oracle"]))


def test_bad_input_raises():
    try:
        ab.Fixture.builtin("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown fixture accepted")


def test_run_cli():
    config = ROOT / "crates" / "core" / "fixtures" / "scalars_randers.toml"
    code, text = ab.run("scalars", str(config))
    assert code == 0
    assert f'"schema_version": "{ab.SCHEMA_VERSION}"' in text
    code, _ = ab.run("scalars", str(config), format="csv")
    assert code == 0
    code, _ = ab.run("verify", str(ROOT / "missing.toml"))
    assert code == 1


def test_reports_match_schema():
    try:
        import jsonschema
    except ImportError:
        return
    schema = json.loads((ROOT / "docs" / "report.schema.json").read_text())
    config = str(ROOT / "crates" / "core" / "fixtures" / "funk.toml")
    for command in ["scalars", "analyze", "verify", "classify", "equivalence"]:
        code, text = ab.run(command, config)
        assert code == 0, command
        jsonschema.validate(json.loads(text), schema)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
