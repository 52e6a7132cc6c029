import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from wsetlab._schema import ConfigError
from wsetlab.cli import (Assertion, config_from_dict, default_configs_dir, dump_csv, load_manifest, main,
                         resolve, run)

CONFIGS = default_configs_dir()

# one shipped config per worked example; keep in sync with configs/MANIFEST.json
TOPICS = [
    "aggregation-maps", "aggregation-robustness", "avar", "avar-robustness", "exponential-mle",
    "exponential-robustness", "exponential-wset", "gamma-wset", "gumbel-mle", "gumbel-wset",
    "intro-counterexample", "mean-nonrobustness", "metric-identity", "normal-wset", "one-sided-moment",
    "pareto-wset", "sdwn-quantile-coupling", "shortfall", "shortfall-blowup",
]


def cfg(command, payload, assertions=(), outputs=None, seed=0):
    d = {"schema_version": 1, "seed": seed, "command": command, "payload": payload,
         "assertions": list(assertions)}
    if outputs is not None:
        d["outputs"] = outputs
    return d


def write(tmp_path, d, name="c.json"):
    p = tmp_path / name
    p.write_text(d if isinstance(d, str) else json.dumps(d, indent=2))
    return str(p)


def cli(*args, env=None):
    e = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "wsetlab", *args], capture_output=True, text=True, env=e)


EXP1 = {"kind": "exponential", "theta": 1.0}


# ---------------------------------------------------------------- manifest


def test_manifest_complete():
    manifest = load_manifest(CONFIGS)
    assert sorted(manifest) == sorted(TOPICS)
    for topic, name in manifest.items():
        assert name == f"reproduce-{topic}.json"
        c = config_from_dict(json.loads((CONFIGS / name).read_text()))
        assert c.assertions, f"{name} declares no assertions"
        assert c.outputs["json"] == f"{topic}/result.json"


# ---------------------------------------------------------------- exit codes


def test_identity_metric_exits_zero(tmp_path):
    p = write(tmp_path, cfg("metric", {"kind": "levy", "mu": EXP1, "nu": EXP1},
                            [{"path": "value", "op": "<=", "bound": 1e-9}], {"json": "out.json"}))
    assert main(["metric", p, "--out-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "out.json").read_text())
    assert report["passed"] and report["result"]["value"] <= report["result"]["error_bound"] + 1e-12


def test_unknown_field_exits_two(tmp_path):
    d = cfg("metric", {"kind": "levy", "mu": EXP1, "nu": EXP1})
    d["gama"] = 1
    p = write(tmp_path, d)
    line = next(i for i, t in enumerate(Path(p).read_text().splitlines(), 1) if '"gama"' in t)
    r = cli("run", p)
    assert r.returncode == 2
    assert "gama" in r.stderr and f":{line}:" in r.stderr


def test_nested_unknown_field_exits_two(tmp_path):
    p = write(tmp_path, cfg("metric", {"kind": "levy", "mu": {"kind": "exponential", "thet": 1.0}, "nu": EXP1}))
    assert main(["run", p]) == 2


def test_broken_json_exits_two(tmp_path):
    r = cli("run", write(tmp_path, '{"schema_version": 1,\n  "seed": }'))
    assert r.returncode == 2 and "line 2" in r.stderr


def test_wrong_schema_version_exits_two(tmp_path):
    d = cfg("metric", {"kind": "levy", "mu": EXP1, "nu": EXP1})
    d["schema_version"] = 99
    assert main(["run", write(tmp_path, d)]) == 2


def test_subcommand_mismatch_exits_two(tmp_path):
    p = write(tmp_path, cfg("metric", {"kind": "levy", "mu": EXP1, "nu": EXP1}))
    assert main(["risk", p]) == 2


def test_domain_error_exits_three(tmp_path):
    p = write(tmp_path, cfg("eval", {"functional": {"kind": "mle_exponential"}, "sample": [0.0, 1.0]}))
    r = cli("eval", p)
    assert r.returncode == 3 and "OutsideDomain" in r.stderr


def test_failed_assertion_exits_one(tmp_path):
    p = write(tmp_path, cfg("risk", {"spec": {"kind": "avar", "alpha": 0.5},
                                     "dist": {"kind": "empirical", "points": [-2, -1, 0, 1]}},
                            [{"path": "value", "op": "<", "bound": 1.0}]))
    assert main(["risk", p]) == 1


def test_report_on_stdout_without_json_output(tmp_path):
    p = write(tmp_path, cfg("eval", {"functional": {"kind": "mean"}, "sample": [0, 0, 3]}))
    r = cli("eval", p)
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["value"] == 1.0
    assert r.stderr == ""


# ---------------------------------------------------------------- subcommands


def test_eval_family_table(tmp_path):
    d = cfg("eval", {"functional": {"kind": "mle_gumbel"}, "family": {"name": "gumbel", "grid": [0.5, 2.0]}},
            [{"path": "max_abs_error", "op": "<=", "bound": 1e-4}], {"json": "r.json", "csv": "r.csv"})
    code, report = run(config_from_dict(d), out_dir=tmp_path)
    assert code == 0
    lines = (tmp_path / "r.csv").read_text().split("\n")
    assert lines[0] == "theta,value,abs_error" and lines[1].startswith("0.5,") and lines[-1] == ""


def test_sdwn_table(tmp_path):
    d = cfg("sdwn", {"sequence": {"kind": "parametric", "family": "exponential", "theta0": 1.0, "probe": "scale"},
                     "young": {"form": "linear"}, "n_max": 100, "ns": [1, 10, 100]},
            [{"path": "luxemburg_norm[*]", "op": "<=", "bound": 1.0 + 1e-9}], {"csv": "s.csv"})
    code, _ = run(config_from_dict(d), out_dir=tmp_path)
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert code == 0 and rows[0] == "n,luxemburg_norm,psi_metric" and len(rows) == 4


def test_point_mass_escape_wset(tmp_path):
    d = cfg("wset-check", {"mode": "sequence", "sequence": {"kind": "point_mass_escape"},
                           "gauges": {"kind": "constant", "gauge": {"form": "power", "p": 1.0}},
                           "K": 1, "n_max": 100},
            [{"path": "verdict", "op": "==", "bound": "fail"}, {"path": "failing_k", "op": "==", "bound": 1}])
    code, report = run(config_from_dict(d))
    assert code == 0, report["assertions"]


def test_aggregate_summary(tmp_path):
    d = cfg("aggregate", {"marginals": [{"kind": "dirac", "c": 1.0}, {"kind": "dirac", "c": 2.0}],
                          "couplings": [{"kind": "independent"}, {"kind": "comonotone"}],
                          "map": {"kind": "max"}, "n": 50},
            [{"path": "couplings[*].mean", "op": "==", "bound": 2.0, "tol": 0.0}])
    code, report = run(config_from_dict(d))
    assert code == 0, report["assertions"]


def test_seed_override(tmp_path):
    p = write(tmp_path, cfg("robustness", {
        "functional": {"kind": "mean"}, "path": {"kind": "within_family", "family": "exponential",
                                                 "theta0": 1.0, "slope": 0.1},
        "t_grid": [0.0, 1.0], "n_grid": [10], "R": 60}, outputs={"json": "o.json"}, seed=1))
    assert main(["robustness", p, "--seed", "9", "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "o.json").read_text())["seed"] == 9


# ---------------------------------------------------------------- determinism


ROBUST = cfg("robustness", {
    "functional": {"kind": "mle_exponential"},
    "path": {"kind": "within_family", "family": "exponential", "theta0": 1.0, "slope": 1.0},
    "t_grid": [0.0, 0.05], "n_grid": [10, 100], "R": 200},
    [{"path": "rows[*].pi_hat", "op": "<=", "bound": 1.0}], {"json": "r/result.json", "csv": "r/table.csv"})


def test_byte_stable_outputs(tmp_path):
    p = write(tmp_path, ROBUST)
    outs = []
    for sub in ("a", "b"):
        assert main(["robustness", p, "--out-dir", str(tmp_path / sub)]) == 0
        outs.append(((tmp_path / sub / "r/result.json").read_bytes(), (tmp_path / sub / "r/table.csv").read_bytes()))
    assert outs[0] == outs[1]
    assert b"\r" not in outs[0][1]


def test_outputs_independent_of_worker_count(tmp_path):
    p = write(tmp_path, ROBUST)
    a = cli("robustness", p, "--out-dir", str(tmp_path / "one"), env={"WSETLAB_THREADS": "1"})
    b = cli("robustness", p, "--out-dir", str(tmp_path / "two"), env={"WSETLAB_THREADS": "2"})
    assert a.returncode == b.returncode == 0
    for f in ("r/result.json", "r/table.csv"):
        assert (tmp_path / "one" / f).read_bytes() == (tmp_path / "two" / f).read_bytes()


def test_nan_serialised_as_null():
    from wsetlab.cli import dump_json
    assert json.loads(dump_json({"x": float("nan"), "y": float("inf")})) == {"x": None, "y": None}


def test_csv_repr_floats():
    from wsetlab.cli import Table
    text = dump_csv(Table(("a", "b"), ((1, 0.1), (2, 1e-20))))
    assert text == "a,b\n1,0.1\n2,1e-20\n"


# ---------------------------------------------------------------- assertions and paths


def test_resolve_paths():
    obj = {"a": [{"b": 1}, {"b": 2}], "c": {"d": [[1, 2], [3, 4]]}}
    assert resolve(obj, "a[*].b") == [1, 2]
    assert resolve(obj, "a[-1].b") == [2]
    assert resolve(obj, "c.d[*][-1]") == [2, 4]
    assert resolve(obj, "missing") == []


@pytest.mark.parametrize("op, bound, tol, value, want", [
    ("<=", 1.0, 0.0, 1.0, True), ("<", 1.0, 0.0, 1.0, False), (">=", 0.5, 0.0, 0.7, True),
    (">", 0.5, 0.0, 0.5, False), ("==", 1.5, 0.0, 1.5, True), ("==", 1.5, 1e-3, 1.5009, True),
    ("==", "pass", 0.0, "pass", True), ("==", True, 0.0, 1, False), ("<=", 1.0, 0.0, None, False),
    ("<=", 1.0, 0.0, float("nan"), False),
])
def test_assertion_semantics(op, bound, tol, value, want):
    assert Assertion("x", op, bound, tol).check(value) is want


@pytest.mark.parametrize("bad", [
    {"path": "x", "op": "~", "bound": 1},
    {"path": "x", "op": "<=", "bound": "pass"},
    {"path": "x", "op": "<=", "bound": 1, "extra": 0},
])
def test_assertion_schema(bad):
    with pytest.raises(ConfigError):
        config_from_dict(cfg("metric", {}, [bad]))


def test_reproduce_all_with_custom_manifest(tmp_path):
    conf = tmp_path / "conf"
    conf.mkdir()
    (conf / "MANIFEST.json").write_text(json.dumps({"one": "one.json"}))
    (conf / "one.json").write_text(json.dumps(cfg("eval", {"functional": {"kind": "mean"}, "sample": [1, 2, 3]},
                                                  [{"path": "value", "op": "==", "bound": 2.0}],
                                                  {"json": "one/result.json"})))
    assert main(["reproduce-all", "--configs", str(conf), "--out-dir", str(tmp_path / "out")]) == 0
    assert json.loads(Path(tmp_path / "out/one/result.json").read_text())["passed"]
