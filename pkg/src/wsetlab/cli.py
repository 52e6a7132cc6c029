"""Command line front end: strict JSON experiment configs, deterministic artifacts.

A config is a JSON object

    {"schema_version": 1, "seed": 0, "command": "<subcommand>",
     "payload": {...}, "assertions": [...], "outputs": {"json": ..., "csv": ...}}

Exit status: 0 when every assertion holds, 1 when one fails, 2 on a schema
violation, 3 on a runtime domain error. Logs go to standard error only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wsetlab._schema import ConfigError, strict
from wsetlab.dist import (FAMILIES, Dirac, Distribution, Empirical, dist_from_dict, mixture,
                          parametric_family, read_csv_column)
from wsetlab.errors import WsetlabError
from wsetlab.frechet import FrechetSpec, aggregation_from_dict, aggregation_ui_bound, coupling_from_dict
from wsetlab.functionals import functional_from_dict, plug_in
from wsetlab.gauge import eval_gauge, gauge_from_dict, sequence_from_dict
from wsetlab.integrability import (constant_probe, parametric_wset_check, scale_probe,
                                   sequence_condition_e, shift_probe, uniform_integrating_check)
from wsetlab.metrics import (DEFAULT_K, gauge_gap, levy_distance, prohorov_distance,
                             prohorov_distance_finite, psi_metric, total_variation)
from wsetlab.risk import risk_from_dict, sdwn_convergence, shortfall_blowup_sequence
from wsetlab.robustness import (CouplingPath, GeneralMixture, PointMass, WithinFamily,
                                robustness_profile)
from wsetlab.young import young_from_dict

log = logging.getLogger("wsetlab")

SCHEMA_VERSION = 1
COMMANDS = ("metric", "wset-check", "eval", "risk", "sdwn", "aggregate", "robustness")
COMPARATORS = ("<=", "<", ">=", ">", "==")

EXIT_OK, EXIT_ASSERT, EXIT_SCHEMA, EXIT_DOMAIN = 0, 1, 2, 3


# ---------------------------------------------------------------- parsing helpers


def _sub(where, fn, value):
    """Parse a nested literal and prefix any schema error with ``where``."""
    try:
        return fn(value)
    except ConfigError as e:
        tail = e.where.split(".", 1)[1] if "." in e.where else ""
        raise ConfigError(f"{where}.{tail}" if tail else where, str(e).split(": ", 1)[-1]) from None
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(where, str(e)) from None


def _num(d, key, where, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {type(v).__name__}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"{where}.{key}", "expected an integer")
        return int(v)
    return float(v)


def _num_list(d, key, where, kind=float):
    v = d.get(key)
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}.{key}", "expected a non-empty list of numbers")
    return [_num({key: x}, key, where, kind=kind) for x in v]


def _family(name, where):
    if name not in FAMILIES:
        raise ConfigError(where, f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    return name


def _fixed(d, where):
    fx = d.get("fixed", {})
    if not isinstance(fx, dict):
        raise ConfigError(where, "expected an object")
    return {k: _num(fx, k, where) for k in sorted(fx)}


def _probe(d, where):
    strict(d, {"theta0", "kind"}, where)
    theta0 = _num(d, "theta0", where)
    makers = {"shift": shift_probe, "scale": scale_probe, "constant": constant_probe}
    if d["kind"] not in makers:
        raise ConfigError(f"{where}.kind", f"unknown probe {d['kind']!r}")
    return makers[d["kind"]](theta0)


def _law_sequence(d, where):
    """An indexed sequence n -> mu_n together with its intended limit."""
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "parametric":
        strict(d, {"kind", "family", "theta0", "probe"}, where, optional={"fixed"})
        fam = _family(d["family"], f"{where}.family")
        fx = _fixed(d, f"{where}.fixed")
        p = _probe({"theta0": d["theta0"], "kind": d["probe"]}, where)
        return (lambda n: parametric_family(fam, p.path(n), fx)), parametric_family(fam, p.theta0, fx)
    if kind == "point_mass_escape":
        # (1 - 1/n) delta_0 + (1/n) delta_n: weakly to delta_0, first moment stuck at 1
        strict(d, {"kind"}, where)
        return (lambda n: Dirac(1.0) if n == 1 else
                mixture([(1.0 - 1.0 / n, Dirac(0.0)), (1.0 / n, Dirac(float(n)))])), Dirac(0.0)
    if kind == "shortfall_blowup":
        strict(d, {"kind"}, where)
        return shortfall_blowup_sequence, Dirac(0.0)
    raise ConfigError(f"{where}.kind", f"unknown sequence kind {kind!r}")


def _scaled(mu: Distribution, s: float) -> Distribution:
    if s == 1.0:
        return mu
    if not mu.is_atomic:
        raise ConfigError("payload.scale", "scaling is only supported for atomic laws")
    pts, w = mu.atoms()
    return Empirical(s * np.asarray(pts), np.asarray(w))


def _path(d, where):
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "within_family":
        strict(d, {"kind", "family", "theta0", "slope"}, where, optional={"fixed"})
        return WithinFamily(_family(d["family"], f"{where}.family"), _num(d, "theta0", where),
                            _num(d, "slope", where), tuple(_fixed(d, f"{where}.fixed").items()))
    if kind == "point_mass":
        strict(d, {"kind", "base", "c"}, where)
        return PointMass(_sub(f"{where}.base", dist_from_dict, d["base"]), _num(d, "c", where))
    if kind == "general_mixture":
        strict(d, {"kind", "base", "other"}, where)
        return GeneralMixture(_sub(f"{where}.base", dist_from_dict, d["base"]),
                              _sub(f"{where}.other", dist_from_dict, d["other"]))
    if kind == "coupling":
        strict(d, {"kind", "marginals", "map", "base", "other"}, where)
        return CouplingPath(_marginals(d, where), _sub(f"{where}.map", aggregation_from_dict, d["map"]),
                            _sub(f"{where}.base", coupling_from_dict, d["base"]),
                            _sub(f"{where}.other", coupling_from_dict, d["other"]))
    raise ConfigError(f"{where}.kind", f"unknown path kind {kind!r}")


def _marginals(d, where):
    ms = d.get("marginals")
    if not isinstance(ms, list) or not ms:
        raise ConfigError(f"{where}.marginals", "expected a non-empty list of distributions")
    return tuple(_sub(f"{where}.marginals[{i}]", dist_from_dict, m) for i, m in enumerate(ms))


# ---------------------------------------------------------------- commands
#
# Each command is split into a parser (payload -> immutable task, schema errors
# only) and an executor (task, seed -> result dict and optional CSV table).


@dataclass(frozen=True)
class Table:
    header: tuple
    rows: tuple


def parse_metric(p):
    w = "payload"
    strict(p, {"kind", "mu", "nu"}, w, optional={"gauges", "gauge", "K"})
    kinds = ("levy", "prohorov", "prohorov_finite", "total_variation", "psi", "gauge_gap")
    if p["kind"] not in kinds:
        raise ConfigError(f"{w}.kind", f"unknown metric {p['kind']!r}")
    task = {"kind": p["kind"], "mu": _sub(f"{w}.mu", dist_from_dict, p["mu"]),
            "nu": _sub(f"{w}.nu", dist_from_dict, p["nu"])}
    if p["kind"] == "psi":
        if "gauges" not in p:
            raise ConfigError(f"{w}.gauges", "required for the psi metric")
        task["gauges"] = _sub(f"{w}.gauges", sequence_from_dict, p["gauges"])
        task["K"] = _num(p, "K", w, DEFAULT_K, int)
    if p["kind"] == "gauge_gap":
        if "gauge" not in p:
            raise ConfigError(f"{w}.gauge", "required for a gauge gap")
        task["gauge"] = _sub(f"{w}.gauge", gauge_from_dict, p["gauge"])
    return task


def exec_metric(t, seed):
    mu, nu, kind = t["mu"], t["nu"], t["kind"]
    if kind == "levy":
        return levy_distance(mu, nu).to_dict(), None
    if kind == "prohorov":
        return prohorov_distance(mu, nu).to_dict(), None
    if kind == "prohorov_finite":
        return prohorov_distance_finite(mu, nu).to_dict(), None
    if kind == "total_variation":
        return {"value": total_variation(mu, nu), "method": "closed_form", "error_bound": 0.0}, None
    if kind == "gauge_gap":
        return {"value": gauge_gap(mu, nu, t["gauge"])}, None
    return psi_metric(mu, nu, t["gauges"], t["K"]).to_dict(), None


def parse_eval(p):
    w = "payload"
    strict(p, {"functional"}, w, optional={"dist", "sample", "sample_csv", "family"})
    task = {"T": _sub(f"{w}.functional", functional_from_dict, p["functional"])}
    given = [k for k in ("dist", "sample", "sample_csv", "family") if k in p]
    if len(given) != 1:
        raise ConfigError(w, "give exactly one of dist, sample, sample_csv, family")
    if "dist" in p:
        task["dist"] = _sub(f"{w}.dist", dist_from_dict, p["dist"])
    elif "sample" in p:
        task["sample"] = np.asarray(_num_list(p, "sample", w))
    elif "sample_csv" in p:
        task["sample"] = _sub(f"{w}.sample_csv", read_csv_column, p["sample_csv"])
    else:
        f = p["family"]
        strict(f, {"name", "grid"}, f"{w}.family", optional={"fixed"})
        task["family"] = (_family(f["name"], f"{w}.family.name"), _num_list(f, "grid", f"{w}.family"),
                          _fixed(f, f"{w}.family.fixed"))
    return task


def exec_eval(t, seed):
    T = t["T"]
    if "dist" in t:
        return {"functional": T.to_dict(), "value": T.evaluate(t["dist"])}, None
    if "sample" in t:
        return {"functional": T.to_dict(), "value": plug_in(T, t["sample"]), "n": int(t["sample"].size)}, None
    name, grid, fx = t["family"]
    rows = []
    for theta in grid:
        v = T.evaluate(parametric_family(name, theta, fx))
        rows.append((theta, v, abs(v - theta)))
    res = {"functional": T.to_dict(), "family": name,
           "rows": [{"theta": a, "value": b, "abs_error": c} for a, b, c in rows],
           "max_abs_error": max(r[2] for r in rows)}
    return res, Table(("theta", "value", "abs_error"), tuple(rows))


def parse_risk(p):
    w = "payload"
    strict(p, {"spec"}, w, optional={"dist", "sequence", "ns", "scale", "gauge"})
    task = {"spec": _sub(f"{w}.spec", risk_from_dict, p["spec"])}
    if ("dist" in p) == ("sequence" in p):
        raise ConfigError(w, "give exactly one of dist, sequence")
    if "dist" in p:
        for k in ("ns", "scale", "gauge"):
            if k in p:
                raise ConfigError(f"{w}.{k}", "only valid together with sequence")
        task["dist"] = _sub(f"{w}.dist", dist_from_dict, p["dist"])
    else:
        task["sequence"] = _law_sequence(p["sequence"], f"{w}.sequence")[0]
        task["ns"] = _num_list(p, "ns", w, int)
        task["scale"] = _num(p, "scale", w, 1.0)
        task["gauge"] = _sub(f"{w}.gauge", gauge_from_dict, p["gauge"]) if "gauge" in p else None
    return task


def exec_risk(t, seed):
    spec = t["spec"]
    if "dist" in t:
        return {"spec": spec.to_dict(), "value": spec.evaluate(t["dist"])}, None
    from wsetlab.dist import integrate_gauge

    rows = []
    for n in t["ns"]:
        mu = t["sequence"](n)
        v = spec.evaluate(_scaled(mu, t["scale"]))
        gi = integrate_gauge(mu, t["gauge"]) if t["gauge"] is not None else math.nan
        rows.append((n, v, gi))
    res = {"spec": spec.to_dict(), "scale": t["scale"],
           "rows": [{"n": a, "value": b, "gauge_integral": c} for a, b, c in rows]}
    return res, Table(("n", "risk", "gauge_integral"), tuple(rows))


def parse_wset(p):
    w = "payload"
    mode = p.get("mode") if isinstance(p, dict) else None
    if mode == "family":
        strict(p, {"mode", "family", "gauges", "K"}, w, optional={"eps"})
        fam = p["family"]
        if not isinstance(fam, list) or not fam:
            raise ConfigError(f"{w}.family", "expected a non-empty list of distributions")
        return {"mode": mode, "family": [_sub(f"{w}.family[{i}]", dist_from_dict, d) for i, d in enumerate(fam)],
                "gauges": _sub(f"{w}.gauges", sequence_from_dict, p["gauges"]),
                "K": _num(p, "K", w, kind=int), "eps": _num(p, "eps", w, 0.01)}
    if mode == "sequence":
        strict(p, {"mode", "sequence", "gauges", "K", "n_max"}, w, optional={"tol", "ns"})
        seq, limit = _law_sequence(p["sequence"], f"{w}.sequence")
        return {"mode": mode, "sequence": seq, "limit": limit,
                "gauges": _sub(f"{w}.gauges", sequence_from_dict, p["gauges"]),
                "K": _num(p, "K", w, kind=int), "n_max": _num(p, "n_max", w, kind=int),
                "tol": _num(p, "tol", w, 0.02), "ns": _num_list(p, "ns", w, int) if "ns" in p else None}
    if mode == "parametric":
        strict(p, {"mode", "family", "gauges", "K", "probes"}, w,
               optional={"fixed", "grid", "n_max", "tol", "floor"})
        probes = p["probes"]
        if not isinstance(probes, list) or not probes:
            raise ConfigError(f"{w}.probes", "expected a non-empty list")
        return {"mode": mode, "family": _family(p["family"], f"{w}.family"), "fixed": _fixed(p, f"{w}.fixed"),
                "gauges": _sub(f"{w}.gauges", sequence_from_dict, p["gauges"]),
                "K": _num(p, "K", w, kind=int),
                "probes": [_probe(q, f"{w}.probes[{i}]") for i, q in enumerate(probes)],
                "grid": _num_list(p, "grid", w) if "grid" in p else [],
                "n_max": _num(p, "n_max", w, 100, int), "tol": _num(p, "tol", w, 0.02),
                "floor": _num(p, "floor", w, 1e-4)}
    raise ConfigError(f"{w}.mode", f"unknown mode {mode!r}; expected family, sequence or parametric")


def exec_wset(t, seed):
    if t["mode"] == "family":
        rep = uniform_integrating_check(t["family"], t["gauges"], t["K"], t["eps"])
        rows = tuple((r.k, r.threshold, r.sup_tail, r.witness) for r in rep.per_k)
        return rep.to_dict(), Table(("k", "threshold", "sup_tail", "witness"), rows)
    if t["mode"] == "sequence":
        rep = sequence_condition_e(t["sequence"], t["limit"], t["gauges"], t["K"], t["n_max"], t["tol"], t["ns"])
        return rep.to_dict(), Table(tuple(rep.header()), tuple(tuple(r) for r in rep.rows()))
    fam, fx = t["family"], t["fixed"]
    rep = parametric_wset_check(lambda th: parametric_family(fam, th, fx), t["gauges"], t["K"], t["probes"],
                                t["grid"], t["n_max"], t["tol"], t["floor"])
    rows = []
    for i, r in enumerate(rep.probes):
        rows.extend((i,) + tuple(row) for row in r.rows())
    header = ("probe",) + tuple(rep.probes[0].header())
    return rep.to_dict(), Table(header, tuple(rows))


def parse_sdwn(p):
    w = "payload"
    strict(p, {"sequence", "young", "n_max"}, w, optional={"tol", "K", "ns"})
    seq, limit = _law_sequence(p["sequence"], f"{w}.sequence")
    return {"sequence": seq, "limit": limit, "young": _sub(f"{w}.young", young_from_dict, p["young"]),
            "n_max": _num(p, "n_max", w, kind=int), "tol": _num(p, "tol", w, 0.02),
            "K": _num(p, "K", w, DEFAULT_K, int), "ns": _num_list(p, "ns", w, int) if "ns" in p else None}


def exec_sdwn(t, seed):
    rep = sdwn_convergence(t["sequence"], t["limit"], t["young"], t["n_max"], t["tol"], t["K"], t["ns"])
    return rep.to_dict(), Table(("n", "luxemburg_norm", "psi_metric"), tuple(tuple(r) for r in rep.rows()))


def parse_aggregate(p):
    w = "payload"
    strict(p, {"marginals", "couplings", "map", "n"}, w,
           optional={"gauges", "K", "eps", "tail_levels", "stream"})
    cs = p["couplings"]
    if not isinstance(cs, list) or not cs:
        raise ConfigError(f"{w}.couplings", "expected a non-empty list")
    task = {"marginals": _marginals(p, w),
            "couplings": [_sub(f"{w}.couplings[{i}]", coupling_from_dict, c) for i, c in enumerate(cs)],
            "map": _sub(f"{w}.map", aggregation_from_dict, p["map"]),
            "n": _num(p, "n", w, kind=int), "stream": _num(p, "stream", w, 0, int),
            "gauges": None, "K": 0, "eps": 0.01, "tail_levels": []}
    if "gauges" in p:
        task["gauges"] = _sub(f"{w}.gauges", sequence_from_dict, p["gauges"])
        task["K"] = _num(p, "K", w, kind=int)
        task["eps"] = _num(p, "eps", w, 0.01)
        task["tail_levels"] = _num_list(p, "tail_levels", w) if "tail_levels" in p else []
    return task


def exec_aggregate(t, seed):
    from wsetlab.frechet import aggregation_tail_bound

    A, margs = t["map"], t["marginals"]
    if A.vector_valued:
        raise WsetlabError("aggregate needs a scalar aggregation map")
    summaries, rows, worst = [], [], -math.inf
    for c in t["couplings"]:
        x = A(FrechetSpec(margs, c).sample(seed, t["stream"], t["n"]))
        summaries.append({"coupling": c.to_dict(), "mean": float(np.mean(x)),
                          "quantiles": {q: float(np.quantile(x, float(q))) for q in ("0.5", "0.9", "0.99")}})
        for k in range(1, t["K"] + 1):
            g = t["gauges"](k)
            gx = np.array([eval_gauge(g, float(v)) for v in x])
            for a in t["tail_levels"]:
                emp = float(np.mean(np.where(gx >= a, gx, 0.0)))
                bound = aggregation_tail_bound(margs, A, g, a)
                worst = max(worst, emp - bound)
                rows.append((c.name, k, a, emp, bound))
    res = {"map": A.to_dict(), "n": t["n"], "couplings": summaries}
    if t["gauges"] is not None:
        ui = aggregation_ui_bound(FrechetSpec(margs, t["couplings"][0]), A, t["gauges"], t["K"], t["eps"])
        res["ui_bound"] = ui.to_dict()
        res["max_tail_excess"] = worst if rows else None
    return res, Table(("coupling", "k", "a", "empirical_tail", "bound"), tuple(rows))


def parse_robustness(p):
    w = "payload"
    strict(p, {"functional", "path", "t_grid", "n_grid", "R"}, w, optional={"workers"})
    return {"T": _sub(f"{w}.functional", functional_from_dict, p["functional"]),
            "path": _path(p["path"], f"{w}.path"), "t_grid": _num_list(p, "t_grid", w),
            "n_grid": _num_list(p, "n_grid", w, int), "R": _num(p, "R", w, kind=int),
            "workers": _num(p, "workers", w, 0, int) or None}


def exec_robustness(t, seed):
    prof = robustness_profile(t["T"], t["path"], t["t_grid"], t["n_grid"], t["R"], seed, t["workers"])
    res = prof.to_dict()
    by_n = {}
    for r in prof.rows:
        by_n.setdefault(r.n, []).append((r.t, r.pi_hat))
    modulus = 0.0
    for pts in by_n.values():
        pts.sort()
        for (_, a), (_, b) in zip(pts, pts[1:]):
            modulus = max(modulus, abs(b - a))
    res["grid_modulus"] = modulus
    base = t["path"].at(0.0)
    if isinstance(base, Distribution):
        res["levy_to_base"] = [{"t": s, "levy": levy_distance(base, t["path"].at(s)).value}
                               for s in sorted(set(t["t_grid"]))]
    return res, Table(prof.HEADER, tuple(tuple(r.as_list()) for r in prof.rows))


PARSERS = {"metric": parse_metric, "wset-check": parse_wset, "eval": parse_eval, "risk": parse_risk,
           "sdwn": parse_sdwn, "aggregate": parse_aggregate, "robustness": parse_robustness}
EXECUTORS = {"metric": exec_metric, "wset-check": exec_wset, "eval": exec_eval, "risk": exec_risk,
             "sdwn": exec_sdwn, "aggregate": exec_aggregate, "robustness": exec_robustness}


# ---------------------------------------------------------------- configs and assertions


@dataclass(frozen=True)
class Assertion:
    path: str
    op: str
    bound: object  # a number; "==" also accepts a string or boolean
    tol: float = 0.0

    def check(self, value) -> bool:
        if not isinstance(self.bound, (int, float)) or isinstance(self.bound, bool):
            return type(value) is type(self.bound) and value == self.bound
        if value is None or not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        v = float(value)
        if math.isnan(v):
            return False
        if self.op == "<=":
            return v <= self.bound
        if self.op == "<":
            return v < self.bound
        if self.op == ">=":
            return v >= self.bound
        if self.op == ">":
            return v > self.bound
        return abs(v - self.bound) <= self.tol


@dataclass(frozen=True)
class ExperimentConfig:
    schema_version: int
    seed: int
    command: str
    payload: dict
    assertions: tuple
    outputs: dict


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path) -> tuple[ExperimentConfig, str]:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} col {e.colno}", e.msg) from None
    return config_from_dict(raw), text


def config_from_dict(raw) -> ExperimentConfig:
    strict(raw, {"schema_version", "seed", "command", "payload"}, "config", optional={"assertions", "outputs"})
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("config.schema_version", f"unsupported version {raw['schema_version']!r}")
    seed = _num(raw, "seed", "config", kind=int)
    if seed < 0:
        raise ConfigError("config.seed", "must be nonnegative")
    if raw["command"] not in COMMANDS:
        raise ConfigError("config.command", f"unknown command {raw['command']!r}")
    asserts = []
    for i, a in enumerate(raw.get("assertions", [])):
        where = f"config.assertions[{i}]"
        strict(a, {"path", "op", "bound"}, where, optional={"tol"})
        if a["op"] not in COMPARATORS:
            raise ConfigError(f"{where}.op", f"unknown comparator {a['op']!r}")
        if not isinstance(a["path"], str):
            raise ConfigError(f"{where}.path", "expected a string")
        b = a["bound"]
        if isinstance(b, (str, bool)):
            if a["op"] != "==":
                raise ConfigError(f"{where}.bound", "non-numeric bounds need the == comparator")
        else:
            b = _num(a, "bound", where)
        asserts.append(Assertion(a["path"], a["op"], b, _num(a, "tol", where, 0.0)))
    outputs = raw.get("outputs", {})
    strict(outputs, set(), "config.outputs", optional={"json", "csv"})
    for k, v in outputs.items():
        if not isinstance(v, str):
            raise ConfigError(f"config.outputs.{k}", "expected a path string")
    return ExperimentConfig(SCHEMA_VERSION, seed, raw["command"], raw["payload"], tuple(asserts), dict(outputs))


_TOKEN = re.compile(r"([^.\[\]]+)|\[(\*|-?\d+)\]")


def resolve(obj, path: str) -> list:
    """Values at a dotted path; ``[*]`` fans out over a list, negative indices count from the end."""
    cur = [obj]
    for name, idx in _TOKEN.findall(path):
        nxt = []
        for c in cur:
            if name:
                if isinstance(c, dict) and name in c:
                    nxt.append(c[name])
            elif isinstance(c, list):
                if idx == "*":
                    nxt.extend(c)
                elif -len(c) <= int(idx) < len(c):
                    nxt.append(c[int(idx)])
        cur = nxt
    return cur


# ---------------------------------------------------------------- output


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return str(v)


def dump_csv(table: Table) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(table.header)
    for row in table.rows:
        wr.writerow([_cell(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- orchestration


def run(cfg: ExperimentConfig, seed: int | None = None, out_dir=None) -> tuple[int, dict]:
    """Execute one config; returns (exit status, report). Schema errors propagate as ConfigError."""
    seed = cfg.seed if seed is None else seed
    try:
        task = PARSERS[cfg.command](cfg.payload)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError("payload", str(e)) from None
    result, table = EXECUTORS[cfg.command](task, seed)
    checks, ok = [], True
    for a in cfg.assertions:
        vals = resolve(_clean(result), a.path)
        passed = bool(vals) and all(a.check(v) for v in vals)
        ok &= passed
        checks.append({"path": a.path, "op": a.op, "bound": a.bound, "tol": a.tol,
                       "observed": vals[0] if len(vals) == 1 else vals, "passed": passed})
        log.debug("assert %s %s %s: %s", a.path, a.op, a.bound, "pass" if passed else "FAIL")
    report = {"schema_version": cfg.schema_version, "command": cfg.command, "seed": seed,
              "result": result, "assertions": checks, "passed": ok}
    root = Path(out_dir) if out_dir is not None else Path.cwd()
    if "json" in cfg.outputs:
        _write(root / cfg.outputs["json"], dump_json(report))
    if "csv" in cfg.outputs and table is not None:
        _write(root / cfg.outputs["csv"], dump_csv(table))
    return (EXIT_OK if ok else EXIT_ASSERT), report


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def default_configs_dir() -> Path:
    here = Path(__file__).resolve().parents[2] / "configs"
    return here if here.is_dir() else Path.cwd() / "configs"


def load_manifest(configs_dir) -> dict:
    return json.loads((Path(configs_dir) / "MANIFEST.json").read_text())


def reproduce_all(configs_dir=None, out_dir="reproduce-out", seed=None) -> int:
    configs_dir = Path(configs_dir) if configs_dir is not None else default_configs_dir()
    manifest = load_manifest(configs_dir)
    status = EXIT_OK
    for topic in sorted(manifest):
        name = manifest[topic]
        code = _guarded(lambda: run(load_config(configs_dir / name)[0], seed, out_dir)[0], configs_dir / name)
        log.info("%s (%s): %s", topic, name, "pass" if code == EXIT_OK else f"exit {code}")
        status = max(status, code)
    return status


def _guarded(fn, path=None):
    try:
        return fn()
    except ConfigError as e:
        line = None
        if path is not None and Path(path).exists():
            line = _line_of(Path(path).read_text(), e.where.split(".")[-1].split("[")[0])
        where = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        log.error("schema error: %s%s", where, e)
        return EXIT_SCHEMA
    except WsetlabError as e:
        log.error("%s: %s", type(e).__name__, e)
        return EXIT_DOMAIN


def _cmd_single(args) -> int:
    def go():
        cfg, _ = load_config(args.config)
        if args.command != "run" and cfg.command != args.command:
            raise ConfigError("config.command", f"config is for {cfg.command!r}, not {args.command!r}")
        code, report = run(cfg, args.seed, args.out_dir)
        if "json" not in cfg.outputs:
            sys.stdout.write(dump_json(report))
        return code

    return _guarded(go, args.config)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wsetlab", description="Robustness experiments on w-sets.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS + ("run",):
        sp = sub.add_parser(name, help=f"run a {name} config" if name != "run" else "run any config")
        sp.add_argument("config", help="path to a JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out-dir", default=None, help="root for relative output paths (default: cwd)")
    rp = sub.add_parser("reproduce-all", help="run every config listed in the manifest")
    rp.add_argument("--configs", default=None, help="directory holding MANIFEST.json")
    rp.add_argument("--out-dir", default="reproduce-out")
    rp.add_argument("--seed", type=int, default=None, help="override every config seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "reproduce-all":
        if args.verbose is False:
            log.setLevel(logging.INFO)
        return reproduce_all(args.configs, args.out_dir, args.seed)
    return _cmd_single(args)


if __name__ == "__main__":
    sys.exit(main())
