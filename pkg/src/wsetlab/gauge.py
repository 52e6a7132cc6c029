"""Gauge functions, gauge sequences, and the rational parameter enumeration.

A gauge is a continuous map psi: R -> [0, inf). Besides pointwise evaluation
each gauge advertises its tail growth on both sides (used by the divergence
rules in :mod:`wsetlab.dist`) and, where cheap, its superlevel sets
{psi >= a} (used by the tail integrals).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import brentq

from wsetlab.errors import EmptyDomain, GaugeOverflow
from wsetlab.models import GUMBEL, EXPONENTIAL, ParametricModel, model_from_name
from wsetlab.young import YoungFunction, young_from_dict

SATURATION = np.finfo(float).max

# Growth descriptors: ("bounded",), ("poly", p), ("exp", lam, alpha) meaning
# psi(x) grows like |x|**p or exp(lam * |x|**alpha) on that side.


class GaugeFunction:
    convex_even: bool = False

    def __call__(self, x):
        raise NotImplementedError

    def log(self, x):
        """log psi(x), finite where psi overflows; -inf where psi = 0."""
        with np.errstate(divide="ignore"):
            return np.log(self(x))

    def growth(self):
        """(left, right) growth descriptors."""
        raise NotImplementedError

    def level_set(self, a: float):
        """Closed intervals covering {psi >= a}, or None if not available."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


def _symmetric_level_set(r: float):
    if r <= 0:
        return [(-math.inf, math.inf)]
    if math.isinf(r):
        return []
    return [(-math.inf, -r), (r, math.inf)]


@dataclass(frozen=True)
class Power(GaugeFunction):
    """|x|**p."""

    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"Power gauge needs p > 0, got {self.p}")

    @property
    def convex_even(self):
        return self.p >= 1

    def __call__(self, x):
        with np.errstate(over="ignore"):
            return np.abs(x) ** self.p

    def log(self, x):
        with np.errstate(divide="ignore"):
            return self.p * np.log(np.abs(x))

    def growth(self):
        return ("poly", self.p), ("poly", self.p)

    def level_set(self, a):
        return _symmetric_level_set(0.0 if a <= 0 else a ** (1.0 / self.p))

    def to_dict(self):
        return {"form": "power", "p": self.p}


@dataclass(frozen=True)
class ExpPower(GaugeFunction):
    """exp(lam * |x|**alpha), alpha in (0, 2]."""

    lam: float
    alpha: float

    def __post_init__(self):
        if not self.lam > 0 or not 0 < self.alpha <= 2:
            raise ValueError(f"ExpPower needs lam > 0 and alpha in (0, 2], got {self}")

    @property
    def convex_even(self):
        # exp(lam |x|^alpha) is convex iff alpha >= 1.
        return self.alpha >= 1

    def __call__(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.lam * np.abs(x) ** self.alpha)

    def log(self, x):
        return self.lam * np.abs(x) ** self.alpha

    def growth(self):
        g = ("exp", self.lam, self.alpha)
        return g, g

    def level_set(self, a):
        if a <= 1:
            return _symmetric_level_set(0.0)
        return _symmetric_level_set((math.log(a) / self.lam) ** (1.0 / self.alpha))

    def to_dict(self):
        return {"form": "exp_power", "lam": self.lam, "alpha": self.alpha}


@dataclass(frozen=True)
class Constant1(GaugeFunction):
    convex_even = True

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def growth(self):
        return ("bounded",), ("bounded",)

    def level_set(self, a):
        return _symmetric_level_set(0.0 if a <= 1 else math.inf)

    def to_dict(self):
        return {"form": "constant"}


@dataclass(frozen=True)
class Scaled(GaugeFunction):
    """x -> Psi(k |x|) for a Young function Psi."""

    young: YoungFunction
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("scale k must be positive")

    convex_even = True

    def __call__(self, x):
        return self.young(self.k * np.abs(x))

    def log(self, x):
        return self.young.log(self.k * np.abs(np.asarray(x, dtype=float)))

    def growth(self):
        g = self.young.growth()
        if g is None:
            return None
        if g[0] == "exp":
            g = ("exp", g[1] * self.k ** g[2], g[2])
        return g, g

    def level_set(self, a):
        if a <= 0:
            return _symmetric_level_set(0.0)
        return _symmetric_level_set(self.young.inverse(a) / self.k)

    def to_dict(self):
        return {"form": "scaled", "young": self.young.to_dict(), "k": self.k}


@dataclass(frozen=True)
class AbsLogDensity(GaugeFunction):
    """|log f_theta(x)| for a parametric model."""

    model: ParametricModel
    theta: float

    def __call__(self, x):
        return np.abs(self.model.logpdf(self.theta, x))

    def log(self, x):
        out = super().log(x)
        if self.model is GUMBEL:
            # far left exp(-a x) dominates and overflows; factor it out
            x = np.asarray(x, dtype=float)
            a = self.theta
            far = -a * x > 30.0
            if np.any(far):
                xf = np.where(far, x, 0.0)
                alt = -a * xf + np.log1p((a * xf - math.log(a)) * np.exp(a * xf))
                out = np.where(far, alt, out)
        return out

    def growth(self):
        if self.model is EXPONENTIAL:
            return ("poly", 1.0), ("poly", 1.0)
        if self.model is GUMBEL:
            return ("exp", self.theta, 1.0), ("poly", 1.0)
        return None

    def level_set(self, a):
        if a <= 0:
            return [(-math.inf, math.inf)]
        t = self.theta
        if self.model is EXPONENTIAL:
            # log f is the decreasing line -log t - x/t
            lo = t * (-math.log(t) - a)
            hi = t * (a - math.log(t))
            return [(-math.inf, lo), (hi, math.inf)]
        if self.model is GUMBEL:
            return _concave_abs_level_set(lambda x: float(self.model.logpdf(t, x)), 0.0, a)
        return None

    def to_dict(self):
        return {"form": "abs_log_density", "model": self.model.name, "theta": self.theta}


@dataclass(frozen=True)
class Dilated(GaugeFunction):
    """x -> base(s * x) for s > 0."""

    base: GaugeFunction
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("dilation factor must be positive")

    @property
    def convex_even(self):
        return self.base.convex_even

    def __call__(self, x):
        return self.base(self.s * np.asarray(x, dtype=float))

    def log(self, x):
        return self.base.log(self.s * np.asarray(x, dtype=float))

    def growth(self):
        g = self.base.growth()
        if g is None:
            return None
        return tuple(("exp", t[1] * self.s ** t[2], t[2]) if t[0] == "exp" else t for t in g)

    def level_set(self, a):
        sets = self.base.level_set(a)
        if sets is None:
            return None
        return [(l / self.s, r / self.s) for l, r in sets]

    def to_dict(self):
        return {"form": "dilated", "base": self.base.to_dict(), "s": self.s}


def dilate(g: GaugeFunction, s: float) -> GaugeFunction:
    """x -> g(s x), kept in closed form where possible."""
    if s == 1:
        return g
    if isinstance(g, Scaled):
        return Scaled(g.young, g.k * s)
    if isinstance(g, Dilated):
        return Dilated(g.base, g.s * s)
    return Dilated(g, s)


def _root_away(h, x0, step, level):
    """Root of h(x) = level moving from x0 in direction sign(step)."""
    x1 = x0 + step
    while h(x1) > level:
        step *= 2.0
        x1 = x0 + step
    return brentq(lambda x: h(x) - level, min(x0, x1), max(x0, x1), xtol=1e-13)


def _concave_abs_level_set(h: Callable, mode: float, a: float):
    """{|h| >= a} for concave h with maximiser ``mode``."""
    top = h(mode)
    out = []
    if top < -a:
        return [(-math.inf, math.inf)]
    left = _root_away(h, mode, -1.0, -a)
    right = _root_away(h, mode, 1.0, -a)
    out.append((-math.inf, left))
    if top >= a:
        out.append((_root_away(h, mode, -1.0, a), _root_away(h, mode, 1.0, a)))
    out.append((right, math.inf))
    return out


def eval_gauge(g: GaugeFunction, x: float) -> float:
    """psi(x) for finite x; raises GaugeOverflow instead of returning inf."""
    if not math.isfinite(x):
        raise ValueError("gauge evaluation needs a finite argument")
    v = float(g(x))
    if not math.isfinite(v):
        raise GaugeOverflow(f"{g} overflows at x={x}", saturated=SATURATION)
    return v


# ---------------------------------------------------------------- rationals


def stern_brocot() -> Iterator[Fraction]:
    """Positive rationals level by level of the Stern-Brocot tree: 1, 1/2, 2, 1/3, ..."""
    seq = [(0, 1), (1, 0)]
    while True:
        nxt = [seq[0]]
        for (a, b), (c, d) in zip(seq, seq[1:]):
            m = (a + c, b + d)
            yield Fraction(*m)
            nxt.extend((m, (c, d)))
        seq = nxt


def _map_positive(lo: float, hi: float):
    if lo >= hi:
        raise EmptyDomain(f"empty interval ({lo}, {hi})")
    if lo == 0 and math.isinf(hi):
        return lambda q: float(q)
    if math.isinf(lo) and math.isinf(hi):
        return lambda q: float(q - 1 / q)
    if math.isinf(hi):
        return lambda q: lo + float(q)
    if math.isinf(lo):
        return lambda q: hi - float(q)
    return lambda q: lo + (hi - lo) * float(q / (1 + q))


def rationals_enumeration(domain) -> Iterator:
    """Deterministic injective dense enumeration of an open interval or box.

    ``domain`` is ``(lo, hi)`` or a sequence of such pairs. For a box the
    coordinates are paired diagonally, yielding tuples.
    """
    if len(domain) == 2 and not isinstance(domain[0], (tuple, list)):
        f = _map_positive(float(domain[0]), float(domain[1]))
        return (f(q) for q in stern_brocot())
    maps = [_map_positive(float(lo), float(hi)) for lo, hi in domain]
    if not maps:
        raise EmptyDomain("box with no coordinates")
    return _diagonal(maps)


def _diagonal(maps):
    d = len(maps)
    cache = [[] for _ in range(d)]
    gens = [stern_brocot() for _ in range(d)]

    def at(i, j):
        while len(cache[i]) <= j:
            cache[i].append(maps[i](next(gens[i])))
        return cache[i][j]

    for total in itertools.count():
        for idx in _compositions(total, d):
            yield tuple(at(i, j) for i, j in enumerate(idx))


def _compositions(total, d):
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


# ---------------------------------------------------------------- sequences


class GaugeSequence:
    """Lazily generated gauges psi_1, psi_2, ... (1-based)."""

    kind: str = ""

    def __call__(self, k: int) -> GaugeFunction:
        raise NotImplementedError

    def take(self, K: int) -> list:
        return [self(k) for k in range(1, K + 1)]

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantSequence(GaugeSequence):
    gauge: GaugeFunction
    kind = "constant"

    def __call__(self, k):
        return self.gauge

    def to_dict(self):
        return {"kind": "constant", "gauge": self.gauge.to_dict()}


@dataclass(frozen=True)
class PowerLadder(GaugeSequence):
    """|x|**p_k with p_k = limit*k/(k+1) increasing to ``limit``, or p_k = k."""

    limit: float | None = None
    kind = "power_ladder"

    def exponent(self, k):
        return float(k) if self.limit is None else self.limit * k / (k + 1)

    def __call__(self, k):
        return Power(self.exponent(k))

    def to_dict(self):
        return {"kind": "power_ladder"} | ({} if self.limit is None else {"limit": self.limit})


@dataclass(frozen=True)
class ExpLadder(GaugeSequence):
    """exp(lam_k |x|**alpha_k) with lam_k = lam_scale*k and alpha_k = alpha_limit*k/(k+1)."""

    lam_scale: float = 1.0
    alpha_limit: float = 1.0
    kind = "exp_ladder"

    def __call__(self, k):
        return ExpPower(self.lam_scale * k, self.alpha_limit * k / (k + 1))

    def to_dict(self):
        return {"kind": "exp_ladder", "lam_scale": self.lam_scale, "alpha_limit": self.alpha_limit}


@dataclass(frozen=True, eq=False)
class LogDensityEnumeration(GaugeSequence):
    """|log f_{theta_k}| with theta_k running through the rational enumeration."""

    model: ParametricModel
    kind = "log_density"

    def parameter(self, k):
        return _enumerated(self.model.domain, k)

    def __call__(self, k):
        return AbsLogDensity(self.model, self.parameter(k))

    def to_dict(self):
        return {"kind": "log_density", "model": self.model.name}


_ENUM_CACHE: dict = {}


def _enumerated(domain, k):
    key = tuple(domain)
    seq = _ENUM_CACHE.get(key)
    if seq is None or len(seq) < k:
        seq = list(itertools.islice(rationals_enumeration(domain), max(k, 64)))
        _ENUM_CACHE[key] = seq
    return seq[k - 1]


@dataclass(frozen=True)
class YoungScaled(GaugeSequence):
    """psi_k = Psi(k |x|)."""

    young: YoungFunction
    kind = "young_scaled"

    def __call__(self, k):
        return Scaled(self.young, float(k))

    def to_dict(self):
        return {"kind": "young_scaled", "young": self.young.to_dict()}


# ---------------------------------------------------------------- literals


def gauge_from_dict(d: dict) -> GaugeFunction:
    from wsetlab._schema import ConfigError, strict

    form = d.get("form") if isinstance(d, dict) else None
    if form == "power":
        strict(d, {"form", "p"}, "gauge")
        return Power(float(d["p"]))
    if form == "exp_power":
        strict(d, {"form", "lam", "alpha"}, "gauge")
        return ExpPower(float(d["lam"]), float(d["alpha"]))
    if form == "abs_log_density":
        strict(d, {"form", "model", "theta"}, "gauge")
        return AbsLogDensity(model_from_name(d["model"]), float(d["theta"]))
    if form == "constant":
        strict(d, {"form"}, "gauge")
        return Constant1()
    if form == "scaled":
        strict(d, {"form", "young", "k"}, "gauge")
        return Scaled(young_from_dict(d["young"]), float(d["k"]))
    raise ConfigError("gauge.form", f"unknown gauge form {form!r}")


def sequence_from_dict(d: dict) -> GaugeSequence:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "constant":
        strict(d, {"kind", "gauge"}, "gauges")
        return ConstantSequence(gauge_from_dict(d["gauge"]))
    if kind == "power_ladder":
        strict(d, {"kind"}, "gauges", optional={"limit"})
        return PowerLadder(None if d.get("limit") is None else float(d["limit"]))
    if kind == "exp_ladder":
        strict(d, {"kind"}, "gauges", optional={"lam_scale", "alpha_limit"})
        return ExpLadder(float(d.get("lam_scale", 1.0)), float(d.get("alpha_limit", 1.0)))
    if kind == "log_density":
        strict(d, {"kind", "model"}, "gauges")
        return LogDensityEnumeration(model_from_name(d["model"]))
    if kind == "young_scaled":
        strict(d, {"kind", "young"}, "gauges")
        return YoungScaled(young_from_dict(d["young"]))
    raise ConfigError("gauges.kind", f"unknown gauge sequence kind {kind!r}")
