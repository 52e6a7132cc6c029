"""Orlicz-heart membership, Luxemburg norms and law-invariant risk functionals.

Random variables are never built: a law acts through its quantile function,
X = F^{<-}(U) with U uniform on (0, 1). Sign convention: positive values are
gains, so the risk of a constant c is -c.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from wsetlab.dist import (Dirac, Distribution, Empirical, Exponential, diverges, expect, integrate_gauge,
                          mixture)
from wsetlab.errors import BracketFailure, OutsideDomain, QuadratureFailure
from wsetlab.gauge import Scaled, YoungScaled
from wsetlab.metrics import DEFAULT_K, psi_metric
from wsetlab.young import (CustomYoung, Delta2, ExponentialYoung, Linear, PowerOverP, ScaledYoung,
                           YoungFunction, young_from_dict)

__all__ = [
    "Delta2", "YoungFunction", "PowerOverP", "Linear", "ExponentialYoung", "ScaledYoung", "CustomYoung",
    "young_from_dict", "OrliczReport", "orlicz_heart_member", "luxemburg_norm", "quantile_gap_norm",
    "AVaR", "Distortion", "Shortfall", "OneSidedMoment", "eval_risk", "risk_from_dict",
    "SdwnReport", "sdwn_convergence", "shortfall_blowup_sequence",
]

DEFAULT_PROBES = (1.0, 2.0, 8.0, 64.0)
NORM_RTOL = 1e-12


# ---------------------------------------------------------------- quantile integrals


def _quad(fn, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(fn, a, b, epsabs=1e-12, epsrel=1e-10, limit=400)


def _u_integral(h: Callable[[float, float], float], lo: float = 0.0, hi: float = 1.0, breaks=()) -> float:
    """int_lo^hi h(u, 1 - u) du for h possibly singular at 0 or 1.

    Panels touching 0 use u = exp(-t), panels touching 1 use 1 - u = exp(-t);
    both turn logarithmic quantile singularities into exponentially damped
    integrands on a half line. ``h`` receives 1 - u separately so upper
    quantiles can be evaluated without cancellation.
    """
    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)} | ({0.5} if lo < 0.5 < hi else set()))
    total, err = 0.0, 0.0
    for a, b in zip(pts, pts[1:]):
        if a == 0.0:
            v, e = _quad(lambda t: _damped(h, math.exp(-t), -math.expm1(-t)), -math.log(b), math.inf)
        elif b == 1.0:
            v, e = _quad(lambda t: _damped(h, -math.expm1(-t), math.exp(-t), upper=True), -math.log1p(-a), math.inf)
        else:
            v, e = _quad(lambda u: h(u, 1.0 - u), a, b)
        total += v
        err += e
    if not math.isfinite(total) or err > 1e-7 * max(1.0, abs(total)):
        raise QuadratureFailure("quantile integral did not converge", value=total, error=err)
    return total


def _damped(h, u, s, upper=False):
    w = s if upper else u
    if w <= 0.0 or u >= 1.0 and not upper:
        return 0.0
    return h(u, s) * w


def _cum_levels(d: Distribution):
    """Quantile-function jump levels of the atomic part."""
    if isinstance(d, Empirical):
        return d.cum[:-1].tolist()
    pts, _ = d.atoms()
    return [float(d.cdf(x)) for x in pts] + [float(d.cdf(np.nextafter(x, -np.inf))) for x in pts]


def _q(d, u, s=None):
    """F^{<-}(u); pass s = 1 - u to evaluate upper quantiles without cancellation."""
    if s is not None and u > 0.5:
        return float(d.quantile_upper(np.array([s]))[0])
    return float(d.quantile(np.array([u]))[0])


# ---------------------------------------------------------------- Orlicz heart


@dataclass(frozen=True)
class OrliczReport:
    member: bool
    per_probe: tuple  # (c, int Psi(c|x|) dmu) with inf for divergence
    note: str = "evidence at the probed scales only"

    def to_dict(self):
        return {"member": self.member, "per_probe": [list(p) for p in self.per_probe], "note": self.note}


def orlicz_heart_member(mu: Distribution, young: YoungFunction, probes=DEFAULT_PROBES) -> OrliczReport:
    rows = []
    for c in probes:
        g = Scaled(young, float(c))
        try:
            v = integrate_gauge(mu, g)
        except QuadratureFailure as e:
            rows.append((float(c), math.nan, f"quadrature failure: {e}"))
            continue
        if math.isfinite(v):
            note = "finite"
        elif diverges(mu, g) is False:
            note = "finite, exceeds the float range"
        else:
            note = "diverges"
        rows.append((float(c), v, note))
    member = all(r[2].startswith("finite") for r in rows)
    return OrliczReport(member, tuple(rows))


# ---------------------------------------------------------------- Luxemburg norm


def _luxemburg(modular: Callable[[float], float], scale_hint: float = 1.0) -> float:
    """inf{lam > 0 : modular(lam) <= 1} for a nonincreasing modular."""
    hi = max(scale_hint, 1e-300)
    for _ in range(2100):
        if modular(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise OutsideDomain("no finite scale brings the modular below 1")
    lo = hi / 2.0
    for _ in range(2100):
        if modular(lo) > 1.0:
            break
        hi = lo
        lo /= 2.0
        if lo == 0.0:
            return 0.0
    while hi - lo > NORM_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def luxemburg_norm(mu: Distribution, young: YoungFunction) -> float:
    """inf{lam > 0 : E Psi(|X| / lam) <= 1} for X with law mu."""
    if mu.is_atomic:
        pts, w = mu.atoms()
        a = np.abs(pts)
        if not np.any(a > 0):
            return 0.0
        if isinstance(young, Linear):
            return float(np.dot(w, a))
        return _luxemburg(lambda lam: float(np.dot(w, young(a / lam))), float(np.dot(w, a)) or 1.0)
    if isinstance(young, Linear):
        return integrate_gauge(mu, Scaled(young, 1.0))
    return _luxemburg(lambda lam: integrate_gauge(mu, Scaled(young, 1.0 / lam)), 1.0)


def quantile_gap_norm(mu: Distribution, nu: Distribution, young: YoungFunction) -> float:
    """|| F_mu^{<-}(U) - F_nu^{<-}(U) ||_Psi with U uniform on (0, 1)."""
    if mu.is_atomic and nu.is_atomic and min(mu.atoms()[0].size, nu.atoms()[0].size) == 1:
        # against a constant the coupling is irrelevant; keep the original weights
        (pts, w), c = (mu.atoms(), nu.atoms()[0][0]) if nu.atoms()[0].size == 1 else (nu.atoms(), mu.atoms()[0][0])
        return luxemburg_norm(Empirical(np.abs(pts - c), w), young)
    if isinstance(mu, (Empirical, Dirac)) and isinstance(nu, (Empirical, Dirac)):
        a, b = _as_empirical(mu), _as_empirical(nu)
        levels = np.union1d(a.cum, b.cum)
        levels[-1] = 1.0
        widths = np.diff(np.concatenate([[0.0], levels]))
        mids = levels - widths / 2
        gap = np.abs(a.quantile(mids) - b.quantile(mids))
        return luxemburg_norm(Empirical(gap, widths / widths.sum()), young)
    breaks = _cum_levels(mu) + _cum_levels(nu)

    def gap(u, s):
        return abs(_q(mu, u, s) - _q(nu, u, s))

    if isinstance(young, Linear):
        return _u_integral(gap, breaks=breaks)
    return _luxemburg(lambda lam: _u_integral(lambda u, s: float(young(gap(u, s) / lam)), breaks=breaks), 1.0)


def _as_empirical(d) -> Empirical:
    if isinstance(d, Empirical):
        return d
    pts, w = d.atoms()
    return Empirical(pts, w)


# ---------------------------------------------------------------- risk functionals


class RiskSpec:
    """Law-invariant risk functional acting on distributions."""

    kind = ""

    def evaluate(self, mu: Distribution) -> float:
        raise NotImplementedError

    def batch(self, samples: np.ndarray) -> np.ndarray:
        """Plug-in values for each row of an (R, n) sample matrix."""
        return np.array([self.evaluate(Empirical(row)) for row in samples])

    def young(self) -> YoungFunction:
        """Young function of the natural Orlicz heart."""
        return Linear()


def _require_mean(mu):
    if not math.isfinite(integrate_gauge(mu, Scaled(Linear(), 1.0))):
        raise OutsideDomain(f"{mu} has no finite first moment")


@dataclass(frozen=True)
class AVaR(RiskSpec):
    """-(1/alpha) int_0^alpha F^{<-}(u) du."""

    alpha: float
    kind = "avar"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("AVaR level must lie in (0, 1)")

    def evaluate(self, mu):
        a = self.alpha
        if mu.is_atomic:
            pts, w = mu.atoms()
            take = np.minimum(w, np.maximum(a - (np.cumsum(w) - w), 0.0))
            return -float(np.dot(take, pts)) / a
        _require_mean(mu)
        if isinstance(mu, Exponential):
            return -mu.theta * ((1 - a) * math.log1p(-a) + a) / a
        breaks = [b for b in _cum_levels(mu) if b < a]
        return -_u_integral(lambda u, s: _q(mu, u, s), 0.0, a, breaks) / a

    def batch(self, samples):
        x = np.sort(np.asarray(samples, dtype=float), axis=1)
        n = x.shape[1]
        full = int(math.floor(self.alpha * n + 1e-12))
        part = self.alpha * n - full
        s = x[:, :full].sum(axis=1)
        if part > 1e-12 and full < n:
            s = s + part * x[:, full]
        return -s / (self.alpha * n)

    def to_dict(self):
        return {"kind": "avar", "alpha": self.alpha}


@dataclass(frozen=True)
class Distortion(RiskSpec):
    """int_{-inf}^0 g(F(x)) dx - int_0^inf (1 - g(F(x))) dx for concave nondecreasing g.

    ``g_kind`` is 'avar' (g(u) = min(u/level, 1)) or 'power' (g(u) = u**level, level in (0, 1]).
    """

    g_kind: str
    level: float
    kind = "distortion"

    def __post_init__(self):
        if self.g_kind not in ("avar", "power"):
            raise ValueError(f"unknown distortion {self.g_kind!r}")
        if not 0 < self.level <= 1 or (self.g_kind == "avar" and self.level == 1):
            raise ValueError("distortion level out of range")

    def g(self, u):
        u = np.asarray(u, dtype=float)
        if self.g_kind == "avar":
            return np.minimum(u / self.level, 1.0)
        return u ** self.level

    def evaluate(self, mu):
        if mu.is_atomic:
            pts, w = mu.atoms()
            F = np.cumsum(w)
            F[-1] = 1.0
            gF = self.g(F)
            # F is constant on [pts[i], pts[i+1]); split segments at 0
            total = 0.0
            for i in range(pts.size):
                left = pts[i]
                right = pts[i + 1] if i + 1 < pts.size else math.inf
                neg = max(0.0, min(right, 0.0) - left) if left < 0 else 0.0
                pos = max(0.0, right - max(left, 0.0)) if right > 0 else 0.0
                total += gF[i] * neg
                if pos and gF[i] < 1.0:
                    total -= (1.0 - gF[i]) * pos
            if pts[0] > 0:
                total -= pts[0]  # F = 0 on [0, pts[0])
            return float(total)
        _require_mean(mu)
        lo, hi = mu.support
        neg = pos = 0.0
        if lo < 0:
            neg, _ = _quad(lambda x: float(self.g(mu.cdf(x))), lo, min(hi, 0.0))
        if hi > 0:
            pos, _ = _quad(lambda x: 1.0 - float(self.g(mu.cdf(x))), max(lo, 0.0), hi)
            pos += max(lo, 0.0)
        return neg - pos

    def to_dict(self):
        return {"kind": "distortion", "g": self.g_kind, "level": self.level}


@dataclass(frozen=True)
class Shortfall(RiskSpec):
    """inf{m : E Psi((-X - m)^+) <= x0}."""

    loss: YoungFunction
    x0: float
    kind = "shortfall"

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")

    def young(self):
        return self.loss

    def _excess(self, mu, m):
        if mu.is_atomic:
            pts, w = mu.atoms()
            return float(np.dot(w, self.loss(np.maximum(-pts - m, 0.0))))
        lo, hi = mu.support
        if -m <= lo:
            return 0.0
        return expect(mu, lambda x: float(self.loss(max(-x - m, 0.0))))

    def evaluate(self, mu):
        if mu.is_atomic:
            pts, _ = mu.atoms()
            top, bottom = float(pts[-1]), float(pts[0])
        else:
            top, bottom = _q(mu, 1 - 1e-9), _q(mu, 1e-9)
        lo = -top - self.x0 - 1.0
        hi = -bottom
        step = 1.0 + abs(lo)
        for _ in range(200):
            if self._excess(mu, lo) > self.x0:
                break
            lo -= step
            step *= 2
        else:
            raise BracketFailure("could not find m with excess loss above x0")
        step = 1.0 + abs(hi)
        for _ in range(200):
            if self._excess(mu, hi) <= self.x0:
                break
            hi += step
            step *= 2
        else:
            raise BracketFailure("could not find m with excess loss below x0")
        f = lambda m: self._excess(mu, m) - self.x0  # noqa: E731
        if f(hi) == 0.0:
            # the excess is flat at x0 only on a single point unless the loss is locally constant
            while hi - lo > 1e-13 * max(1.0, abs(hi)):
                mid = 0.5 * (lo + hi)
                if f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            return hi
        return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)

    def to_dict(self):
        return {"kind": "shortfall", "young": self.loss.to_dict(), "x0": self.x0}


@dataclass(frozen=True)
class OneSidedMoment(RiskSpec):
    """E[(X^-)^p]."""

    p: float
    kind = "one_sided_moment"

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be at least 1")

    def young(self):
        return PowerOverP(self.p)

    def evaluate(self, mu):
        if mu.is_atomic:
            pts, w = mu.atoms()
            return float(np.dot(w, np.maximum(-pts, 0.0) ** self.p))
        lo, _ = mu.support
        if lo >= 0:
            return 0.0
        if not math.isfinite(integrate_gauge(mu, Scaled(PowerOverP(self.p), 1.0))):
            raise OutsideDomain(f"{mu} lacks a finite moment of order {self.p}")
        return expect(mu, lambda x: max(-x, 0.0) ** self.p)

    def batch(self, samples):
        x = np.sort(np.asarray(samples, dtype=float), axis=1)
        return np.mean(np.maximum(-x, 0.0) ** self.p, axis=1)

    def to_dict(self):
        return {"kind": "one_sided_moment", "p": self.p}


def eval_risk(spec: RiskSpec, mu: Distribution) -> float:
    return spec.evaluate(mu)


def risk_from_dict(d: dict) -> RiskSpec:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "avar":
        strict(d, {"kind", "alpha"}, "risk")
        return AVaR(float(d["alpha"]))
    if kind == "distortion":
        strict(d, {"kind", "g", "level"}, "risk")
        return Distortion(d["g"], float(d["level"]))
    if kind == "shortfall":
        strict(d, {"kind", "young", "x0"}, "risk")
        return Shortfall(young_from_dict(d["young"]), float(d["x0"]))
    if kind == "one_sided_moment":
        strict(d, {"kind", "p"}, "risk")
        return OneSidedMoment(float(d["p"]))
    raise ConfigError("risk.kind", f"unknown risk functional {kind!r}")


# ---------------------------------------------------------------- quantile-coupling criterion


@dataclass(frozen=True)
class SdwnReport:
    ns: tuple
    norms: tuple
    metrics: tuple
    tol: float
    norm_converges: bool
    metric_converges: bool

    @property
    def consistent(self) -> bool:
        return self.norm_converges == self.metric_converges

    def rows(self):
        return [[n, a, b] for n, a, b in zip(self.ns, self.norms, self.metrics)]

    def to_dict(self):
        return {"ns": list(self.ns), "luxemburg_norm": list(self.norms), "psi_metric": list(self.metrics),
                "tol": self.tol, "norm_converges": self.norm_converges,
                "metric_converges": self.metric_converges,
                "verdict": "pass" if self.consistent else "fail"}


def sdwn_convergence(mu_n: Callable[[int], Distribution], mu0: Distribution, young: YoungFunction,
                     n_max: int, tol: float = 0.02, K: int = DEFAULT_K, ns=None) -> SdwnReport:
    """Quantile-coupling norm versus the metric with gauges Psi(k|x|), along mu_n -> mu0."""
    from wsetlab.integrability import default_indices

    ns = default_indices(n_max) if ns is None else sorted(set(int(n) for n in ns) | {n_max})
    seq = YoungScaled(young)
    norms, metrics = [], []
    for n in ns:
        m = mu_n(n)
        norms.append(quantile_gap_norm(m, mu0, young))
        metrics.append(psi_metric(m, mu0, seq, K).value)
    return SdwnReport(tuple(ns), tuple(norms), tuple(metrics), tol, norms[-1] <= tol, metrics[-1] <= tol)


def shortfall_blowup_sequence(n: int) -> Distribution:
    """Law of X_n: -n with probability exp(-n)/n, else 0.

    With Psi(x) = exp(x) - 1 the gauge integral int Psi(|x|) dmu_n equals
    (1 - exp(-n))/n -> 0, so X_n -> 0 in the single-gauge topology, while the
    shortfall of 8 X_n is about 7n - log(x0 n) and diverges.
    """
    p = math.exp(-n) / n
    return mixture([(1.0 - p, Dirac(0.0)), (p, Dirac(-float(n)))])
