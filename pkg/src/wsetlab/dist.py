"""One-dimensional laws: analytic families, finite mixtures and finite-support measures."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from wsetlab.errors import DomainError, QuadratureFailure
from wsetlab.gauge import Constant1, Dilated, ExpPower, GaugeFunction, Power, Scaled, eval_gauge
from wsetlab.rng import uniforms
from wsetlab.young import ExponentialYoung, Linear, PowerOverP

EULER_GAMMA = float(np.euler_gamma)
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
DIVERGENCE_CEILING = 1e12

# Quantile levels used to split quadrature panels; the outermost panels run to
# the support boundary, which quad maps to a finite interval when infinite.
_SPLIT_LEVELS = (1e-12, 1e-8, 1e-4, 1e-2, 0.1, 0.5, 0.9, 0.99, 1 - 1e-4, 1 - 1e-8, 1 - 1e-12)


class Distribution:
    kind: str = ""

    # ---- interface
    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def quantile_upper(self, s):
        """F^{<-}(1 - s), accurate for small s."""
        return self.quantile(1.0 - np.asarray(s, dtype=float))

    def logpdf(self, x):
        """Log density of the absolutely continuous part (analytic kinds only)."""
        raise NotImplementedError

    @property
    def support(self) -> tuple:
        return (-math.inf, math.inf)

    def tails(self) -> tuple:
        """(left, right) tail descriptors: ('none',), ('power', a), ('exp', rate), ('gauss', sigma), ('dexp', a)."""
        return ("none",), ("none",)

    def mean(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def is_atomic(self) -> bool:
        return False

    def atoms(self):
        """(points, weights) of the atomic part; empty for analytic kinds."""
        return np.empty(0), np.empty(0)

    def pdf(self, x):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.logpdf(x))


def _check_positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"{name} must be finite and positive, got {v}")


@dataclass(frozen=True)
class Normal(Distribution):
    m: float = 0.0
    sigma: float = 1.0
    kind = "normal"

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.m) / self.sigma)

    def quantile(self, u):
        return self.m + self.sigma * special.ndtri(_check_u(u))

    def quantile_upper(self, s):
        return self.m - self.sigma * special.ndtri(_check_u(s))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.m) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2 * math.pi)

    def tails(self):
        return ("gauss", self.sigma), ("gauss", self.sigma)

    def mean(self):
        return self.m

    def to_dict(self):
        return {"kind": "normal", "m": self.m, "sigma": self.sigma}


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential law with mean theta."""

    theta: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        _check_positive("theta", self.theta)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-np.maximum(x, 0) / self.theta), 0.0)

    def quantile(self, u):
        return -self.theta * np.log1p(-_check_u(u))

    def quantile_upper(self, s):
        return -self.theta * np.log(_check_u(s))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x >= 0, -math.log(self.theta) - x / self.theta, -np.inf)

    @property
    def support(self):
        return (0.0, math.inf)

    def tails(self):
        return ("none",), ("exp", 1.0 / self.theta)

    def mean(self):
        return self.theta

    def to_dict(self):
        return {"kind": "exponential", "theta": self.theta}


@dataclass(frozen=True)
class Gamma(Distribution):
    """Gamma law with shape kappa and scale theta."""

    kappa: float = 1.0
    theta: float = 1.0
    kind = "gamma"

    def __post_init__(self):
        _check_positive("kappa", self.kappa)
        _check_positive("theta", self.theta)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammainc(self.kappa, np.maximum(x, 0) / self.theta)

    def quantile(self, u):
        return self.theta * special.gammaincinv(self.kappa, _check_u(u))

    def quantile_upper(self, s):
        return self.theta * special.gammainccinv(self.kappa, _check_u(s))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        k, t = self.kappa, self.theta
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (k - 1) * np.log(np.maximum(x, 0)) - x / t - special.gammaln(k) - k * math.log(t)
            return np.where(x > 0, v, -np.inf)

    @property
    def support(self):
        return (0.0, math.inf)

    def tails(self):
        return ("none",), ("exp", 1.0 / self.theta)

    def mean(self):
        return self.kappa * self.theta

    def to_dict(self):
        return {"kind": "gamma", "kappa": self.kappa, "theta": self.theta}


@dataclass(frozen=True)
class Pareto(Distribution):
    """Density a * x_min**a / x**(a+1) on [x_min, inf)."""

    a: float = 2.0
    x_min: float = 1.0
    kind = "pareto"

    def __post_init__(self):
        _check_positive("a", self.a)
        _check_positive("x_min", self.x_min)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x >= self.x_min, 1.0 - (self.x_min / np.maximum(x, self.x_min)) ** self.a, 0.0)

    def quantile(self, u):
        return self.x_min * (1.0 - _check_u(u)) ** (-1.0 / self.a)

    def quantile_upper(self, s):
        return self.x_min * _check_u(s) ** (-1.0 / self.a)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        a, xm = self.a, self.x_min
        with np.errstate(divide="ignore", invalid="ignore"):
            v = math.log(a) + a * math.log(xm) - (a + 1) * np.log(np.maximum(x, xm))
            return np.where(x >= xm, v, -np.inf)

    @property
    def support(self):
        return (self.x_min, math.inf)

    def tails(self):
        return ("none",), ("power", self.a)

    def mean(self):
        return math.inf if self.a <= 1 else self.a * self.x_min / (self.a - 1)

    def to_dict(self):
        return {"kind": "pareto", "a": self.a, "x_min": self.x_min}


@dataclass(frozen=True)
class Gumbel(Distribution):
    """cdf exp(-exp(-a x)), density a exp(-a x - exp(-a x))."""

    a: float = 1.0
    kind = "gumbel"

    def __post_init__(self):
        _check_positive("a", self.a)

    def cdf(self, x):
        with np.errstate(over="ignore"):
            return np.exp(-np.exp(-self.a * np.asarray(x, dtype=float)))

    def quantile(self, u):
        return -np.log(-np.log(_check_u(u))) / self.a

    def quantile_upper(self, s):
        return -np.log(-np.log1p(-_check_u(s))) / self.a

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return math.log(self.a) - self.a * x - np.exp(-self.a * x)

    def tails(self):
        return ("dexp", self.a), ("exp", self.a)

    def mean(self):
        return EULER_GAMMA / self.a

    def to_dict(self):
        return {"kind": "gumbel", "a": self.a}


class _Atomic(Distribution):
    @property
    def is_atomic(self):
        return True

    @property
    def support(self):
        pts, _ = self.atoms()
        return (float(pts[0]), float(pts[-1]))

    def tails(self):
        return ("none",), ("none",)


@dataclass(frozen=True)
class Dirac(_Atomic):
    c: float = 0.0
    kind = "dirac"

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.c, 1.0, 0.0)

    def quantile(self, u):
        return np.full_like(_check_u(u), self.c, dtype=float)

    def atoms(self):
        return np.array([float(self.c)]), np.array([1.0])

    def mean(self):
        return float(self.c)

    def to_dict(self):
        return {"kind": "dirac", "c": self.c}


@dataclass(frozen=True, eq=False)
class Empirical(_Atomic):
    """Finite-support law. Atoms are sorted and merged on construction."""

    points: np.ndarray
    weights: np.ndarray = None
    cum: np.ndarray = field(init=False, repr=False)
    kind = "empirical"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise DomainError("empirical law needs at least one atom")
        if not np.all(np.isfinite(pts)):
            raise DomainError("empirical atoms must be finite")
        w = np.full(pts.size, 1.0 / pts.size) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if w.shape != pts.shape or np.any(w < 0):
            raise DomainError("weights must be nonnegative and match the atoms")
        tot = w.sum()
        if not abs(tot - 1.0) <= 1e-9:
            raise DomainError(f"weights sum to {tot}, not 1")
        order = np.argsort(pts, kind="stable")
        pts, w = pts[order], w[order]
        keep = w > 0
        pts, w = pts[keep], w[keep]
        uniq, start = np.unique(pts, return_index=True)
        w = np.add.reduceat(w, start) / tot
        object.__setattr__(self, "points", uniq)
        object.__setattr__(self, "weights", w)
        cum = np.cumsum(w)
        cum[-1] = 1.0
        object.__setattr__(self, "cum", cum)

    def __eq__(self, other):
        return (isinstance(other, Empirical) and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def cdf(self, x):
        idx = np.searchsorted(self.points, np.asarray(x, dtype=float), side="right")
        return np.where(idx > 0, self.cum[np.maximum(idx - 1, 0)], 0.0)

    def quantile(self, u):
        idx = np.searchsorted(self.cum, _check_u(u), side="left")
        return self.points[np.minimum(idx, self.points.size - 1)]

    def atoms(self):
        return self.points, self.weights

    def mean(self):
        return float(np.dot(self.points, self.weights))

    def to_dict(self):
        return {"kind": "empirical", "points": self.points.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class Mixture(Distribution):
    """Finite mixture sum_i w_i * component_i. Use :func:`mixture` to construct."""

    weights: tuple
    components: tuple
    kind = "mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0 or w.size != len(self.components) or np.any(w < 0):
            raise DomainError("mixture weights must be nonnegative, one per component")
        if not abs(w.sum() - 1.0) <= 1e-12:
            raise DomainError(f"mixture weights sum to {w.sum()}, not 1")

    def cdf(self, x):
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def quantile(self, u):
        shape = np.shape(u)
        u = np.atleast_1d(_check_u(u))
        lo = np.min([c.quantile(u) for c in self.components], axis=0)
        hi = np.max([c.quantile(u) for c in self.components], axis=0)
        for _ in range(200):
            if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(hi))):
                break
            mid = 0.5 * (lo + hi)
            ok = self.cdf(mid) >= u
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        # snap to an atom when the bisection converged onto one
        pts, _ = self.atoms()
        if pts.size:
            j = np.clip(np.searchsorted(pts, hi), 0, pts.size - 1)
            near = np.abs(pts[j] - hi) <= 1e-12 * np.maximum(1.0, np.abs(hi))
            hi = np.where(near, pts[j], hi)
        return hi.reshape(shape)

    def logpdf(self, x):
        parts = [math.log(w) + c.logpdf(x) for w, c in zip(self.weights, self.components)
                 if w > 0 and not c.is_atomic]
        if not parts:
            return np.full_like(np.asarray(x, dtype=float), -np.inf)
        return np.logaddexp.reduce(np.broadcast_arrays(*parts), axis=0)

    @property
    def support(self):
        s = [c.support for c in self.components]
        return (min(a for a, _ in s), max(b for _, b in s))

    def tails(self):
        return _heaviest([c.tails()[0] for c in self.components]), _heaviest([c.tails()[1] for c in self.components])

    def atoms(self):
        pts, ws = [], []
        for w, c in zip(self.weights, self.components):
            p, q = c.atoms()
            pts.append(p)
            ws.append(w * q)
        pts, ws = np.concatenate(pts), np.concatenate(ws)
        if pts.size == 0:
            return pts, ws
        order = np.argsort(pts, kind="stable")
        uniq, start = np.unique(pts[order], return_index=True)
        return uniq, np.add.reduceat(ws[order], start)

    def mean(self):
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))

    def to_dict(self):
        return {"kind": "mixture",
                "components": [{"weight": w, "dist": c.to_dict()} for w, c in zip(self.weights, self.components)]}


_TAIL_ORDER = {"none": 0, "dexp": 1, "gauss": 2, "exp": 3, "power": 4}


def _heaviest(tails):
    def key(t):
        # within a class a heavier tail has a smaller rate / larger sigma / smaller index
        if t[0] == "gauss":
            return (_TAIL_ORDER[t[0]], t[1])
        if t[0] in ("exp", "power", "dexp"):
            return (_TAIL_ORDER[t[0]], -t[1])
        return (0, 0)
    return max(tails, key=key)


def mixture(pairs) -> Distribution:
    """Mixture from (weight, law) pairs; all-atomic mixtures become Empirical."""
    pairs = [(float(w), d) for w, d in pairs if w > 0]
    if len(pairs) == 1:
        return pairs[0][1]
    if all(d.is_atomic for _, d in pairs):
        pts = np.concatenate([d.atoms()[0] for _, d in pairs])
        ws = np.concatenate([w * d.atoms()[1] for w, d in pairs])
        return Empirical(pts, ws / ws.sum())
    w = np.array([p[0] for p in pairs])
    w = w / w.sum()
    return Mixture(tuple(w.tolist()), tuple(d for _, d in pairs))


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("quantile level must lie in (0, 1)")
    return u


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SampleStream:
    seed: int
    stream_id: int
    distribution: Distribution

    def draw(self, n: int) -> np.ndarray:
        return sample(self.distribution, self.seed, self.stream_id, n)


def sample(d: Distribution, seed: int, stream: int, n: int) -> np.ndarray:
    """n draws F^{<-}(U) from counter-based uniforms.

    Mixtures use composition: channel 1 picks the component and channel 0
    drives the component quantile, so a contaminated stream shares its
    uncontaminated draws with the base law's stream.
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    u = uniforms(seed, stream, n)
    if isinstance(d, Mixture):
        pick = _pick(d.weights, uniforms(seed, stream, n, channel=1))
        out = np.empty(n)
        for i, c in enumerate(d.components):
            sel = pick == i
            if sel.any():
                out[sel] = c.quantile(u[sel])
        return out
    return np.asarray(d.quantile(u), dtype=float)


def sample_matrix(d: Distribution, seed: int, streams, n: int) -> np.ndarray:
    return np.stack([sample(d, seed, s, n) for s in streams])


def _pick(weights, v):
    edges = np.cumsum(weights)
    edges[-1] = 1.0
    return np.minimum(np.searchsorted(edges, v, side="right"), len(weights) - 1)


# ---------------------------------------------------------------- integrals


def _growth_finite(growth, tail) -> bool:
    kind = growth[0]
    t = tail[0]
    if kind == "bounded" or t == "none":
        return True
    if kind == "poly":
        return tail[1] > growth[1] if t == "power" else True
    _, lam, alpha = growth
    if t == "power":
        return False
    if t == "exp":
        return alpha < 1 or (alpha == 1 and lam < tail[1])
    if t == "gauss":
        return alpha < 2 or (alpha == 2 and lam < 1.0 / (2 * tail[1] ** 2))
    return True  # dexp dominates every exp-power gauge


def diverges(d: Distribution, g: GaugeFunction):
    """True/False by analytic rule, or None if no rule applies."""
    if isinstance(d, Mixture):
        verdicts = [diverges(c, g) for c in d.components]
        if any(v is True for v in verdicts):
            return True
        return None if any(v is None for v in verdicts) else False
    if d.is_atomic:
        return False
    growth = g.growth()
    if growth is None:
        return None
    left, right = d.tails()
    return not (_growth_finite(growth[0], left) and _growth_finite(growth[1], right))


def _as_power(g):
    """Scaled power-type Young gauges are constant multiples of |x|**p: (factor, p)."""
    if isinstance(g, Dilated):
        inner = (1.0, g.base.p) if isinstance(g.base, Power) else _as_power(g.base)
        return None if inner is None else (inner[0] * g.s ** inner[1], inner[1])
    if isinstance(g, Scaled):
        if isinstance(g.young, Linear):
            return g.k, 1.0
        if isinstance(g.young, PowerOverP):
            return g.k ** g.young.p / g.young.p, g.young.p
    return None


def _closed_form(d, g):
    fp = _as_power(g)
    if fp is not None:
        v = _closed_form(d, Power(fp[1]))
        return None if v is None else fp[0] * v
    if isinstance(g, Constant1):
        return 1.0
    if isinstance(g, Power):
        p = g.p
        if isinstance(d, Exponential):
            return d.theta ** p * math.gamma(p + 1)
        if isinstance(d, Gamma):
            return d.theta ** p * math.exp(special.gammaln(d.kappa + p) - special.gammaln(d.kappa))
        if isinstance(d, Pareto):
            return d.a * d.x_min ** p / (d.a - p)
        if isinstance(d, Normal):
            r = d.m / d.sigma
            return (d.sigma ** p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
                    * special.hyp1f1(-p / 2, 0.5, -r * r / 2))
    if isinstance(g, Scaled) and isinstance(g.young, ExponentialYoung) and g.young.beta == 1:
        return _exp_young_closed_form(d, g.k)
    if isinstance(g, ExpPower) and g.alpha == 1:
        if isinstance(d, Exponential):
            return 1.0 / (1.0 - g.lam * d.theta)
        if isinstance(d, Gamma):
            return (1.0 - g.lam * d.theta) ** (-d.kappa)
    return None


def _exp_young_closed_form(d, k):
    """E[exp(k|X|)] - 1; math.inf when the finite value exceeds the float range."""
    try:
        if isinstance(d, Exponential):
            return 1.0 / (1.0 - k * d.theta) - 1.0
        if isinstance(d, Normal):
            r, ks = d.m / d.sigma, k * d.sigma
            up = math.exp(k * d.m + ks * ks / 2 + special.log_ndtr(r + ks))
            down = math.exp(-k * d.m + ks * ks / 2 + special.log_ndtr(-r + ks))
            return up + down - 1.0
    except OverflowError:
        return math.inf
    return None


def integrate_gauge(d: Distribution, g: GaugeFunction) -> float:
    """int psi d(mu); math.inf when the integral diverges."""
    if isinstance(d, Mixture):
        return float(sum(w * integrate_gauge(c, g) for w, c in zip(d.weights, d.components)))
    if d.is_atomic:
        pts, w = d.atoms()
        return float(sum(wi * eval_gauge(g, float(x)) for x, wi in zip(pts, w)))
    verdict = diverges(d, g)
    if verdict:
        return math.inf
    cf = _closed_form(d, g)
    if cf is not None:
        return float(cf)
    return _density_integral(d, g.log, *d.support, check_divergence=verdict is None)


def tail_gauge_integral(d: Distribution, g: GaugeFunction, a: float) -> float:
    """int psi 1{psi >= a} d(mu)."""
    if isinstance(d, Mixture):
        return float(sum(w * tail_gauge_integral(c, g, a) for w, c in zip(d.weights, d.components)))
    if d.is_atomic:
        pts, w = d.atoms()
        vals = np.array([eval_gauge(g, float(x)) for x in pts])
        return float(np.sum(np.where(vals >= a, vals * w, 0.0)))
    if diverges(d, g):
        return math.inf
    sets = g.level_set(a)
    lo, hi = d.support
    if sets is None:
        def logf(x, a=a):
            v = g.log(x)
            return np.where(v >= math.log(a) if a > 0 else True, v, -np.inf)
        return _density_integral(d, logf, lo, hi)
    total = 0.0
    for l, r in sets:
        l, r = max(l, lo), min(r, hi)
        if l >= r:
            continue
        cf = _tail_closed_form(d, g, l, r)
        total += cf if cf is not None else _density_integral(d, g.log, l, r)
    return float(total)


def level_set_mass(d: Distribution, g: GaugeFunction, a: float) -> float:
    """mu(psi >= a)."""
    if isinstance(d, Mixture):
        return float(sum(w * level_set_mass(c, g, a) for w, c in zip(d.weights, d.components)))
    if d.is_atomic:
        pts, w = d.atoms()
        return float(np.sum(w[np.asarray(g(pts)) >= a]))
    sets = g.level_set(a)
    if sets is None:
        return expect(d, lambda x: 1.0 if float(g(x)) >= a else 0.0)
    total = 0.0
    for l, r in sets:
        total += float(d.cdf(r)) - (float(d.cdf(l)) if math.isfinite(l) else 0.0)
    return min(max(total, 0.0), 1.0)


def _tail_closed_form(d, g, l, r):
    fp = _as_power(g)
    if fp is not None:
        v = _tail_closed_form(d, Power(fp[1]), l, r)
        return None if v is None else fp[0] * v
    if not (isinstance(g, Power) and math.isinf(r) and l >= 0):
        return None
    p = g.p
    if isinstance(d, (Exponential, Gamma)):
        k = 1.0 if isinstance(d, Exponential) else d.kappa
        t = d.theta
        return t ** p * math.exp(special.gammaln(k + p) - special.gammaln(k)) * special.gammaincc(k + p, l / t)
    if isinstance(d, Pareto):
        s = max(l, d.x_min)
        return d.a * d.x_min ** d.a * s ** (p - d.a) / (d.a - p)
    return None


def _breakpoints(d, lo, hi):
    pts = {lo, hi}
    qs = np.asarray(d.quantile(np.array(_SPLIT_LEVELS)), dtype=float)
    pts.update(float(q) for q in qs if lo < q < hi)
    if lo < 0 < hi:
        pts.add(0.0)
    return sorted(pts)


def _density_integral(d, log_fn: Callable, lo, hi, check_divergence=False) -> float:
    """int exp(log_fn(x) + logpdf(x)) dx over (lo, hi), by panels."""

    def integrand(x):
        lp = float(d.logpdf(x))
        if lp == -math.inf:
            return 0.0
        v = float(log_fn(x)) + lp
        return 0.0 if v == -math.inf else math.exp(min(v, 709.0))

    total, err = 0.0, 0.0
    edges = _breakpoints(d, lo, hi)
    for a, b in zip(edges, edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(integrand, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        total += val
        err += e
        if check_divergence and total > DIVERGENCE_CEILING:
            return math.inf
    if not math.isfinite(total) or err > 1e-6 * max(1.0, abs(total)):
        raise QuadratureFailure(f"quadrature for {d} did not converge", value=total, error=err)
    return total


def expect(d: Distribution, fn: Callable) -> float:
    """E[fn(X)] for a finite signed integrand."""
    if isinstance(d, Mixture):
        return float(sum(w * expect(c, fn) for w, c in zip(d.weights, d.components)))
    if d.is_atomic:
        pts, w = d.atoms()
        return float(np.dot(np.asarray(fn(pts), dtype=float), w))

    def integrand(x):
        p = float(d.pdf(x))
        return 0.0 if p == 0.0 else float(fn(x)) * p

    lo, hi = d.support
    edges = _breakpoints(d, lo, hi)
    total, err = 0.0, 0.0
    for a, b in zip(edges, edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(integrand, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        total += val
        err += e
    if not math.isfinite(total) or err > 1e-6 * max(1.0, abs(total)):
        raise QuadratureFailure(f"expectation under {d} did not converge", value=total, error=err)
    return total


# ---------------------------------------------------------------- families

FAMILIES = ("exponential", "gumbel", "normal", "pareto", "gamma")


def parametric_family(name: str, theta: float, fixed: dict | None = None) -> Distribution:
    """One-parameter slice of an analytic family; ``fixed`` supplies the other parameters.

    exponential: mean theta; gumbel: rate theta; normal: mean theta (sigma fixed,
    default 1); pareto: shape theta (x_min fixed, default 1); gamma: scale theta
    (kappa fixed, default 2).
    """
    fx = dict(fixed or {})
    if name == "exponential":
        return Exponential(theta)
    if name == "gumbel":
        return Gumbel(theta)
    if name == "normal":
        return Normal(theta, float(fx.get("sigma", 1.0)))
    if name == "pareto":
        return Pareto(theta, float(fx.get("x_min", 1.0)))
    if name == "gamma":
        return Gamma(float(fx.get("kappa", 2.0)), theta)
    raise DomainError(f"unknown family {name!r}")


# ---------------------------------------------------------------- literals


def dist_from_dict(d: dict) -> Distribution:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    try:
        if kind == "normal":
            strict(d, {"kind"}, "dist", optional={"m", "sigma"})
            return Normal(float(d.get("m", 0.0)), float(d.get("sigma", 1.0)))
        if kind == "exponential":
            strict(d, {"kind", "theta"}, "dist")
            return Exponential(float(d["theta"]))
        if kind == "gamma":
            strict(d, {"kind", "kappa", "theta"}, "dist")
            return Gamma(float(d["kappa"]), float(d["theta"]))
        if kind == "pareto":
            strict(d, {"kind", "a", "x_min"}, "dist")
            return Pareto(float(d["a"]), float(d["x_min"]))
        if kind == "gumbel":
            strict(d, {"kind", "a"}, "dist")
            return Gumbel(float(d["a"]))
        if kind == "dirac":
            strict(d, {"kind", "c"}, "dist")
            return Dirac(float(d["c"]))
        if kind == "empirical":
            strict(d, {"kind", "points"}, "dist", optional={"weights"})
            return Empirical(np.asarray(d["points"], float),
                             None if d.get("weights") is None else np.asarray(d["weights"], float))
        if kind == "csv":
            strict(d, {"kind", "path"}, "dist")
            return empirical_from_csv(d["path"])
        if kind == "mixture":
            strict(d, {"kind", "components"}, "dist")
            pairs = []
            for c in d["components"]:
                strict(c, {"weight", "dist"}, "dist.components")
                pairs.append((float(c["weight"]), dist_from_dict(c["dist"])))
            return mixture(pairs)
    except DomainError as e:
        raise ConfigError("dist", str(e)) from None
    raise ConfigError("dist.kind", f"unknown distribution kind {kind!r}")


def read_csv_column(path) -> np.ndarray:
    """Observations from a one-column CSV; a non-numeric first row is a header."""
    vals = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if i == 0 and not vals:
                    continue
                raise DomainError(f"{path}: row {i + 1} is not a number: {row[0]!r}") from None
    return np.asarray(vals)


def empirical_from_csv(path) -> Empirical:
    return Empirical(read_csv_column(path))
