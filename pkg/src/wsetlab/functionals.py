"""Statistical functionals and their plug-in estimators.

Every functional evaluates on a :class:`~wsetlab.dist.Distribution` and also
offers ``batch`` for an (R, n) matrix of samples, returning one plug-in value
per row (nan where the empirical measure falls outside the domain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from wsetlab.dist import Distribution, Empirical, expect, integrate_gauge
from wsetlab.errors import OutsideDomain
from wsetlab.gauge import AbsLogDensity, Power
from wsetlab.models import GUMBEL, ParametricModel, model_from_name
from wsetlab.risk import RiskSpec, risk_from_dict

GUMBEL_RANGE = (1e-6, 1e6)


class StatisticalFunctional:
    name = ""

    def in_domain(self, mu: Distribution) -> bool:
        try:
            self.evaluate(mu)
        except OutsideDomain:
            return False
        return True

    def evaluate(self, mu: Distribution) -> float:
        raise NotImplementedError

    def batch(self, samples: np.ndarray) -> np.ndarray:
        out = np.empty(len(samples))
        for i, row in enumerate(samples):
            try:
                out[i] = self.evaluate(Empirical(row))
            except OutsideDomain:
                out[i] = np.nan
        return out

    def to_dict(self) -> dict:
        return {"kind": self.name}


def _finite_mean(mu):
    if not math.isfinite(integrate_gauge(mu, Power(1.0))):
        raise OutsideDomain(f"{mu} has no finite first absolute moment")
    return mu.mean()


@dataclass(frozen=True)
class Mean(StatisticalFunctional):
    name = "mean"

    def in_domain(self, mu):
        return math.isfinite(integrate_gauge(mu, Power(1.0)))

    def evaluate(self, mu):
        return float(_finite_mean(mu))

    def batch(self, samples):
        return np.mean(_sorted_rows(samples), axis=1)


@dataclass(frozen=True)
class LowerQuantile(StatisticalFunctional):
    alpha: float
    name = "lower_quantile"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("quantile level must lie in (0, 1)")

    def in_domain(self, mu):
        return True

    def evaluate(self, mu):
        return float(mu.quantile(np.array([self.alpha]))[0])

    def batch(self, samples):
        x = np.sort(samples, axis=1)
        n = x.shape[1]
        cum = np.cumsum(np.full(n, 1.0 / n))
        cum[-1] = 1.0
        j = min(int(np.searchsorted(cum, self.alpha, side="left")), n - 1)
        return x[:, j]

    def to_dict(self):
        return {"kind": self.name, "alpha": self.alpha}


@dataclass(frozen=True)
class MleExponential(StatisticalFunctional):
    """Maximiser of theta -> -log(theta) - mean/theta, i.e. the mean.

    The domain test uses the single gauge psi(x) = x on laws living on (0, inf).
    """

    name = "mle_exponential"

    def evaluate(self, mu):
        lo, _ = mu.support
        if lo < 0 or (mu.is_atomic and lo <= 0) or (not mu.is_atomic and _has_atom_at_or_below_zero(mu)):
            raise OutsideDomain(f"{mu} puts mass on (-inf, 0]")
        return float(_finite_mean(mu))

    def batch(self, samples):
        x = _sorted_rows(samples)
        return np.where(x[:, 0] > 0, np.mean(x, axis=1), np.nan)


def _has_atom_at_or_below_zero(mu):
    pts, w = mu.atoms()
    return bool(np.any((pts <= 0) & (w > 0)))


def log_likelihood(model: ParametricModel, mu: Distribution, theta: float) -> float:
    """int log f_theta d(mu)."""
    if mu.is_atomic:
        pts, w = mu.atoms()
        return float(np.dot(w, model.logpdf(theta, pts)))
    if not math.isfinite(integrate_gauge(mu, AbsLogDensity(model, theta))):
        return -math.inf
    return expect(mu, lambda x: float(model.logpdf(theta, x)))


def expected_score(model: ParametricModel, mu: Distribution, theta: float) -> float:
    if mu.is_atomic:
        pts, w = mu.atoms()
        return float(np.dot(w, model.score(theta, pts)))
    return expect(mu, lambda x: float(model.score(theta, x)))


def mle_generic(model: ParametricModel, mu: Distribution, lo: float = 1e-6, hi: float = 1e6) -> float:
    """Root of the expected score found by bracket expansion from 1 then a bracketing solve.

    Assumes the expected score changes sign exactly once on (lo, hi), which
    holds for likelihoods concave in theta; for other models this is the
    caller's responsibility.
    """
    f = lambda t: expected_score(model, mu, t)  # noqa: E731
    a, b = _bracket(f, lo, hi)
    if mu.is_atomic:
        return _bisect(f, a, b)
    return brentq(f, a, b, xtol=1e-14, rtol=1e-13, maxiter=500)


def _bracket(f, lo, hi):
    a = 1.0
    fa = f(a)
    if fa > 0:
        b = a
        while fa > 0:
            a, b = b, b * 2.0
            if b > hi:
                raise OutsideDomain(f"score stays positive up to {hi}")
            fa = f(b)
        return a, b
    b = a
    while fa <= 0:
        if fa == 0:
            return a, a
        b, a = a, a / 2.0
        if a < lo:
            raise OutsideDomain(f"score stays nonpositive down to {lo}")
        fa = f(a)
    return a, b


def _bisect(f, a, b):
    if a == b:
        return a
    while True:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            return mid
        if f(mid) > 0:
            a = mid
        else:
            b = mid


@dataclass(frozen=True)
class MleGumbel(StatisticalFunctional):
    """argmax_a int (log a - a x - exp(-a x)) d(mu), a in (0, inf).

    The derivative 1/a - E X + E[X exp(-a X)] is strictly decreasing, so the
    maximiser is its unique root. For the point mass at zero the derivative is
    1/a > 0 for every a and no maximiser exists.
    """

    lo: float = GUMBEL_RANGE[0]
    hi: float = GUMBEL_RANGE[1]
    name = "mle_gumbel"

    def _check(self, mu):
        pts, w = mu.atoms()
        if mu.is_atomic and np.all(pts[w > 0] == 0.0):
            raise OutsideDomain("the point mass at 0 has no Gumbel likelihood maximiser")
        if not math.isfinite(integrate_gauge(mu, Power(1.0))):
            raise OutsideDomain(f"{mu} has no finite first absolute moment")
        for a in (self.lo, 1.0):
            if not math.isfinite(integrate_gauge(mu, AbsLogDensity(GUMBEL, a))):
                raise OutsideDomain(f"log-density gauge at a={a} diverges under {mu}", index=None)

    def evaluate(self, mu):
        self._check(mu)
        return mle_generic(GUMBEL, mu, self.lo, self.hi)

    def batch(self, samples):
        x = _sorted_rows(samples)
        m = x.mean(axis=1)

        def score(a):
            with np.errstate(over="ignore", invalid="ignore"):
                t = np.mean(x * np.exp(-a[:, None] * x), axis=1)
            return 1.0 / a - m + t

        R = x.shape[0]
        lo = np.ones(R)
        hi = np.ones(R)
        s = score(lo)
        up = s > 0
        # expand: rows with positive score move hi up, others move lo down
        for _ in range(64):
            grow = up & (score(hi) > 0)
            shrink = ~up & (score(lo) <= 0)
            if not (grow.any() or shrink.any()):
                break
            lo = np.where(grow, hi, lo)
            hi = np.where(grow, hi * 2.0, hi)
            hi = np.where(shrink, lo, hi)
            lo = np.where(shrink, lo / 2.0, lo)
        bad = (hi > self.hi) | (lo < self.lo) | np.all(x == 0.0, axis=1)
        # bisection in log scale on the bracket [lo, hi]
        llo, lhi = np.log(lo), np.log(hi)
        for _ in range(60):
            mid = 0.5 * (llo + lhi)
            pos = score(np.exp(mid)) > 0
            llo = np.where(pos, mid, llo)
            lhi = np.where(pos, lhi, mid)
        out = np.exp(0.5 * (llo + lhi))
        return np.where(bad, np.nan, out)


@dataclass(frozen=True, eq=False)
class MleModel(StatisticalFunctional):
    """Maximum likelihood for a user-supplied one-parameter model."""

    model: ParametricModel
    name = "mle"

    def evaluate(self, mu):
        lo, hi = self.model.domain
        return mle_generic(self.model, mu, max(lo, 1e-6), min(hi, 1e6))

    def to_dict(self):
        return {"kind": "mle", "model": self.model.name}


@dataclass(frozen=True)
class Risk(StatisticalFunctional):
    spec: RiskSpec
    name = "risk"

    def evaluate(self, mu):
        return float(self.spec.evaluate(mu))

    def batch(self, samples):
        return np.asarray(self.spec.batch(_sorted_rows(samples)), dtype=float)

    def to_dict(self):
        return {"kind": "risk", "spec": self.spec.to_dict()}


def _sorted_rows(samples) -> np.ndarray:
    # Sorting first makes every batch reduction exactly permutation invariant.
    return np.sort(np.atleast_2d(np.asarray(samples, dtype=float)), axis=1)


def plug_in(T: StatisticalFunctional, sample) -> float:
    """T evaluated at the empirical measure of ``sample``."""
    x = np.asarray(sample, dtype=float).ravel()
    v = float(T.batch(x[None, :])[0])
    if not math.isfinite(v):
        # let evaluate name the domain violation
        return T.evaluate(Empirical(x))
    return v


def functional_from_dict(d: dict) -> StatisticalFunctional:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "mean":
        strict(d, {"kind"}, "functional")
        return Mean()
    if kind == "lower_quantile":
        strict(d, {"kind", "alpha"}, "functional")
        return LowerQuantile(float(d["alpha"]))
    if kind == "mle_exponential":
        strict(d, {"kind"}, "functional")
        return MleExponential()
    if kind == "mle_gumbel":
        strict(d, {"kind"}, "functional")
        return MleGumbel()
    if kind == "mle":
        strict(d, {"kind", "model"}, "functional")
        return MleModel(model_from_name(d["model"]))
    if kind == "risk":
        strict(d, {"kind", "spec"}, "functional")
        return Risk(risk_from_dict(d["spec"]))
    raise ConfigError("functional.kind", f"unknown functional {kind!r}")
