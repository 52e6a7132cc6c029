"""Fréchet classes: couplings of fixed marginals, aggregation maps, and a
coupling-free tail bound for the aggregated laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from wsetlab.dist import Empirical, integrate_gauge, level_set_mass, tail_gauge_integral
from wsetlab.errors import DomainError, InvalidGauge, OutsideDomain, UnsupportedCoupling
from wsetlab.gauge import GaugeSequence, dilate
from wsetlab.integrability import THRESHOLD_GRID, ThresholdRow, UniformIntegrabilityReport
from wsetlab.rng import uniforms

PSD_TOL = 1e-10


# ---------------------------------------------------------------- couplings


class Coupling:
    name = ""

    def uniforms(self, seed: int, stream: int, n: int, d: int) -> np.ndarray:
        """(n, d) matrix with uniform marginals."""
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class Independent(Coupling):
    name = "independent"

    def uniforms(self, seed, stream, n, d):
        return np.column_stack([uniforms(seed, stream, n, channel=10 + i) for i in range(d)])


@dataclass(frozen=True)
class Comonotone(Coupling):
    name = "comonotone"

    def uniforms(self, seed, stream, n, d):
        u = uniforms(seed, stream, n, channel=10)
        return np.repeat(u[:, None], d, axis=1)


@dataclass(frozen=True)
class Countermonotone(Coupling):
    name = "countermonotone"

    def uniforms(self, seed, stream, n, d):
        if d != 2:
            raise UnsupportedCoupling(f"countermonotone coupling needs d = 2, got {d}")
        u = uniforms(seed, stream, n, channel=10)
        return np.column_stack([u, 1.0 - u])


@dataclass(frozen=True, eq=False)
class GaussianCopula(Coupling):
    corr: np.ndarray
    root: np.ndarray = field(init=False, repr=False)
    name = "gaussian"

    def __post_init__(self):
        c = np.asarray(self.corr, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise DomainError("correlation matrix must be square")
        if not np.allclose(c, c.T, atol=PSD_TOL) or not np.allclose(np.diag(c), 1.0, atol=PSD_TOL):
            raise DomainError("correlation matrix must be symmetric with unit diagonal")
        vals, vecs = np.linalg.eigh(c)
        if vals.min() < -PSD_TOL:
            raise DomainError(f"correlation matrix is not positive semidefinite (min eigenvalue {vals.min()})")
        object.__setattr__(self, "corr", c)
        object.__setattr__(self, "root", vecs * np.sqrt(np.clip(vals, 0.0, None)))

    def uniforms(self, seed, stream, n, d):
        if self.corr.shape[0] != d:
            raise DomainError(f"correlation matrix is {self.corr.shape[0]}x{self.corr.shape[0]}, need {d}")
        z = special.ndtri(Independent().uniforms(seed, stream, n, d)) @ self.root.T
        return np.clip(special.ndtr(z), 2.0 ** -54, 1.0 - 2.0 ** -53)

    def to_dict(self):
        return {"kind": self.name, "corr": self.corr.tolist()}


@dataclass(frozen=True, eq=False)
class FrechetSpec:
    marginals: tuple
    coupling: Coupling

    @property
    def d(self):
        return len(self.marginals)

    def sample(self, seed: int, stream: int, n: int) -> np.ndarray:
        """(n, d) draws; coordinate i is F_i^{<-}(U_i) with U from the coupling."""
        u = self.coupling.uniforms(seed, stream, n, self.d)
        return np.column_stack([np.asarray(m.quantile(u[:, i]), dtype=float)
                                for i, m in enumerate(self.marginals)])


# ---------------------------------------------------------------- aggregation maps


class AggregationMap:
    """A_d with |A_d(x)| <= b + c * sum |x_i|."""

    name = ""
    lipschitz_bound = (0.0, 1.0)
    vector_valued = False

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class Identity(AggregationMap):
    name = "identity"
    vector_valued = True

    def __call__(self, x):
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Sum(AggregationMap):
    name = "sum"

    def __call__(self, x):
        return np.sum(x, axis=-1)


@dataclass(frozen=True)
class Max(AggregationMap):
    name = "max"

    def __call__(self, x):
        return np.max(x, axis=-1)


@dataclass(frozen=True)
class StopLossSum(AggregationMap):
    thresholds: tuple
    name = "stop_loss_sum"

    def __post_init__(self):
        if any(not t > 0 for t in self.thresholds):
            raise ValueError("thresholds must be positive")

    def __call__(self, x):
        return np.sum(np.maximum(np.asarray(x) - np.asarray(self.thresholds), 0.0), axis=-1)

    def to_dict(self):
        return {"kind": self.name, "thresholds": list(self.thresholds)}


@dataclass(frozen=True)
class AggregateStopLoss(AggregationMap):
    t: float
    name = "aggregate_stop_loss"

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("threshold must be positive")

    def __call__(self, x):
        return np.maximum(np.sum(x, axis=-1) - self.t, 0.0)

    def to_dict(self):
        return {"kind": self.name, "t": self.t}


def sample_vectors(spec: FrechetSpec, seed: int, stream: int, n: int) -> np.ndarray:
    return spec.sample(seed, stream, n)


def sample_aggregate(spec: FrechetSpec, A: AggregationMap, seed: int, stream: int, n: int) -> Empirical:
    """Empirical law of n draws of A(Y_1, ..., Y_d)."""
    if A.vector_valued:
        raise DomainError("the identity map has a multivariate image; use sample_vectors")
    return Empirical(A(spec.sample(seed, stream, n)))


# ---------------------------------------------------------------- uniform tail bound


def aggregation_tail_bound(marginals, A: AggregationMap, g, a: float) -> float:
    """Upper bound on int psi(A) 1{psi(A) >= a} d(mu o A^{-1}) valid for every coupling.

    With Y_0 = psi((d+1) b) and Y_i = psi((d+1) c |X_i|), convexity and
    evenness give psi(|A(X)|) <= S := mean(Y_0, ..., Y_d). Then
    E[S 1{S >= a}] <= (1/(d+1)) sum_i E[Y_i 1{Y_i >= a}] + a sum_i P(Y_i >= a),
    which involves the marginals only.
    """
    d = len(marginals)
    b, c = A.lipschitz_bound
    y0 = float(g((d + 1) * b))
    tails = (y0 if y0 >= a else 0.0)
    probs = 1.0 if y0 >= a else 0.0
    gi = dilate(g, (d + 1) * c)
    for m in marginals:
        tails += tail_gauge_integral(m, gi, a)
        probs += level_set_mass(m, gi, a)
    return tails / (d + 1) + a * probs


def aggregation_ui_bound(spec: FrechetSpec, A: AggregationMap, gauges: GaugeSequence, K: int,
                         eps: float = 0.01, grid=THRESHOLD_GRID) -> UniformIntegrabilityReport:
    """Per k, the least grid threshold at which the coupling-free tail bound is <= eps."""
    d = spec.d
    _, c = A.lipschitz_bound
    rows = []
    for k in range(1, K + 1):
        g = gauges(k)
        if not g.convex_even:
            raise InvalidGauge(f"gauge {k} ({g}) is not declared convex and even")
        gi = dilate(g, (d + 1) * c)
        for i, m in enumerate(spec.marginals):
            if not math.isfinite(integrate_gauge(m, gi)):
                raise OutsideDomain(f"marginal {i} has a divergent integral of gauge {k}", index=k)
        bound = lambda a, g=g: aggregation_tail_bound(spec.marginals, A, g, a)  # noqa: E731
        if bound(grid[-1]) > eps:
            rows.append(ThresholdRow(k, eps, math.nan, bound(grid[-1]), -1))
            continue
        lo, hi = -1, len(grid) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bound(grid[mid]) <= eps:
                hi = mid
            else:
                lo = mid
        rows.append(ThresholdRow(k, eps, grid[hi], bound(grid[hi]), -1))
    return UniformIntegrabilityReport(tuple(rows), all(math.isfinite(r.threshold) for r in rows), 1,
                                      note=f"coupling-free bound over the Fréchet class of {d} marginals")


# ---------------------------------------------------------------- literals


def coupling_from_dict(d: dict) -> Coupling:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    if kind in ("independent", "comonotone", "countermonotone"):
        strict(d, {"kind"}, "coupling")
        return {"independent": Independent, "comonotone": Comonotone, "countermonotone": Countermonotone}[kind]()
    if kind == "gaussian":
        strict(d, {"kind", "corr"}, "coupling")
        return GaussianCopula(np.asarray(d["corr"], dtype=float))
    raise ConfigError("coupling.kind", f"unknown coupling {kind!r}")


def aggregation_from_dict(d: dict) -> AggregationMap:
    from wsetlab._schema import ConfigError, strict

    kind = d.get("kind") if isinstance(d, dict) else None
    simple = {"identity": Identity, "sum": Sum, "max": Max}
    if kind in simple:
        strict(d, {"kind"}, "aggregation")
        return simple[kind]()
    if kind == "stop_loss_sum":
        strict(d, {"kind", "thresholds"}, "aggregation")
        return StopLossSum(tuple(float(t) for t in d["thresholds"]))
    if kind == "aggregate_stop_loss":
        strict(d, {"kind", "t"}, "aggregation")
        return AggregateStopLoss(float(d["t"]))
    raise ConfigError("aggregation.kind", f"unknown aggregation map {kind!r}")
