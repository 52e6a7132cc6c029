"""Finite-family and sequence surrogates for w-set membership.

Uniform integrability of a family is checked by a threshold search on a fixed
geometric grid; convergence along an explicit sequence is checked through the
Lévy gap and the gauge-integral gaps. Neither certifies the neighbourhood
version of the property, which quantifies over weakly open sets; reports carry
that caveat in ``note``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from wsetlab.dist import Distribution, integrate_gauge, tail_gauge_integral
from wsetlab.errors import OutsideDomain
from wsetlab.gauge import GaugeSequence
from wsetlab.metrics import levy_distance

THRESHOLD_GRID = tuple(2.0 ** (j / 4) for j in range(121))
DEFAULT_EPS = 0.01
DEFAULT_TOL = 0.02

SURROGATE_NOTE = ("finite-family / explicit-sequence evidence only; the neighbourhood "
                  "form of uniform integrability is not certified")


@dataclass(frozen=True)
class ThresholdRow:
    k: int
    eps: float
    threshold: float  # nan when no grid point works
    sup_tail: float
    witness: int  # index of the family member attaining sup_tail

    def to_dict(self):
        return {"k": self.k, "eps": self.eps, "threshold": self.threshold,
                "sup_tail": self.sup_tail, "witness": self.witness}


@dataclass(frozen=True)
class UniformIntegrabilityReport:
    per_k: tuple
    passed: bool
    family_size: int
    note: str = SURROGATE_NOTE

    def to_dict(self):
        return {"per_k": [r.to_dict() for r in self.per_k], "verdict": "pass" if self.passed else "fail",
                "family_size": self.family_size, "note": self.note}


def _check_finite(family, g, k):
    for i, d in enumerate(family):
        if not math.isfinite(integrate_gauge(d, g)):
            raise OutsideDomain(f"member {i} ({d}) has a divergent integral of gauge {k}", index=k)


def least_threshold(family: Sequence[Distribution], g, eps: float, grid=THRESHOLD_GRID):
    """Least grid point a with sup_family int g 1{g >= a} <= eps.

    Returns (a, sup_tail, witness); a is nan if the grid is exhausted, in which
    case sup_tail/witness refer to the last grid point.
    """
    def sup_tail(a):
        tails = [tail_gauge_integral(d, g, a) for d in family]
        i = int(np.argmax(tails))
        return tails[i], i

    lo, hi = -1, len(grid) - 1
    top, wit = sup_tail(grid[hi])
    if top > eps:
        return math.nan, top, wit
    best = (top, wit)
    # tails are nonincreasing in a: bisect for the first admissible index
    while hi - lo > 1:
        mid = (lo + hi) // 2
        t, w = sup_tail(grid[mid])
        if t <= eps:
            hi, best = mid, (t, w)
        else:
            lo = mid
    return grid[hi], best[0], best[1]


def uniform_integrating_check(family: Sequence[Distribution], seq: GaugeSequence, K: int,
                              eps: float = DEFAULT_EPS, grid=THRESHOLD_GRID) -> UniformIntegrabilityReport:
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    rows = []
    for k in range(1, K + 1):
        g = seq(k)
        _check_finite(family, g, k)
        a, t, w = least_threshold(family, g, eps, grid)
        rows.append(ThresholdRow(k, eps, a, t, w))
    return UniformIntegrabilityReport(tuple(rows), all(math.isfinite(r.threshold) for r in rows), len(family))


def ladder_sublevel_radius(p_k: float, p_next: float, n: float) -> float:
    """Radius of {x : |x|**p_next <= n |x|**p_k} for an increasing power ladder.

    The set is the interval |x| <= n**(1/(p_next - p_k)); in particular it is bounded.
    """
    if not p_next > p_k:
        raise ValueError("ladder exponents must increase")
    return n ** (1.0 / (p_next - p_k))


# ---------------------------------------------------------------- sequences


def default_indices(n_max: int) -> list:
    """Roughly geometric indices 1..n_max, always including n_max."""
    pts = np.unique(np.round(np.geomspace(1, n_max, 13)).astype(int))
    return [int(n) for n in pts]


@dataclass(frozen=True)
class SequenceConvergenceReport:
    ns: tuple
    levy_gaps: tuple
    gauge_gaps: tuple  # gauge_gaps[k-1][i] belongs to ns[i]
    tol: float
    passed: bool
    failing_k: int | None  # 0 stands for the Lévy gap
    note: str = SURROGATE_NOTE

    @property
    def K(self):
        return len(self.gauge_gaps)

    def header(self):
        return ["n", "levy_gap"] + [f"gauge_gap_k{k}" for k in range(1, self.K + 1)]

    def rows(self):
        return [[n, self.levy_gaps[i]] + [self.gauge_gaps[k][i] for k in range(self.K)]
                for i, n in enumerate(self.ns)]

    def to_dict(self):
        return {"ns": list(self.ns), "levy_gaps": list(self.levy_gaps),
                "gauge_gaps": [list(g) for g in self.gauge_gaps], "tol": self.tol,
                "verdict": "pass" if self.passed else "fail", "failing_k": self.failing_k,
                "note": self.note}


def sequence_condition_e(seq_of_dists: Callable[[int], Distribution], mu0: Distribution,
                         gauges: GaugeSequence, K: int, n_max: int, tol: float = DEFAULT_TOL,
                         ns=None) -> SequenceConvergenceReport:
    """Tabulate the Lévy and gauge gaps of mu_n against mu_0; pass iff the gaps at n_max are <= tol."""
    ns = default_indices(n_max) if ns is None else sorted(set(int(n) for n in ns) | {n_max})
    gs = gauges.take(K)
    ref = []
    for k, g in enumerate(gs, 1):
        v = integrate_gauge(mu0, g)
        if not math.isfinite(v):
            raise OutsideDomain(f"limit law has a divergent integral of gauge {k}", index=k)
        ref.append(v)
    levy, gaps = [], [[] for _ in gs]
    for n in ns:
        mu = seq_of_dists(n)
        levy.append(levy_distance(mu, mu0).value)
        for k, g in enumerate(gs, 1):
            v = integrate_gauge(mu, g)
            if not math.isfinite(v):
                raise OutsideDomain(f"member n={n} has a divergent integral of gauge {k}", index=k)
            gaps[k - 1].append(abs(v - ref[k - 1]))
    failing = None
    if levy[-1] > tol:
        failing = 0
    else:
        for k in range(K):
            if gaps[k][-1] > tol:
                failing = k + 1
                break
    return SequenceConvergenceReport(tuple(ns), tuple(levy), tuple(tuple(g) for g in gaps),
                                     tol, failing is None, failing)


# ---------------------------------------------------------------- parametric


@dataclass(frozen=True)
class Probe:
    """A parameter sequence theta_n -> theta0."""

    theta0: float
    path: Callable[[int], float]
    label: str = ""


def shift_probe(theta0: float) -> Probe:
    return Probe(theta0, lambda n: theta0 + 1.0 / n, f"{theta0}+1/n")


def scale_probe(theta0: float) -> Probe:
    return Probe(theta0, lambda n: theta0 * (1.0 + 1.0 / n), f"{theta0}(1+1/n)")


def constant_probe(theta0: float) -> Probe:
    return Probe(theta0, lambda n: theta0, f"{theta0}")


@dataclass(frozen=True)
class WsetReport:
    probes: tuple
    injectivity_min: float
    injectivity_floor: float
    passed: bool
    note: str = SURROGATE_NOTE

    def to_dict(self):
        return {"probes": [p.to_dict() for p in self.probes], "injectivity_min": self.injectivity_min,
                "injectivity_floor": self.injectivity_floor,
                "verdict": "pass" if self.passed else "fail", "note": self.note}


def parametric_wset_check(family: Callable[[float], Distribution], gauges: GaugeSequence, K: int,
                          probes: Sequence[Probe], grid: Sequence[float] = (), n_max: int = 100,
                          tol: float = DEFAULT_TOL, floor: float = 1e-4, ns=None) -> WsetReport:
    """Run the sequence check along each probe, plus an injectivity surrogate on ``grid``.

    Distinct grid parameters must give laws at Lévy distance above ``floor``;
    together with the probes this stands in for "weak convergence of the laws
    forces convergence of the parameters".
    """
    reports = []
    for p in probes:
        reports.append(sequence_condition_e(lambda n, p=p: family(p.path(n)), family(p.theta0),
                                            gauges, K, n_max, tol, ns))
    grid = sorted(set(float(t) for t in grid))
    laws = [family(t) for t in grid]
    dmin = math.inf
    for i in range(len(laws)):
        for j in range(i + 1, len(laws)):
            dmin = min(dmin, levy_distance(laws[i], laws[j]).value)
    ok = all(r.passed for r in reports) and (dmin > floor)
    return WsetReport(tuple(reports), dmin, floor, ok)
