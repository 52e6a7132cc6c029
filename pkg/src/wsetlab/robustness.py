"""Monte Carlo estimates of the Prohorov distance between estimator laws.

For a plug-in estimator T_n and laws mu, nu the quantity of interest is
pi(law of T_n under mu, law of T_n under nu), uniformly in n. Replication r
always draws from stream r, so the base and contaminated runs share their
uniforms (paired seeds) and results do not depend on scheduling. Paths only
probe explicit directions: a large distance is conclusive evidence against
robustness, a small one is evidence for it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from wsetlab.dist import (FAMILIES, Dirac, Distribution, Empirical, mixture, parametric_family,
                          sample_matrix)
from wsetlab.errors import OutsideDomain
from wsetlab.frechet import AggregationMap, Coupling, FrechetSpec
from wsetlab.functionals import Mean, StatisticalFunctional, plug_in
from wsetlab.metrics import levy_distance, prohorov_distance_finite
from wsetlab.rng import uniforms

DEFAULT_N_GRID = (10, 31, 100, 316, 1000)
JACKKNIFE_BLOCKS = 20
MAX_FAILURE_RATE = 0.01

PATH_NOTE = ("explicit contamination paths only: separation is conclusive evidence of "
             "non-robustness, closeness is evidence of robustness")


# ---------------------------------------------------------------- data sources


class Source:
    """Anything that can produce an (R, n) matrix of observations per stream."""

    def draw_matrix(self, seed: int, streams, n: int) -> np.ndarray:
        raise NotImplementedError


def _draw(source, seed, streams, n):
    if isinstance(source, Distribution):
        return sample_matrix(source, seed, streams, n)
    return source.draw_matrix(seed, streams, n)


@dataclass(frozen=True, eq=False)
class AggregatedLaw(Source):
    """Law of A(Y) when each observation uses ``other`` with probability t, else ``base``.

    Both couplings share the marginals. The selection uses its own uniform
    channel, so t = 0 reproduces the base-coupled observations exactly.
    """

    marginals: tuple
    A: AggregationMap
    base: Coupling
    other: Coupling
    t: float

    def draw_matrix(self, seed, streams, n):
        b = FrechetSpec(self.marginals, self.base)
        o = FrechetSpec(self.marginals, self.other)
        rows = []
        for s in streams:
            x = self.A(b.sample(seed, s, n))
            if self.t > 0:
                pick = uniforms(seed, s, n, channel=2) < self.t
                if pick.any():
                    x = np.where(pick, self.A(o.sample(seed, s, n)), x)
            rows.append(x)
        return np.stack(rows)


# ---------------------------------------------------------------- paths


class ContaminationPath:
    kind = ""

    def at(self, t: float):
        raise NotImplementedError

    def base(self):
        return self.at(0.0)


@dataclass(frozen=True, eq=False)
class WithinFamily(ContaminationPath):
    """t -> family(theta0 + slope * t); ``fixed`` holds the remaining parameters."""

    family: str
    theta0: float
    slope: float
    fixed: tuple = ()
    kind = "within_family"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    def at(self, t):
        return parametric_family(self.family, self.theta0 + self.slope * t, dict(self.fixed))


@dataclass(frozen=True, eq=False)
class PointMass(ContaminationPath):
    """t -> (1 - t) mu + t delta_c."""

    mu: Distribution
    c: float
    kind = "point_mass"

    def at(self, t):
        return self.mu if t == 0 else mixture([(1.0 - t, self.mu), (t, Dirac(self.c))])


@dataclass(frozen=True, eq=False)
class GeneralMixture(ContaminationPath):
    """t -> (1 - t) mu + t nu."""

    mu: Distribution
    nu: Distribution
    kind = "general_mixture"

    def at(self, t):
        return self.mu if t == 0 else mixture([(1.0 - t, self.mu), (t, self.nu)])


@dataclass(frozen=True, eq=False)
class CouplingPath(ContaminationPath):
    """t -> observation-wise mixture of two couplings of fixed marginals, aggregated by A."""

    marginals: tuple
    A: AggregationMap
    base_coupling: Coupling
    other_coupling: Coupling
    kind = "coupling"

    def at(self, t):
        return AggregatedLaw(self.marginals, self.A, self.base_coupling, self.other_coupling, float(t))


# ---------------------------------------------------------------- estimator laws


@dataclass(frozen=True, eq=False)
class EstimatorLaw:
    values: np.ndarray  # per replication, nan where the plug-in failed
    failures: int

    @property
    def law(self) -> Empirical:
        v = self.values[np.isfinite(self.values)]
        return Empirical(v)


def estimator_law(T: StatisticalFunctional, source, n: int, R: int, seed: int,
                  max_failure_rate: float = MAX_FAILURE_RATE) -> EstimatorLaw:
    """R replications of the plug-in estimator on n observations; replication r uses stream r."""
    if n < 1 or R < 1:
        raise ValueError("n and R must be positive")
    x = _draw(source, seed, range(R), n)
    vals = np.asarray(T.batch(x), dtype=float)
    failures = int(np.count_nonzero(~np.isfinite(vals)))
    if failures > max_failure_rate * R:
        raise OutsideDomain(f"{failures} of {R} replications fell outside the domain of {T}")
    return EstimatorLaw(vals, failures)


def paired_prohorov(a: np.ndarray, b: np.ndarray, blocks: int = JACKKNIFE_BLOCKS):
    """(pi_hat, jackknife standard error) for paired replication vectors; nan entries dropped pairwise."""
    ok = np.isfinite(a) & np.isfinite(b)
    a, b = a[ok], b[ok]
    pi = prohorov_distance_finite(Empirical(a), Empirical(b)).value
    R = a.size
    if R < 2 * blocks:
        return pi, math.nan
    idx = np.arange(R)
    reps = np.empty(blocks)
    for k in range(blocks):
        keep = (idx * blocks // R) != k
        reps[k] = prohorov_distance_finite(Empirical(a[keep]), Empirical(b[keep])).value
    se = math.sqrt((blocks - 1) / blocks * float(np.sum((reps - reps.mean()) ** 2)))
    return pi, se


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class ProfileRow:
    n: int
    t: float
    pi_hat: float
    mc_se: float
    R: int
    failures: int

    def as_list(self):
        return [self.n, self.t, self.pi_hat, self.mc_se, self.R, self.failures]


@dataclass(frozen=True)
class RobustnessProfile:
    rows: tuple
    note: str = PATH_NOTE

    HEADER = ("n", "t", "pi_hat", "mc_se", "R", "failures")

    def sup_over_n(self) -> dict:
        out = {}
        for r in self.rows:
            out[r.t] = max(out.get(r.t, 0.0), r.pi_hat)
        return out

    def to_dict(self):
        return {"rows": [dict(zip(self.HEADER, r.as_list())) for r in self.rows],
                "sup_over_n": [{"t": t, "pi_hat": v} for t, v in sorted(self.sup_over_n().items())],
                "note": self.note}


def _profile_task(args):
    T, path, n, t_grid, R, seed = args
    base = estimator_law(T, path.at(0.0), n, R, seed)
    rows = []
    for t in t_grid:
        other = base if t == 0 else estimator_law(T, path.at(t), n, R, seed)
        pi, se = paired_prohorov(base.values, other.values)
        rows.append(ProfileRow(int(n), float(t), pi, se, R, other.failures))
    return rows


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("WSETLAB_THREADS")
    return max(1, int(env)) if env else 1


def robustness_profile(T: StatisticalFunctional, path: ContaminationPath, t_grid, n_grid=DEFAULT_N_GRID,
                       R: int = 2000, seed: int = 0, workers: int | None = None) -> RobustnessProfile:
    """pi_hat for every (n, t); the base law is path.at(0)."""
    tasks = [(T, path, int(n), tuple(float(t) for t in t_grid), R, seed) for n in n_grid]
    w = worker_count(workers)
    if w > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(w, len(tasks))) as ex:
            parts = list(ex.map(_profile_task, tasks))
    else:
        parts = [_profile_task(a) for a in tasks]
    rows = [r for part in parts for r in part]
    return RobustnessProfile(tuple(rows))


# ---------------------------------------------------------------- breakdown of the mean


@dataclass(frozen=True)
class BreakdownReport:
    ns: tuple
    levy: tuple
    means: tuple
    max_mean_deviation: float  # over every n up to n_check

    def to_dict(self):
        return {"ns": list(self.ns), "levy": list(self.levy), "means": list(self.means),
                "max_mean_deviation": self.max_mean_deviation}


def breakdown_sample(n: int) -> np.ndarray:
    """x_1 = n and x_i = 0 otherwise."""
    x = np.zeros(n)
    x[0] = n
    return x


def breakdown_demo_mean(ns=(10, 100, 1000, 10000), n_check: int = 10000) -> BreakdownReport:
    """Empirical laws converging weakly to delta_0 whose means stay at 1."""
    T = Mean()
    levy, means = [], []
    for n in ns:
        x = breakdown_sample(n)
        levy.append(levy_distance(Empirical(x), Dirac(0.0)).value)
        means.append(plug_in(T, x))
    dev = max(abs(plug_in(T, breakdown_sample(n)) - 1.0) for n in range(1, n_check + 1))
    return BreakdownReport(tuple(int(n) for n in ns), tuple(levy), tuple(means), dev)
