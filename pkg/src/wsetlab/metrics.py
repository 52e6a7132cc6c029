"""Lévy, Prohorov and gauge-augmented metrics between laws on the line."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numba
import numpy as np

from wsetlab.dist import Distribution, integrate_gauge
from wsetlab.errors import OutsideDomain, QuadratureFailure, TooLarge
from wsetlab.gauge import GaugeSequence

DEFAULT_K = 20
LEVY_TOL = 1e-9
LEVY_GRID = 4096
PROHOROV_MAX_ATOMS = 5000


class Method(str, Enum):
    CLOSED_FORM = "ClosedForm"
    GRID_SCAN = "GridScan"
    STRASSEN_FLOW = "StrassenFlow"


@dataclass(frozen=True)
class MetricReport:
    value: float
    method: Method
    error_bound: float

    def to_dict(self):
        return {"value": self.value, "method": self.method.value, "error_bound": self.error_bound}


# ---------------------------------------------------------------- Lévy


def _levy_points(d: Distribution, n: int):
    pts, _ = d.atoms()
    if d.is_atomic:
        return pts, 0.0
    u = (np.arange(n) + 0.5) / n
    tails = np.geomspace(1e-12, 0.5 / n, 24)
    u = np.concatenate([tails, u, 1.0 - tails])
    return np.concatenate([np.asarray(d.quantile(u), dtype=float), pts]), 1.0 / n + 2e-12


def _levy_feasible(Fm, Fn, base, eps, slack=0.0):
    # With y = x - eps the conditions read F_m(y) - eps <= F_n(y + eps) and
    # F_n(x) <= F_m(x + eps) + eps. Both left sides jump at atoms, so the
    # points themselves are checked; never form (p + eps) - eps, which can
    # round below p and hide the jump.
    ys = np.concatenate([base, base - eps])
    if np.any(Fm(ys) - eps > Fn(ys + eps) + slack):
        return False
    return not np.any(Fn(ys) > Fm(ys + eps) + eps + slack)


def levy_distance(mu: Distribution, nu: Distribution, tol: float = LEVY_TOL,
                  grid: int = LEVY_GRID) -> MetricReport:
    """inf{eps : F_mu(x-eps) - eps <= F_nu(x) <= F_mu(x+eps) + eps for all x}.

    Violations of right-continuous step functions can only appear at jump
    points, so for atomic laws the candidate set (atoms shifted by 0, +-eps)
    is exhaustive; the bisection result is then snapped to an exact value.
    Continuous parts are scanned on a quantile grid of both laws.
    """
    pm, em = _levy_points(mu, grid)
    pn, en = _levy_points(nu, grid)
    base = np.unique(np.concatenate([pm, pn]))
    Fm, Fn = mu.cdf, nu.cdf
    lo, hi = 0.0, 1.0
    if _levy_feasible(Fm, Fn, base, 0.0):
        hi = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _levy_feasible(Fm, Fn, base, mid):
            hi = mid
        else:
            lo = mid
    grid_err = em + en
    if grid_err == 0:
        snapped = _levy_snap(mu, nu, Fm, Fn, base, lo, hi)
        if snapped is not None:
            return MetricReport(snapped, Method.CLOSED_FORM, 0.0)
    return MetricReport(hi, Method.GRID_SCAN, tol + grid_err)


LEVY_SNAP_MAX = 4_000_000
LEVY_SNAP_SLACK = 1e-12


def _levy_snap(mu, nu, Fm, Fn, base, lo, hi):
    """Exact value for two atomic laws.

    Tightness occurs either when a shifted jump meets a jump (eps is a gap
    between atoms) or on a flat stretch (eps is a difference of cdf levels),
    so the smallest feasible candidate in the bisection bracket is the
    distance.
    """
    if hi == 0.0:
        return 0.0
    (pm, wm), (pn, wn) = mu.atoms(), nu.atoms()
    if pm.size * pn.size > LEVY_SNAP_MAX:
        return None
    lm = np.concatenate([[0.0], np.cumsum(wm)])
    ln = np.concatenate([[0.0], np.cumsum(wn)])
    cand = np.concatenate([np.abs(pm[:, None] - pn[None, :]).ravel(),
                           np.abs(lm[:, None] - ln[None, :]).ravel(), [1.0]])
    pad = 4 * (hi - lo) + 1e-12
    cand = np.unique(cand[(cand >= lo - pad) & (cand <= hi + pad)])
    for c in cand:
        # candidates are differences of summed masses, so allow rounding slack
        if _levy_feasible(Fm, Fn, base, float(c), slack=LEVY_SNAP_SLACK):
            return float(min(c, 1.0))
    return None


# ---------------------------------------------------------------- Prohorov


@numba.njit(cache=True)
def _greedy_flow(x, px, y, qy, d):
    """Max flow from atoms x (masses px) to atoms y (capacities qy) along |x-y| <= d.

    Both supports sorted; neighbourhoods are intervals whose ends move right
    with x, so serving each x leftmost-first is optimal.
    """
    cap = qy.copy()
    m = y.size
    p = 0
    flow = 0.0
    for i in range(x.size):
        xi = x[i]
        while p < m and (cap[p] <= 0.0 or (y[p] < xi and xi - y[p] > d)):
            p += 1
        r = px[i]
        j = p
        while r > 0.0 and j < m and (y[j] <= xi or y[j] - xi <= d):
            if cap[j] > 0.0 and abs(y[j] - xi) <= d:
                t = min(r, cap[j])
                cap[j] -= t
                r -= t
                flow += t
            j += 1
    return flow


# Masses are summed in floating point, so a complete transport can leave a
# deficiency of a few ulps; anything below this counts as zero.
FLOW_SLACK = 1e-12


def _deficiency(x, px, y, qy, d):
    v = 1.0 - _greedy_flow(x, px, y, qy, d)
    return 0.0 if v <= FLOW_SLACK else v


EXACT_MASS_ATOMS = 256


def _exact_one_way(x, px, y, qy, d):
    # the greedy flow again, on Fractions; float inputs convert exactly
    cap = [Fraction(v) for v in qy]
    flow = Fraction(0)
    p, m = 0, len(y)
    for i in range(len(x)):
        xi = x[i]
        while p < m and (cap[p] <= 0 or (y[p] < xi and xi - y[p] > d)):
            p += 1
        r = Fraction(px[i])
        j = p
        while r > 0 and j < m and (y[j] <= xi or y[j] - xi <= d):
            if cap[j] > 0 and abs(y[j] - xi) <= d:
                t = min(r, cap[j])
                cap[j] -= t
                r -= t
                flow += t
            j += 1
    return sum((Fraction(v) for v in px), Fraction(0)) - flow


def _deficiency_exact(x, px, y, qy, d):
    """max over sets A of mu(A) - nu(A^d), symmetrised, rounded once to float."""
    return float(max(_exact_one_way(x, px, y, qy, d), _exact_one_way(y, qy, x, px, d), Fraction(0)))


def _largest_critical(x, y, bound):
    """Largest |x_i - y_j| not exceeding ``bound``."""
    j = np.searchsorted(y, x)
    best = 0.0
    for off in (-2, -1, 0, 1):
        jj = np.clip(j + off, 0, y.size - 1)
        gaps = np.abs(y[jj] - x)
        gaps = gaps[gaps <= bound]
        if gaps.size:
            best = max(best, float(gaps.max()))
    # the far end of each window also produces a critical distance
    for sign in (-1.0, 1.0):
        jj = np.searchsorted(y, x + sign * bound, side="right" if sign > 0 else "left")
        for off in (-1, 0):
            k = np.clip(jj + off, 0, y.size - 1)
            gaps = np.abs(y[k] - x)
            gaps = gaps[gaps <= bound]
            if gaps.size:
                best = max(best, float(gaps.max()))
    return best


def prohorov_distance_finite(mu: Distribution, nu: Distribution,
                             max_atoms: int = PROHOROV_MAX_ATOMS) -> MetricReport:
    """Exact Prohorov distance between finite-support laws.

    pi <= eps iff the deficiency delta(eps) = 1 - maxflow(|x - y| <= eps) is
    at most eps. delta is a nonincreasing step function jumping only at the
    pairwise distances, so after bisection the answer is snapped to either a
    pairwise distance or a deficiency value.
    """
    if not (mu.is_atomic and nu.is_atomic):
        raise TypeError("prohorov_distance_finite needs finite-support laws")
    x, px = (np.ascontiguousarray(a, dtype=float) for a in mu.atoms())
    y, qy = (np.ascontiguousarray(a, dtype=float) for a in nu.atoms())
    if max(x.size, y.size) > max_atoms:
        raise TooLarge(f"support sizes {x.size}, {y.size} exceed {max_atoms}")
    delta = lambda e: _deficiency(x, px, y, qy, e)  # noqa: E731
    if delta(0.0) <= 0.0:
        return MetricReport(0.0, Method.STRASSEN_FLOW, 0.0)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if delta(mid) <= mid:
            hi = mid
        else:
            lo = mid
    if max(x.size, y.size) <= EXACT_MASS_ATOMS:
        # final masses in rational arithmetic: the result is correctly rounded
        delta = lambda e: _deficiency_exact(x, px, y, qy, e)  # noqa: E731
    d_hi = _largest_critical(x, y, hi)
    best = max(d_hi, delta(hi))
    dl = delta(lo)
    if lo < dl < d_hi:
        best = min(best, dl)
    return MetricReport(min(best, 1.0), Method.STRASSEN_FLOW, 1e-12)


def prohorov_distance(mu: Distribution, nu: Distribution) -> MetricReport:
    """Exact for finite supports; otherwise the Lévy distance, a lower bound on the line."""
    if mu.is_atomic and nu.is_atomic:
        return prohorov_distance_finite(mu, nu)
    return levy_distance(mu, nu)


def total_variation(mu: Distribution, nu: Distribution) -> float:
    """Half L1 distance between atom weights of finite-support laws."""
    x, px = mu.atoms()
    y, qy = nu.atoms()
    pts = np.union1d(x, y)
    a = np.zeros(pts.size)
    b = np.zeros(pts.size)
    a[np.searchsorted(pts, x)] = px
    b[np.searchsorted(pts, y)] = qy
    return 0.5 * float(np.abs(a - b).sum())


# ---------------------------------------------------------------- composite


def gauge_gap(mu: Distribution, nu: Distribution, g, k: int | None = None) -> float:
    try:
        im, iv = integrate_gauge(mu, g), integrate_gauge(nu, g)
    except QuadratureFailure:
        raise
    if not (math.isfinite(im) and math.isfinite(iv)):
        raise OutsideDomain(f"gauge {g} has a divergent integral", index=k)
    return abs(im - iv)


def psi_metric(mu: Distribution, nu: Distribution, seq: GaugeSequence,
               K: int = DEFAULT_K) -> MetricReport:
    """Lévy distance plus sum_{k<=K} 2**-k * min(|int psi_k dmu - int psi_k dnu|, 1)."""
    levy = levy_distance(mu, nu)
    total = levy.value
    for k in range(1, K + 1):
        total += 2.0 ** -k * min(gauge_gap(mu, nu, seq(k), k), 1.0)
    return MetricReport(total, levy.method, levy.error_bound + 2.0 ** -K)
