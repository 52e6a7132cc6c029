import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wsetlab.dist import Dirac, Exponential, Gumbel, Normal, Pareto
from wsetlab.errors import DomainError, InvalidGauge, OutsideDomain, UnsupportedCoupling
from wsetlab.frechet import (AggregateStopLoss, Comonotone, Countermonotone, FrechetSpec, GaussianCopula,
                             Identity, Independent, Max, StopLossSum, Sum, aggregation_from_dict,
                             aggregation_tail_bound, aggregation_ui_bound, coupling_from_dict,
                             sample_aggregate, sample_vectors)
from wsetlab.gauge import ConstantSequence, Power, PowerLadder, YoungScaled
from wsetlab.integrability import THRESHOLD_GRID
from wsetlab.young import Linear, PowerOverP

MAPS = [Sum(), Max(), StopLossSum((0.5, 1.0)), AggregateStopLoss(1.5)]
CORR = np.array([[1.0, 0.6], [0.6, 1.0]])
COUPLINGS_2D = [Independent(), Comonotone(), Countermonotone(), GaussianCopula(CORR)]


def kolmogorov(x, d):
    x = np.sort(x)
    F = np.asarray(d.cdf(x))
    n = x.size
    return max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(n) / n))


@pytest.mark.parametrize("coupling", COUPLINGS_2D, ids=lambda c: c.name)
def test_marginals_preserved(coupling):
    marg = (Exponential(1.0), Gumbel(2.0))
    y = sample_vectors(FrechetSpec(marg, coupling), 3, 0, 10_000)
    assert y.shape == (10_000, 2)
    for i, m in enumerate(marg):
        assert kolmogorov(y[:, i], m) <= 0.02


def test_three_dimensional_gaussian_copula_marginals():
    corr = np.array([[1, 0.3, -0.2], [0.3, 1, 0.5], [-0.2, 0.5, 1]], dtype=float)
    marg = (Normal(0.0, 1.0), Exponential(2.0), Pareto(3.0, 1.0))
    y = sample_vectors(FrechetSpec(marg, GaussianCopula(corr)), 1, 2, 10_000)
    for i, m in enumerate(marg):
        assert kolmogorov(y[:, i], m) <= 0.02


def test_comonotone_sum_of_exponentials():
    spec = FrechetSpec((Exponential(1.0), Exponential(1.0)), Comonotone())
    s = sample_aggregate(spec, Sum(), 7, 0, 100_000)
    assert abs(s.mean() - 2.0) < 0.03
    # law of 2 Exp(1) is Exp(2)
    assert kolmogorov(s.points.repeat(1), Exponential(2.0)) <= 0.01


def test_comonotone_quantile_additivity():
    marg = (Exponential(1.0), Normal(1.0, 2.0))
    y = sample_vectors(FrechetSpec(marg, Comonotone()), 5, 1, 100_000)
    s = np.sort(y.sum(axis=1))
    # every draw is F1(u) + F2(u) for one u, so sorted sums are sums of sorted coordinates
    assert np.array_equal(s, np.sort(y[:, 0]) + np.sort(y[:, 1]))
    # hence the sum's cdf at F1(u) + F2(u) is u, up to the sampling error of the uniforms
    u = np.linspace(0.05, 0.95, 19)
    want = marg[0].quantile(u) + marg[1].quantile(u)
    assert np.allclose(np.searchsorted(s, want, side="right") / s.size, u, atol=0.01)


def test_countermonotone_is_antitone():
    y = sample_vectors(FrechetSpec((Exponential(1.0), Exponential(1.0)), Countermonotone()), 0, 0, 500)
    order = np.argsort(y[:, 0])
    assert np.all(np.diff(y[order, 1]) <= 0)


@pytest.mark.parametrize("coupling", COUPLINGS_2D, ids=lambda c: c.name)
def test_dirac_marginals(coupling):
    spec = FrechetSpec((Dirac(1.0), Dirac(2.0)), coupling)
    s = sample_aggregate(spec, Sum(), 0, 0, 100)
    m = sample_aggregate(spec, Max(), 0, 0, 100)
    assert np.all(s.points == 3.0) and np.all(m.points == 2.0)


def test_countermonotone_needs_two_dimensions():
    with pytest.raises(UnsupportedCoupling):
        sample_vectors(FrechetSpec((Dirac(0.0),) * 3, Countermonotone()), 0, 0, 10)


def test_identity_has_no_scalar_image():
    with pytest.raises(DomainError):
        sample_aggregate(FrechetSpec((Dirac(0.0), Dirac(1.0)), Independent()), Identity(), 0, 0, 5)


@pytest.mark.parametrize("corr", [[[1, 2], [2, 1]], [[1, 0.5], [0.4, 1]], [[2, 0], [0, 1]], [[1, 0, 0]]])
def test_gaussian_copula_validation(corr):
    with pytest.raises(DomainError):
        GaussianCopula(np.asarray(corr, dtype=float))


def test_sampling_reproducible():
    spec = FrechetSpec((Exponential(1.0), Gumbel(1.0)), GaussianCopula(CORR))
    assert np.array_equal(spec.sample(4, 2, 50), spec.sample(4, 2, 50))
    assert not np.array_equal(spec.sample(4, 2, 50), spec.sample(4, 3, 50))


@pytest.mark.parametrize("A", MAPS, ids=lambda A: A.name)
def test_lipschitz_certificate(A):
    rng = np.random.default_rng(0)
    x = rng.standard_cauchy((10_000, 2))
    b, c = A.lipschitz_bound
    assert np.all(np.abs(A(x)) <= b + c * np.abs(x).sum(axis=1) + 1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2))
def test_maps_by_hand(x):
    v = np.array(x)
    assert Sum()(v) == v.sum() and Max()(v) == v.max()
    assert StopLossSum((0.5, 1.0))(v) == max(v[0] - 0.5, 0) + max(v[1] - 1.0, 0)
    assert AggregateStopLoss(1.5)(v) == max(v.sum() - 1.5, 0)


# ---------------------------------------------------------------- uniform tail bound


def test_ui_bound_exponential_sum():
    spec = FrechetSpec((Exponential(1.0), Exponential(1.0)), Independent())
    rep = aggregation_ui_bound(spec, Sum(), YoungScaled(Linear()), 3, 0.01)
    assert rep.passed
    k1 = rep.per_k[0]
    # oracle: with psi(x) = |x| the bound is (2/3)(a + 3) e^{-a/3} + 2 a e^{-a/3}
    oracle = lambda a: (2 / 3) * (a + 3) * math.exp(-a / 3) + 2 * a * math.exp(-a / 3)  # noqa: E731
    want = next(a for a in THRESHOLD_GRID if oracle(a) <= 0.01)
    assert k1.threshold == want
    assert k1.sup_tail == pytest.approx(oracle(want), rel=1e-10)


def test_ui_bound_dirac_zero():
    spec = FrechetSpec((Dirac(0.0),) * 3, Comonotone())
    for A in MAPS:
        rep = aggregation_ui_bound(spec, A, PowerLadder(), 3)
        assert rep.passed and all(r.threshold == THRESHOLD_GRID[0] for r in rep.per_k)


def test_ui_bound_divergent_marginal():
    spec = FrechetSpec((Pareto(2.0, 1.0), Exponential(1.0)), Independent())
    with pytest.raises(OutsideDomain):
        aggregation_ui_bound(spec, Sum(), ConstantSequence(Power(3.0)), 1)


def test_ui_bound_rejects_non_convex_gauges():
    spec = FrechetSpec((Exponential(1.0), Exponential(1.0)), Independent())
    with pytest.raises(InvalidGauge):
        aggregation_ui_bound(spec, Sum(), ConstantSequence(Power(0.5)), 1)


@pytest.mark.parametrize("coupling", COUPLINGS_2D, ids=lambda c: c.name)
@pytest.mark.parametrize("A", MAPS, ids=lambda A: A.name)
def test_sampled_tail_below_bound(coupling, A):
    marg = (Exponential(1.0), Gumbel(1.0))
    spec = FrechetSpec(marg, coupling)
    for g in (Power(1.0), PowerLadder()(2), YoungScaled(PowerOverP(2.0))(2)):
        x = np.abs(sample_aggregate(spec, A, 11, 0, 20_000).points)
        psi = np.asarray(g(x))
        for a in (1.0, 4.0, 16.0, 64.0):
            tail = float(np.mean(np.where(psi >= a, psi, 0.0)))
            assert tail <= aggregation_tail_bound(marg, A, g, a) + 1e-6


def test_tail_bound_vanishes():
    # the a * P(Y >= a) part can grow at first, so only the limit is monotone
    marg = (Exponential(1.0), Exponential(2.0))
    vals = [aggregation_tail_bound(marg, Sum(), Power(2.0), a) for a in THRESHOLD_GRID[::8]]
    assert vals[-1] == 0.0 and max(vals[8:]) < 1e-5


# ---------------------------------------------------------------- literals


@pytest.mark.parametrize("c", COUPLINGS_2D, ids=lambda c: c.name)
def test_coupling_literal_round_trip(c):
    assert coupling_from_dict(c.to_dict()).to_dict() == c.to_dict()


@pytest.mark.parametrize("A", MAPS + [Identity()], ids=lambda A: A.name)
def test_map_literal_round_trip(A):
    assert aggregation_from_dict(A.to_dict()) == A
