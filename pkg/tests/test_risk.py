import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from wsetlab.dist import Dirac, Empirical, Exponential, Gamma, Normal, Pareto, mixture
from wsetlab.errors import OutsideDomain
from wsetlab.dist import integrate_gauge
from wsetlab.gauge import ConstantSequence
from wsetlab.gauge import Scaled as ScaledGauge
from wsetlab.metrics import psi_metric
from wsetlab.risk import (AVaR, Delta2, Distortion, ExponentialYoung, Linear, OneSidedMoment, PowerOverP,
                          ScaledYoung, Shortfall, eval_risk, luxemburg_norm, orlicz_heart_member,
                          quantile_gap_norm, risk_from_dict, sdwn_convergence, shortfall_blowup_sequence,
                          young_from_dict)

atoms = st.lists(st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 3)), min_size=1, max_size=10)
SPECS = [AVaR(0.1), AVaR(0.5), Distortion("power", 0.5), Shortfall(Linear(), 1.0),
         Shortfall(PowerOverP(2.0), 0.5), OneSidedMoment(2.0)]
YOUNGS = [PowerOverP(1.0), PowerOverP(2.0), PowerOverP(3.5), Linear(), ExponentialYoung(1.0),
          ExponentialYoung(0.5), ScaledYoung(PowerOverP(2.0), 3.0)]


# ---------------------------------------------------------------- Young functions


@pytest.mark.parametrize("young", YOUNGS)
def test_young_axioms(young):
    xs = np.linspace(0, 20, 401)
    v = np.asarray(young(xs), dtype=float)
    assert v[0] == 0.0
    assert np.all(np.diff(v) >= 0)
    # midpoint chord test on neighbouring triples
    assert np.all(v[1:-1] <= 0.5 * (v[:-2] + v[2:]) + 1e-12 * np.abs(v[1:-1]))
    assert young(1e6) > 1e5


@given(st.floats(1, 6), st.floats(0, 50), st.floats(0, 50))
def test_power_young_convex(p, x, y):
    Y = PowerOverP(p)
    assert Y(0.5 * (x + y)) <= 0.5 * (Y(x) + Y(y)) * (1 + 1e-12) + 1e-300


@pytest.mark.parametrize("young", YOUNGS[:5])
def test_young_inverse(young):
    for y in (0.1, 1.0, 7.5):
        assert float(young(young.inverse(y))) == pytest.approx(y, rel=1e-9)


def test_delta2_tags():
    assert PowerOverP(2).delta2 is Delta2.HOLDS and Linear().delta2 is Delta2.HOLDS
    assert ExponentialYoung(1.0).delta2 is Delta2.FAILS
    assert ScaledYoung(ExponentialYoung(1.0), 2.0).delta2 is Delta2.FAILS


def test_delta2_numerically():
    x = np.logspace(0, 2, 50)
    assert np.max(PowerOverP(3)(2 * x) / PowerOverP(3)(x)) == pytest.approx(8.0)
    r = ExponentialYoung(1.0)(2 * x) / ExponentialYoung(1.0)(x)
    assert r[-1] > 1e40


@pytest.mark.parametrize("bad", [lambda: PowerOverP(0.5), lambda: ExponentialYoung(1.5),
                                 lambda: ScaledYoung(Linear(), 0.0)])
def test_young_rejects_invalid(bad):
    with pytest.raises(ValueError):
        bad()


@pytest.mark.parametrize("young", YOUNGS)
def test_young_literal_round_trip(young):
    assert young_from_dict(young.to_dict()) == young


# ---------------------------------------------------------------- Orlicz heart


def test_orlicz_exponential_power():
    rep = orlicz_heart_member(Exponential(1.0), PowerOverP(2.0))
    assert rep.member
    # oracle: int (c x)^2 / 2 e^{-x} dx = c^2
    for c, v, _ in rep.per_probe:
        assert v == pytest.approx(c * c, rel=1e-9)


def test_orlicz_pareto_third_moment():
    rep = orlicz_heart_member(Pareto(2.0, 1.0), PowerOverP(3.0), probes=(1.0,))
    assert not rep.member and rep.per_probe[0][1] == math.inf


@pytest.mark.parametrize("young", YOUNGS)
def test_orlicz_dirac_always_member(young):
    assert orlicz_heart_member(Dirac(3.0), young).member


def test_orlicz_exponential_young():
    assert not orlicz_heart_member(Exponential(1.0), ExponentialYoung(1.0)).member
    assert orlicz_heart_member(Normal(0.0, 1.0), ExponentialYoung(1.0)).member


# ---------------------------------------------------------------- Luxemburg norm


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0, -2.0])
def test_luxemburg_dirac(c):
    assert luxemburg_norm(Dirac(c), Linear()) == abs(c)
    assert luxemburg_norm(Dirac(c), PowerOverP(2.0)) == pytest.approx(abs(c) / math.sqrt(2), abs=1e-8)


@pytest.mark.parametrize("young", YOUNGS)
def test_luxemburg_zero(young):
    assert luxemburg_norm(Dirac(0.0), young) == 0.0


def test_luxemburg_continuous():
    assert luxemburg_norm(Exponential(2.0), Linear()) == pytest.approx(2.0, rel=1e-10)
    # E X^2 / (2 lam^2) = 1 with E X^2 = 2 gives lam = 1
    assert luxemburg_norm(Exponential(1.0), PowerOverP(2.0)) == pytest.approx(1.0, rel=1e-8)
    # E[exp(X / lam)] - 1 = 1 / (lam - 1) = 1 gives lam = 2
    assert luxemburg_norm(Exponential(1.0), ExponentialYoung(1.0)) == pytest.approx(2.0, rel=1e-8)


@given(atoms, st.floats(0.1, 10))
def test_luxemburg_homogeneous(xs, s):
    mu, nu = Empirical(xs), Empirical([s * x for x in xs])
    for young in (Linear(), PowerOverP(2.0)):
        a, b = luxemburg_norm(mu, young), luxemburg_norm(nu, young)
        assert b == pytest.approx(s * a, rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------- risk functionals


@given(st.floats(-50, 50), st.sampled_from(SPECS))
def test_risk_of_constant(c, spec):
    want = {"avar": -c, "distortion": -c, "one_sided_moment": max(-c, 0.0) ** 2}.get(spec.kind)
    if isinstance(spec, Shortfall):
        # Psi((-c - m)^+) <= x0 iff m >= -c - Psi^{-1}(x0)
        want = -c - spec.loss.inverse(spec.x0)
    assert eval_risk(spec, Dirac(c)) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_avar_hand_case():
    assert eval_risk(AVaR(0.5), Empirical([-2.0, -1.0, 0.0, 1.0])) == 1.5
    assert AVaR(0.5).batch(np.array([[1.0, 0.0, -1.0, -2.0]]))[0] == 1.5


def test_avar_exponential_against_quantile_quadrature():
    for a in (0.05, 0.1, 0.5, 0.9):
        q = integrate.quad(lambda u: stats.expon.ppf(u, scale=2.0), 0, a)[0]
        assert eval_risk(AVaR(a), Exponential(2.0)) == pytest.approx(-q / a, rel=1e-9)


def test_avar_normal_against_closed_form():
    a = 0.1
    want = stats.norm.pdf(stats.norm.ppf(a)) / a
    assert eval_risk(AVaR(a), Normal(0.0, 1.0)) == pytest.approx(want, rel=1e-8)


def test_avar_needs_a_mean():
    with pytest.raises(OutsideDomain):
        eval_risk(AVaR(0.1), Pareto(0.9, 1.0))


@given(atoms, st.floats(0.05, 0.95))
def test_distortion_avar_matches_avar(xs, a):
    mu = Empirical(xs)
    assert eval_risk(Distortion("avar", a), mu) == pytest.approx(eval_risk(AVaR(a), mu), rel=1e-9, abs=1e-9)


def test_distortion_continuous_matches_avar():
    for mu in (Exponential(1.0), Normal(0.5, 2.0), Gamma(2.0, 1.0)):
        assert eval_risk(Distortion("avar", 0.2), mu) == pytest.approx(eval_risk(AVaR(0.2), mu), rel=1e-7)


def test_distortion_power_on_two_points():
    # g(u) = sqrt(u); F = 1/2 on [0, 1): the positive integral is (1 - sqrt(1/2)) * 1
    assert eval_risk(Distortion("power", 0.5), Empirical([0.0, 1.0])) == pytest.approx(-(1 - math.sqrt(0.5)))


@pytest.mark.parametrize("c", [0.0, 1.0, 5.0])
def test_shortfall_linear(c):
    assert eval_risk(Shortfall(Linear(), 1.0), Dirac(-c)) == pytest.approx(c - 1.0, abs=1e-12)


def test_shortfall_normal_law():
    # E[(-X - m)^+] = phi(m) - m (1 - Phi(m)) for X standard normal; solved independently
    from scipy.optimize import brentq
    x0 = 0.2
    want = brentq(lambda m: stats.norm.pdf(m) - m * stats.norm.sf(m) - x0, -10, 10, xtol=1e-15)
    assert eval_risk(Shortfall(Linear(), x0), Normal(0.0, 1.0)) == pytest.approx(want, rel=1e-8)


def test_one_sided_moment():
    assert eval_risk(OneSidedMoment(2.0), Empirical([-2.0, 1.0])) == 2.0
    assert eval_risk(OneSidedMoment(1.0), Exponential(1.0)) == 0.0
    assert eval_risk(OneSidedMoment(2.0), Normal(0.0, 1.0)) == pytest.approx(0.5, rel=1e-9)


@given(atoms, st.floats(0, 5), st.sampled_from(SPECS))
def test_monotone_under_dominance(xs, shift, spec):
    lower, upper = Empirical(xs), Empirical([x + shift for x in xs])
    assert eval_risk(spec, upper) <= eval_risk(spec, lower) + 1e-9


@given(atoms, st.lists(st.floats(0, 3), min_size=10, max_size=10), st.sampled_from(SPECS))
def test_monotone_under_pointwise_dominance(xs, bumps, spec):
    ys = [x + b for x, b in zip(xs, bumps)]
    assert eval_risk(spec, Empirical(ys)) <= eval_risk(spec, Empirical(xs)) + 1e-9


@given(atoms, st.floats(-20, 20), st.sampled_from([s for s in SPECS if s.kind != "one_sided_moment"]))
def test_cash_additivity(xs, m, spec):
    # gains convention: adding cash m lowers the risk by m
    base = eval_risk(spec, Empirical(xs))
    shifted = eval_risk(spec, Empirical([x + m for x in xs]))
    assert shifted == pytest.approx(base - m, rel=1e-9, abs=1e-8)


@given(st.lists(st.floats(-5, 5).map(lambda v: round(v, 2)), min_size=8, max_size=8),
       st.lists(st.floats(-5, 5).map(lambda v: round(v, 2)), min_size=8, max_size=8),
       st.floats(0, 1), st.floats(0.05, 0.95))
def test_avar_comonotone_additive(xs, ys, lam, a):
    qx, qy = np.sort(xs), np.sort(ys)
    mix = Empirical(lam * qx + (1 - lam) * qy)
    want = lam * eval_risk(AVaR(a), Empirical(qx)) + (1 - lam) * eval_risk(AVaR(a), Empirical(qy))
    assert eval_risk(AVaR(a), mix) == pytest.approx(want, rel=1e-9, abs=1e-9)


@given(atoms, st.sampled_from(SPECS))
def test_batch_matches_evaluate(xs, spec):
    assert spec.batch(np.array([xs]))[0] == pytest.approx(eval_risk(spec, Empirical(xs)), rel=1e-9, abs=1e-9)


def test_risk_continuity_along_passing_sequence():
    spec = Shortfall(PowerOverP(2.0), 1.0)
    base = eval_risk(spec, Normal(0.0, 1.0))
    errs = [abs(eval_risk(spec, Normal(0.0, 1 + 1 / n)) - base) for n in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(errs, errs[1:])) and errs[-1] < 1e-2


@pytest.mark.parametrize("spec", SPECS)
def test_risk_literal_round_trip(spec):
    assert risk_from_dict(spec.to_dict()) == spec


# ---------------------------------------------------------------- quantile coupling criterion


def test_sdwn_exponential():
    rep = sdwn_convergence(lambda n: Exponential(1 + 1 / n), Exponential(1.0), Linear(), 1000)
    for n, v in zip(rep.ns, rep.norms):
        assert v == pytest.approx(1 / n, abs=1e-6)
    assert rep.metrics[-1] < rep.metrics[0] and rep.metrics[-1] <= 0.02
    assert rep.norm_converges and rep.metric_converges and rep.consistent


def test_sdwn_identity():
    rep = sdwn_convergence(lambda n: Gamma(2.0, 1.5), Gamma(2.0, 1.5), PowerOverP(2.0), 50)
    assert all(v == 0 for v in rep.norms) and all(v <= 1e-9 for v in rep.metrics)


def test_sdwn_point_mass_escape():
    seq = lambda n: mixture([(1 - 1 / n, Dirac(0.0)), (1 / n, Dirac(float(n)))]) if n > 1 else Dirac(1.0)  # noqa: E731
    rep = sdwn_convergence(seq, Dirac(0.0), Linear(), 1000)
    assert all(v >= 1 - 1e-12 for v in rep.norms)
    assert not rep.norm_converges and not rep.metric_converges and rep.consistent


def test_quantile_gap_norm_two_empiricals():
    # sorted coupling: gaps |1-0|, |2-0|, |3-5| each with mass 1/3
    got = quantile_gap_norm(Empirical([1.0, 2.0, 3.0]), Empirical([0.0, 0.0, 5.0]), Linear())
    assert got == pytest.approx(5 / 3, rel=1e-12)


# ---------------------------------------------------------------- shortfall without Delta2


@pytest.mark.parametrize("n", [2, 5, 10, 20])
def test_shortfall_blowup(n):
    mu = shortfall_blowup_sequence(n)
    young = ExponentialYoung(1.0)
    assert integrate_gauge(mu, ScaledGauge(young, 1.0)) == pytest.approx((1 - math.exp(-n)) / n, rel=1e-9)
    pts, w = mu.atoms()
    scaled = Empirical(8 * pts, w)
    # oracle: p (exp(8n - m) - 1) = x0 with p = exp(-n)/n and x0 = 1
    want = 8 * n - math.log(n * math.exp(n) + 1)
    assert eval_risk(Shortfall(young, 1.0), scaled) == pytest.approx(want, rel=1e-9)


def test_shortfall_blowup_vanishes_in_the_single_gauge():
    young = ExponentialYoung(1.0)
    gauge = ConstantSequence(ScaledGauge(young, 1.0))
    gaps = [psi_metric(shortfall_blowup_sequence(n), Dirac(0.0), gauge, 1).value for n in (2, 10, 40)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.05


@pytest.mark.parametrize("m, sigma, c", [(0.0, 1.0, 1.0), (0.5, 2.0, 0.7), (-1.0, 0.5, 3.0)])
def test_exponential_young_normal_against_quadrature(m, sigma, c):
    # the integrand is negligible 40 standard deviations past its peak at m + c sigma^2
    lo, hi = m - 40 * sigma - c * sigma ** 2, m + 40 * sigma + c * sigma ** 2
    want = integrate.quad(lambda x: math.expm1(c * abs(x)) * stats.norm.pdf(x, m, sigma), lo, hi,
                          points=[0.0, m], epsabs=0, epsrel=1e-12, limit=400)[0]
    got = integrate_gauge(Normal(m, sigma), ScaledGauge(ExponentialYoung(1.0), c))
    assert got == pytest.approx(want, rel=1e-8)


def test_exponential_young_log_does_not_overflow():
    g = ScaledGauge(ExponentialYoung(1.0), 2.0)
    assert g.log(1000.0) == pytest.approx(2000.0)
    assert float(g.log(1.0)) == pytest.approx(math.log(math.expm1(2.0)))
    half = ExponentialYoung(0.5)
    assert float(half.log(3.0)) == pytest.approx(math.log(float(half(3.0))), rel=1e-12)
