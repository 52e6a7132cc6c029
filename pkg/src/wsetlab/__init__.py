"""Weak and gauge-weak topologies, w-sets and qualitative robustness of plug-in estimators."""

from wsetlab.dist import (Dirac, Distribution, Empirical, Exponential, Gamma, Gumbel, Mixture, Normal,
                          Pareto, integrate_gauge, mixture, sample)
from wsetlab.errors import (BracketFailure, DomainError, EmptyDomain, GaugeOverflow, InvalidGauge,
                            OutsideDomain, QuadratureFailure, TooLarge, UnsupportedCoupling, WsetlabError)
from wsetlab.functionals import (Mean, MleExponential, MleGumbel, MleModel, Risk, functional_from_dict,
                                 plug_in)
from wsetlab.gauge import (AbsLogDensity, Constant1, ConstantSequence, ExpLadder, ExpPower, LogDensityEnumeration,
                           Power, PowerLadder, Scaled, YoungScaled, eval_gauge)
from wsetlab.metrics import levy_distance, prohorov_distance, prohorov_distance_finite, psi_metric
from wsetlab.risk import AVaR, Distortion, OneSidedMoment, Shortfall, luxemburg_norm, quantile_gap_norm

__all__ = [
    "Dirac", "Distribution", "Empirical", "Exponential", "Gamma", "Gumbel", "Mixture", "Normal",
    "Pareto", "integrate_gauge", "mixture", "sample", "BracketFailure", "DomainError",
    "EmptyDomain", "GaugeOverflow", "InvalidGauge", "OutsideDomain", "QuadratureFailure",
    "TooLarge", "UnsupportedCoupling", "WsetlabError", "Mean", "MleExponential", "MleGumbel",
    "MleModel", "Risk", "functional_from_dict", "plug_in", "AbsLogDensity", "Constant1",
    "ConstantSequence", "ExpLadder", "ExpPower", "LogDensityEnumeration", "Power", "PowerLadder",
    "Scaled", "YoungScaled", "eval_gauge", "levy_distance", "prohorov_distance",
    "prohorov_distance_finite", "psi_metric", "AVaR", "Distortion", "OneSidedMoment", "Shortfall",
    "luxemburg_norm", "quantile_gap_norm",
]

__version__ = "0.1.0"
