"""One-parameter log-density models used by the likelihood functionals and gauges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class ParametricModel:
    """A family theta -> f_theta on the real line, given by its log density.

    ``logpdf(theta, x)`` and ``score(theta, x)`` (derivative in theta) must be
    vectorized in ``x``. The log density is evaluated by its formula on all of
    R, which keeps ``|log f_theta|`` a finite continuous gauge even off the
    support of the family.
    """

    name: str
    logpdf: Callable
    score: Callable
    domain: tuple = (0.0, np.inf)
    family: Callable | None = None
    concave_in_theta: bool = True

    def distribution(self, theta):
        if self.family is None:
            raise NotImplementedError(f"{self.name} has no distribution constructor")
        return self.family(theta)

    def __repr__(self):
        return f"ParametricModel({self.name!r})"


def _exp_logpdf(theta, x):
    return -np.log(theta) - np.asarray(x, dtype=float) / theta


def _exp_score(theta, x):
    return -1.0 / theta + np.asarray(x, dtype=float) / theta ** 2


def _gumbel_logpdf(a, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.log(a) - a * x - np.exp(-a * x)


def _gumbel_score(a, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return 1.0 / a - x + x * np.exp(-a * x)


def _exp_family(theta):
    from wsetlab.dist import Exponential

    return Exponential(theta)


def _gumbel_family(a):
    from wsetlab.dist import Gumbel

    return Gumbel(a)


# Concave in 1/theta but not in theta: the second derivative of
# -log(theta) - x/theta is negative only for theta < 2x.
EXPONENTIAL = ParametricModel("exponential", _exp_logpdf, _exp_score,
                              family=_exp_family, concave_in_theta=False)
GUMBEL = ParametricModel("gumbel", _gumbel_logpdf, _gumbel_score, family=_gumbel_family)

MODELS = {"exponential": EXPONENTIAL, "gumbel": GUMBEL}


def model_from_name(name: str) -> ParametricModel:
    try:
        return MODELS[name]
    except KeyError:
        from wsetlab._schema import ConfigError

        raise ConfigError("model", f"unknown model {name!r}") from None
