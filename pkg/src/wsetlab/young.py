"""Finite Young functions: convex, nondecreasing, zero at zero, unbounded."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class Delta2(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


class YoungFunction:
    """Base class. Subclasses are frozen dataclasses evaluating on |x|."""

    delta2: Delta2 = Delta2.UNKNOWN

    def __call__(self, x):
        raise NotImplementedError

    def inverse(self, y: float) -> float:
        """Smallest x >= 0 with Psi(x) >= y."""
        if y <= 0:
            return 0.0
        hi = 1.0
        while self(hi) < y:
            hi *= 2.0
            if hi > 1e300:
                return math.inf
        return brentq(lambda t: float(self(t)) - y, 0.0, hi, xtol=1e-14, rtol=1e-14)

    def log(self, x):
        """log Psi(|x|), finite where Psi itself overflows."""
        with np.errstate(divide="ignore"):
            return np.log(self(x))

    def growth(self):
        """Asymptotic class of Psi(x) as x -> inf: ('poly', p) or ('exp', lam, alpha)."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerOverP(YoungFunction):
    """x**p / p with p >= 1."""

    p: float
    delta2: Delta2 = field(default=Delta2.HOLDS, init=False, repr=False)

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"PowerOverP requires p >= 1, got {self.p}")

    def __call__(self, x):
        return np.abs(x) ** self.p / self.p

    def inverse(self, y):
        return 0.0 if y <= 0 else (self.p * y) ** (1.0 / self.p)

    def growth(self):
        return ("poly", self.p)

    def to_dict(self):
        return {"form": "power_over_p", "p": self.p}


@dataclass(frozen=True)
class Linear(YoungFunction):
    delta2: Delta2 = field(default=Delta2.HOLDS, init=False, repr=False)

    def __call__(self, x):
        return np.abs(x) * 1.0

    def inverse(self, y):
        return max(float(y), 0.0)

    def growth(self):
        return ("poly", 1.0)

    def to_dict(self):
        return {"form": "linear"}


@dataclass(frozen=True)
class ExponentialYoung(YoungFunction):
    """exp((x + s)**beta) - exp(s**beta), beta in (0, 1].

    For beta < 1 the plain exp(x**beta) - 1 is concave near zero; shifting by
    s = ((1 - beta)/beta)**(1/beta), the inflection point, restores convexity
    without changing the growth class. beta = 1 gives exp(x) - 1.
    """

    beta: float = 1.0
    delta2: Delta2 = field(default=Delta2.FAILS, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError(f"ExponentialYoung requires beta in (0, 1], got {self.beta}")

    @property
    def shift(self) -> float:
        b = self.beta
        return 0.0 if b == 1 else ((1 - b) / b) ** (1 / b)

    def __call__(self, x):
        s = self.shift
        with np.errstate(over="ignore"):
            if s == 0.0:
                return np.expm1(np.abs(x))
            return np.exp((np.abs(x) + s) ** self.beta) - math.exp(s ** self.beta)

    def log(self, x):
        # exp(z) - exp(z0) = exp(z) (1 - exp(z0 - z)) with z = (|x| + s)**beta
        s = self.shift
        z = (np.abs(np.asarray(x, dtype=float)) + s) ** self.beta
        with np.errstate(divide="ignore"):
            return z + np.log(-np.expm1(s ** self.beta - z))

    def inverse(self, y):
        if y <= 0:
            return 0.0
        s = self.shift
        return max(math.log(y + math.exp(s ** self.beta)) ** (1 / self.beta) - s, 0.0)

    def growth(self):
        return ("exp", 1.0, self.beta)

    def to_dict(self):
        return {"form": "exponential", "beta": self.beta}


@dataclass(frozen=True)
class ScaledYoung(YoungFunction):
    """x -> base(c * x); a Young function whenever ``base`` is one."""

    base: YoungFunction
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "delta2", self.base.delta2)

    def __call__(self, x):
        return self.base(self.c * np.abs(x))

    def log(self, x):
        return self.base.log(self.c * np.abs(x))

    def inverse(self, y):
        return self.base.inverse(y) / self.c

    def growth(self):
        g = self.base.growth()
        if g is not None and g[0] == "exp":
            return ("exp", g[1] * self.c ** g[2], g[2])
        return g

    def to_dict(self):
        return {"form": "scaled", "base": self.base.to_dict(), "c": self.c}


@dataclass(frozen=True, eq=False)
class CustomYoung(YoungFunction):
    """User-supplied evaluator; convexity is the caller's declaration."""

    fn: Callable
    name: str = "custom"
    delta2: Delta2 = Delta2.UNKNOWN

    def __call__(self, x):
        return self.fn(np.abs(x))

    def to_dict(self):
        return {"form": "custom", "name": self.name}


def young_from_dict(d: dict) -> YoungFunction:
    from wsetlab._schema import strict

    form = d.get("form")
    if form == "power_over_p":
        strict(d, {"form", "p"}, "young")
        return PowerOverP(float(d["p"]))
    if form == "linear":
        strict(d, {"form"}, "young")
        return Linear()
    if form == "exponential":
        strict(d, {"form"}, "young", optional={"beta"})
        return ExponentialYoung(float(d.get("beta", 1.0)))
    if form == "scaled":
        strict(d, {"form", "base", "c"}, "young")
        return ScaledYoung(young_from_dict(d["base"]), float(d["c"]))
    from wsetlab._schema import ConfigError

    raise ConfigError("young.form", f"unknown Young function form {form!r}")
