"""Bivariate normal mixture model of returns and volume (Tauchen-Pitts).

A latent count of information events ``I_t`` drives both series::

    r_t = sigma1 * sqrt(I_t) * z1_t
    v_t = mu2 * I_t + sigma2 * sqrt(I_t) * z2_t

The simulator doubles as a ground-truth generator for the dependence
estimators in :mod:`infovol.infoflow`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError
from .series import TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise ArgumentError("constant information rate must be >= 0")

    def draw(self, rng, n):
        return np.full(n, float(self.c))

    @property
    def variance(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Poisson:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ArgumentError("Poisson rate must be > 0")

    def draw(self, rng, n):
        return rng.poisson(self.lam, n).astype(float)

    @property
    def variance(self) -> float:
        return float(self.lam)


@dataclass(frozen=True)
class LogNormal:
    m: float
    s: float

    def __post_init__(self):
        if not self.s >= 0:
            raise ArgumentError("lognormal shape s must be >= 0")

    def draw(self, rng, n):
        return np.exp(self.m + self.s * rng.standard_normal(n))

    @property
    def variance(self) -> float:
        s2 = self.s * self.s
        return math.expm1(s2) * math.exp(2.0 * self.m + s2)


@dataclass(frozen=True)
class MdhParams:
    sigma1: float
    mu2: float
    sigma2: float
    info_process: Constant | Poisson | LogNormal = Poisson(1.0)
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0 and self.mu2 > 0):
            raise ArgumentError("sigma1, mu2 and sigma2 must all be positive")
        if self.n <= 0:
            raise ArgumentError("n must be a positive integer")
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["info_process"] = {"kind": type(self.info_process).__name__.lower(),
                             **asdict(self.info_process)}
        return d


class MdhSample(NamedTuple):
    returns: TimeSeries
    volume: TimeSeries
    info: TimeSeries


def simulate(params: MdhParams) -> MdhSample:
    """Draw one sample path; identical params (incl. seed) give identical output."""
    n = params.n
    rng = np.random.default_rng(params.seed)
    info = params.info_process.draw(rng, n)
    z = rng.standard_normal((2, n))
    root = np.sqrt(info)
    r = params.sigma1 * root * z[0]
    v = params.mu2 * info + params.sigma2 * root * z[1]
    neg = np.count_nonzero(v < 0)
    if neg > 0.01 * n:
        logger.warning("%.1f%% of simulated volumes are negative; parameters look unrealistic",
                       100.0 * neg / n)
    return MdhSample(TimeSeries(r), TimeSeries(v), TimeSeries(info))


def theoretical_r2v_cov(params: MdhParams) -> float:
    """Cov(r_t^2, v_t) = sigma1^2 * mu2 * Var(I_t)."""
    return params.sigma1 ** 2 * params.mu2 * params.info_process.variance
