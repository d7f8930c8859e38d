"""Filtering, likelihood, estimation and out-of-sample forecasting."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError, DomainError, NumericalError
from ..series import TimeSeries, as_array, require_same_length
from . import _kernels as K
from .models import ModelSpec, ParamVector, check_constraints, default_start, from_params, to_params
from .optimize import nelder_mead

logger = logging.getLogger(__name__)

MIN_FIT_LENGTH = 200


class FilterState(NamedTuple):
    """Last observed values needed to continue a recursion."""

    residual: float
    sigma_sq: float
    q: float
    exog: float


class VariancePath(NamedTuple):
    sigma_sq: TimeSeries
    residuals: TimeSeries
    q: TimeSeries | None

    def final_state(self, exog_last: float = 0.0) -> FilterState:
        qv = self.q.values[-1] if self.q is not None else 0.0
        return FilterState(float(self.residuals.values[-1]), float(self.sigma_sq.values[-1]),
                           float(qv), float(exog_last))


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 2000
    tol: float = 1e-8
    restarts: int = 5
    seed: int = 0
    jitter: float = 0.5


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    params: ParamVector
    in_sample_nllh: float
    converged: bool
    iterations: int
    restarts_used: int
    sigma0_sq: float
    n_in: int = 0
    exog_scale: float = 1.0
    exog_name: str | None = None
    start_nllh: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "model": self.spec.name,
            "params": self.params.to_dict(),
            "in_sample_nllh": self.in_sample_nllh,
            "converged": self.converged,
            "iterations": self.iterations,
            "restarts_used": self.restarts_used,
            "sigma0_sq": self.sigma0_sq,
            "n_in": self.n_in,
            "exog_scale": self.exog_scale,
            "exog_name": self.exog_name,
            "start_nllh": list(self.start_nllh),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        spec = ModelSpec(**d["spec"])
        return cls(spec, ParamVector(**d["params"]), float(d["in_sample_nllh"]),
                   bool(d["converged"]), int(d["iterations"]), int(d["restarts_used"]),
                   float(d["sigma0_sq"]), int(d.get("n_in", 0)), float(d.get("exog_scale", 1.0)),
                   d.get("exog_name"), tuple(d.get("start_nllh", ())))


def _inputs(spec: ModelSpec, returns, exog):
    r = as_array(returns)
    if spec.exogenous:
        if exog is None:
            raise ArgumentError(f"{spec.name} needs an exogenous series")
        x = as_array(exog)
        require_same_length(r, x, ("returns", "exog"))
        if not np.all(np.isfinite(x)):
            raise DomainError("exogenous series contains non-finite values")
    else:
        if exog is not None:
            raise ArgumentError(f"{spec.name} takes no exogenous series")
        x = np.zeros_like(r)
    return r, x


def _wrap(like, values):
    if isinstance(like, TimeSeries):
        return like.with_values(values)
    return TimeSeries(values)


def filter(spec: ModelSpec, params: ParamVector, returns, exog=None,
           sigma0_sq: float | None = None, initial: FilterState | None = None) -> VariancePath:
    """Conditional variance path for fixed parameters.

    ``sigma_sq[0]`` is ``sigma0_sq`` (default: sample variance of the returns)
    unless ``initial`` carries the state from an earlier segment, in which case
    the recursion simply continues.  ``sigma_sq[t]`` uses ``exog[t-1]``.
    """
    check_constraints(spec, params)
    r, x = _inputs(spec, returns, exog)
    eps = r - params.mu
    if sigma0_sq is None:
        sigma0_sq = float(np.var(r)) if r.size else 1.0
    if not sigma0_sq > 0:
        raise DomainError("sigma0_sq must be positive")
    sig2 = np.empty(r.size)
    q = np.empty(r.size)
    if initial is None:
        bad = K.recurse(spec.code, params.kernel_vector(), eps, x, float(sigma0_sq),
                        False, 0.0, 0.0, 0.0, 0.0, sig2, q)
    else:
        bad = K.recurse(spec.code, params.kernel_vector(), eps, x, 1.0, True,
                        *map(float, initial), sig2, q)
    if bad >= 0:
        raise NumericalError("variance recursion produced a non-positive or non-finite value", t=int(bad))
    qs = _wrap(returns, q) if spec.family == "CGARCH" else None
    return VariancePath(_wrap(returns, sig2), _wrap(returns, eps), qs)


def gaussian_nllh(residuals, sigma_sq) -> float:
    e, s = as_array(residuals), as_array(sigma_sq)
    return float(0.5 * np.sum(np.log(s) + e * e / s) + 0.5 * e.size * math.log(2.0 * math.pi))


def nllh(spec: ModelSpec, params: ParamVector, returns, exog=None,
         sigma0_sq: float | None = None) -> float:
    """Gaussian negative log-likelihood of the returns under the filtered variances."""
    path = filter(spec, params, returns, exog, sigma0_sq)
    return gaussian_nllh(path.residuals, path.sigma_sq)


# -- estimation --------------------------------------------------------------

def exog_scale_of(exog_in: np.ndarray) -> float:
    """In-sample mean used to standardize an exogenous signal (1 if it is zero)."""
    m = float(np.mean(exog_in)) if exog_in.size else 0.0
    return m if m > 0 and math.isfinite(m) else 1.0


def _objective(spec, r, x, s0, scale):
    code = spec.code
    sig2 = np.empty(r.size)
    q = np.empty(r.size)

    def f(u):
        try:
            p = to_params(spec, u, scale)
        except (OverflowError, ValueError, ZeroDivisionError):
            return np.inf
        th = p.kernel_vector()
        if not np.all(np.isfinite(th)):
            return np.inf
        val = K.nllh(code, th, r - p.mu, x, s0, sig2, q)
        return val if math.isfinite(val) else np.inf

    return f


def fit(spec: ModelSpec, returns, exog=None, options: FitOptions | None = None,
        base: "FitResult | None" = None, exog_name: str | None = None) -> FitResult:
    """Maximum-likelihood fit by multi-start Nelder-Mead on transformed parameters.

    The exogenous signal is divided by its mean before entering the
    recursion.  For an exogenous spec the nested model is fitted first (or
    taken from ``base``) and used as an extra start with ``gamma = 0``, so the
    extended fit is never worse in-sample than the nested one.  An
    identically zero signal leaves gamma unidentified; the nested fit is then
    returned with ``gamma = 0``.
    """
    opts = options or FitOptions()
    r, x = _inputs(spec, returns, exog)
    if r.size < MIN_FIT_LENGTH:
        raise ArgumentError(f"need at least {MIN_FIT_LENGTH} returns to fit, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise DomainError("returns contain non-finite values")
    if spec.exogenous and not np.any(x):
        # gamma is not identified: the extended model is the nested one at gamma = 0
        logger.info("%s: exogenous series is identically zero, using the nested fit", spec.name)
        if base is None:
            base = fit(spec.base(), r, None, opts)
        return FitResult(spec, ParamVector(**{**base.params.to_dict(), "gamma": 0.0}),
                         base.in_sample_nllh, base.converged, base.iterations, base.restarts_used,
                         base.sigma0_sq, n_in=r.size, exog_scale=1.0, exog_name=exog_name,
                         start_nllh=base.start_nllh)
    xs = exog_scale_of(x) if spec.exogenous else 1.0
    x = x / xs
    mean, var = float(np.mean(r)), float(np.var(r))
    if not var > 0:
        raise DomainError("returns have zero variance")
    scale = (mean, var)
    s0 = var
    f = _objective(spec, r, x, s0, scale)

    u_base = from_params(spec, default_start(spec, scale), scale)
    rng = np.random.default_rng(opts.seed)
    starts = [u_base] + [u_base + opts.jitter * rng.standard_normal(u_base.size)
                         for _ in range(max(opts.restarts, 1) - 1)]
    if spec.exogenous:
        if base is None:
            base = fit(spec.base(), r, None, opts)
        nested = ParamVector(**{**base.params.to_dict(), "gamma": 0.0})
        try:
            starts.append(from_params(spec, nested, scale))
        except (ValueError, ZeroDivisionError):
            logger.debug("nested start not representable, skipped")

    best, best_run, any_conv = None, None, False
    start_vals = []
    for u0 in starts:
        start_vals.append(f(u0))
        if not math.isfinite(start_vals[-1]):
            continue
        res = nelder_mead(f, u0, tol=opts.tol, max_iter=opts.max_iter)
        any_conv |= res.converged
        if best is None or res.fun < best.fun:
            best, best_run = res, res
    if best is None:
        raise NumericalError(f"{spec.name}: likelihood is not finite at any starting point")
    params = to_params(spec, best.x, scale)
    if not best_run.converged:
        logger.info("%s: best candidate did not meet the simplex tolerance", spec.name)
    return FitResult(spec, params, best.fun, any_conv, best.nit, len(starts), s0,
                     n_in=r.size, exog_scale=xs, exog_name=exog_name,
                     start_nllh=tuple(float(v) for v in start_vals))


def forecast_oos(fit_result: FitResult, full_returns, exog=None, split: int | None = None) -> VariancePath:
    """One-step-ahead variances for ``full_returns[split:]`` with fixed fitted parameters.

    The filter runs from the start of the series, so the in-sample segment
    only warms up the recursion; every ``sigma_sq[t]`` uses data up to ``t-1``.
    """
    spec = fit_result.spec
    r = as_array(full_returns)
    split = fit_result.n_in if split is None else int(split)
    if not 1 <= split <= r.size:
        raise ArgumentError(f"split {split} outside [1, {r.size}]")
    x = None
    if spec.exogenous:
        if exog is None:
            raise ArgumentError(f"{spec.name} needs an exogenous series")
        x = as_array(exog) / fit_result.exog_scale
    path = filter(spec, fit_result.params, r, x, fit_result.sigma0_sq)
    like = full_returns if isinstance(full_returns, TimeSeries) else TimeSeries(r)
    cut = lambda s: like.slice(split).with_values(s.values[split:])  # noqa: E731
    return VariancePath(cut(path.sigma_sq), cut(path.residuals),
                        cut(path.q) if path.q is not None else None)


def predictive_nllh(fit_result: FitResult, full_returns, exog=None, split: int | None = None) -> float:
    path = forecast_oos(fit_result, full_returns, exog, split)
    return gaussian_nllh(path.residuals, path.sigma_sq)


# -- simulation --------------------------------------------------------------

def simulate(spec: ModelSpec, params: ParamVector, n: int, exog=None, seed=0,
             burn: int = 1000, sigma0_sq: float | None = None) -> TimeSeries:
    """Simulate ``n`` returns with Gaussian innovations.

    ``exog`` (length ``n``) enters unscaled; ``burn`` extra steps run first
    with the exogenous term switched off in the burn-in window.
    """
    check_constraints(spec, params)
    if n <= 0:
        raise ArgumentError("n must be positive")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn)
    x = np.zeros(n + burn)
    if spec.exogenous:
        if exog is None:
            raise ArgumentError(f"{spec.name} needs an exogenous series")
        xe = as_array(exog)
        if xe.size != n:
            raise ArgumentError(f"exog has length {xe.size}, expected {n}")
        x[burn:] = xe
        if burn:
            x[:burn] = xe.mean()
    if sigma0_sq is None:
        sigma0_sq = _unconditional_guess(spec, params, float(x.mean()))
    sig2 = np.empty(n + burn)
    q = np.empty(n + burn)
    r = np.empty(n + burn)
    bad = K.simulate(spec.code, params.kernel_vector(), params.mu, z, x, sigma0_sq, sig2, q, r)
    if bad >= 0:
        raise NumericalError("simulation diverged", t=int(bad))
    return TimeSeries(r[burn:])


def _unconditional_guess(spec, p: ParamVector, xbar: float) -> float:
    g = p.gamma or 0.0
    if spec.family == "GARCH":
        return (p.omega + g * xbar) / (1.0 - p.alpha - p.beta)
    if spec.family == "CGARCH":
        return p.omega / (1.0 - p.rho_c) + g * xbar / (1.0 - p.alpha - p.beta)
    if spec.family == "EGARCH":
        return math.exp((p.omega + g * xbar) / (1.0 - p.beta))
    sd = (p.omega + g * xbar) / (1.0 - p.beta - (p.alpha + p.phi_t / 2) * K.ABS_MEAN)
    return sd * sd
