"""Out-of-sample evaluation of volatility forecasts.

Mincer-Zarnowitz regression, Pearson correlation, likelihood-ratio test on
predictive NLLH, and the segment-bootstrap Kolmogorov-Smirnov comparison of a
model against its exogenous extension.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _special
from .errors import ArgumentError, DegenerateInputError, NumericalError, ReliabilityError
from .garchcore import FitOptions, ModelSpec, fit, forecast_oos, gaussian_nllh
from .series import TimeSeries, as_array, require_same_length

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class MzResult(NamedTuple):
    a: float
    b: float
    r_squared: float
    f_stat: float
    f_p: float
    n: int


class LrResult(NamedTuple):
    statistic: float
    df: int
    p_value: float
    raw_statistic: float


class KsResult(NamedTuple):
    statistic: float
    p_value: float


class PccResult(NamedTuple):
    rho: float
    p_value: float


@dataclass
class BootstrapComparison:
    base: str
    extended: str
    n_segments: int
    seg_train: int
    seg_test: int
    split_points: np.ndarray
    nllh_base: np.ndarray
    nllh_extended: np.ndarray
    ks_stat: float
    ks_p: float
    failed_segments: int = 0
    excluded_segments: int = 0
    used_split_points: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "base": self.base,
            "extended": self.extended,
            "n_segments": self.n_segments,
            "seg_train": self.seg_train,
            "seg_test": self.seg_test,
            "split_points": [int(s) for s in self.split_points],
            "used_split_points": [int(s) for s in self.used_split_points],
            "nllh_base": [float(v) for v in self.nllh_base],
            "nllh_extended": [float(v) for v in self.nllh_extended],
            "ks_stat": self.ks_stat,
            "ks_p": self.ks_p,
            "failed_segments": self.failed_segments,
            "excluded_segments": self.excluded_segments,
        }


def _pair(x, y, min_len, names):
    a, b = as_array(x), as_array(y)
    require_same_length(a, b, names)
    if a.size < min_len:
        raise ArgumentError(f"need at least {min_len} observations, got {a.size}")
    return a, b


def ols_line(x, y) -> MzResult:
    """Least-squares ``y = a x + b`` with R^2 and the F-test of ``a = 0``."""
    x, y = _pair(x, y, 3, ("regressor", "target"))
    n = x.size
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateInputError("constant regressor: regression is degenerate")
    a = float(dx @ dy) / sxx
    b = float(ym - a * xm)
    resid = y - (a * x + b)
    sse = float(resid @ resid)
    sst = float(dy @ dy)
    if sst == 0.0:
        raise DegenerateInputError("constant target: R^2 undefined")
    r2 = min(max(1.0 - sse / sst, 0.0), 1.0)
    df2 = n - 2
    if sse <= 1e-15 * sst:
        f, fp = math.inf, 0.0
    else:
        f = (sst - sse) / (sse / df2)
        fp = _special.f_sf(f, 1, df2)
    return MzResult(a, b, r2, f, fp, n)


def mz_regression(sigma_sq, returns) -> MzResult:
    """Regress squared returns on forecast variances (Mincer-Zarnowitz)."""
    r = as_array(returns)
    return ols_line(sigma_sq, r * r)


def pcc_test(x, y) -> PccResult:
    """Pearson correlation with a two-sided t-test (n - 2 degrees of freedom)."""
    x, y = _pair(x, y, 10, ("x", "y"))
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = float(dx @ dx), float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("zero-variance input: correlation undefined")
    rho = max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sx * sy)))
    df = x.size - 2
    if abs(rho) >= 1.0:
        return PccResult(rho, 0.0)
    t = rho * math.sqrt(df / (1.0 - rho * rho))
    return PccResult(rho, _special.t_sf_two_sided(t, df))


def lr_test(nllh_restricted: float, nllh_extended: float, df: int = 1) -> LrResult:
    """Likelihood-ratio test from two negative log-likelihoods.

    The statistic is clamped at zero; the raw value is kept.
    """
    if not (math.isfinite(nllh_restricted) and math.isfinite(nllh_extended)):
        raise ArgumentError("NLLH values must be finite")
    if df < 1:
        raise ArgumentError("df must be >= 1")
    raw = 2.0 * (nllh_restricted - nllh_extended)
    stat = max(raw, 0.0)
    return LrResult(stat, int(df), _special.chi2_sf(stat, df), raw)


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    a = np.sort(as_array(a))
    b = np.sort(as_array(b))
    if a.size == 0 or b.size == 0:
        raise ArgumentError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    ne = a.size * b.size / (a.size + b.size)
    return KsResult(d, _special.kolmogorov_sf(math.sqrt(ne) * d))


# -- segment bootstrap -------------------------------------------------------

def _segment(spec_base, spec_ext, r, x, s, T, opts):
    lo, hi = s - T, s + T
    fb = fit(spec_base, r[lo:s], None, opts)
    fe = fit(spec_ext, r[lo:s], x[lo:s], opts, base=fb)
    if not (fb.converged and fe.converged):
        return None
    pb = forecast_oos(fb, r[lo:hi], None, T)
    pe = forecast_oos(fe, r[lo:hi], x[lo:hi], T)
    return gaussian_nllh(pb.residuals, pb.sigma_sq), gaussian_nllh(pe.residuals, pe.sigma_sq)


def bootstrap_compare(spec_base: ModelSpec, spec_ext: ModelSpec, returns, exog,
                      n_segments: int = 100, seg_len: int = 1000, seed=0,
                      options: FitOptions | None = None, exclude_gaps: bool = False,
                      max_gap_fraction: float = 0.05, threads: int = 1) -> BootstrapComparison:
    """Compare predictive NLLH of a model and its extension over random segments.

    Each of ``n_segments`` split points ``s`` is drawn uniformly (with
    replacement) so that ``[s - seg_len, s + seg_len)`` lies in the series.
    Both models are fitted on the first half and scored on the second.
    Segments where either fit fails are dropped from both samples.
    """
    r = as_array(returns)
    x = as_array(exog)
    require_same_length(r, x, ("returns", "exog"))
    T = int(seg_len)
    if n_segments < 10:
        raise ArgumentError("n_segments must be >= 10")
    if T < 1 or r.size < 2 * T:
        raise ArgumentError(f"series of length {r.size} is shorter than 2*seg_len = {2 * T}")
    opts = options or FitOptions()
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    split_seq, fit_seq = ss.spawn(2)
    splits = np.random.default_rng(split_seq).integers(T, r.size - T + 1, size=n_segments)
    fit_seeds = [int(c.generate_state(1)[0]) for c in fit_seq.spawn(n_segments)]
    gaps = returns.gap_mask if isinstance(returns, TimeSeries) else np.zeros(r.size, bool)

    def work(k):
        s = int(splits[k])
        if exclude_gaps and gaps[s - T:s + T].mean() > max_gap_fraction:
            return "excluded"
        seg_opts = FitOptions(opts.max_iter, opts.tol, opts.restarts, fit_seeds[k], opts.jitter)
        try:
            return _segment(spec_base, spec_ext, r, x, s, T, seg_opts)
        except NumericalError as exc:
            logger.info("segment at %d failed: %s", s, exc)
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(n_segments)))
    else:
        results = [work(k) for k in range(n_segments)]

    excluded = sum(1 for v in results if v == "excluded")
    failed = sum(1 for v in results if v is None)
    kept = [(int(splits[k]), v) for k, v in enumerate(results) if isinstance(v, tuple)]
    attempted = n_segments - excluded
    if attempted == 0 or failed > 0.5 * attempted:
        raise ReliabilityError(f"{failed} of {attempted} segment fits failed")
    nb = np.array([v[0] for _, v in kept])
    ne = np.array([v[1] for _, v in kept])
    ks = ks_two_sample(nb, ne)
    return BootstrapComparison(spec_base.name, spec_ext.name, n_segments, T, T, splits, nb, ne,
                               ks.statistic, ks.p_value, failed, excluded,
                               np.array([s for s, _ in kept], dtype=int))


# -- out-of-sample comparison report ----------------------------------------

def evaluate_forecast(path, returns_oos) -> dict:
    """R^2, PCC and predictive NLLH of one out-of-sample variance path."""
    r = as_array(returns_oos)
    s2 = as_array(path.sigma_sq)
    mz = mz_regression(s2, r)
    pc = pcc_test(s2, r * r)
    return {
        "mz": mz._asdict(),
        "pcc": pc._asdict(),
        "nllh": gaussian_nllh(path.residuals, path.sigma_sq),
        "n_oos": int(r.size),
    }
