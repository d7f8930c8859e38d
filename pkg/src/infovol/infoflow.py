"""Linear and non-linear dependence between information proxies and volatility.

Transfer entropy is estimated with plug-in (frequency) probabilities on
quantile-binned series, Markov order one on both source and target, and is
reported in bits.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, DegenerateInputError
from .series import TimeSeries, as_array, require_same_length


class LagCorrelation(NamedTuple):
    lags: np.ndarray
    rho: np.ndarray
    p_values: np.ndarray | None = None


class TransferEntropyResult(NamedTuple):
    te: float
    ete: float
    p_value: float
    direction: tuple[str, str]
    bins: int
    shuffles: int


class AdfResult(NamedTuple):
    statistic: float
    lag_order: int
    critical_values: dict
    reject_unit_root: bool
    nobs: int
    level: str


# MacKinnon asymptotic critical values, constant and no trend
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _spawn(seed, n):
    """Independent child seeds for ``n`` replicates of a stochastic procedure."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- lagged correlation ------------------------------------------------------

def _lag_windows(n: int, lag: int):
    # rho(lag) pairs target_t with external_{t-lag}
    if lag >= 0:
        return slice(lag, n), slice(0, n - lag)
    return slice(0, n + lag), slice(-lag, n)


def _lag_corr_matrix(Y: np.ndarray, x: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """Pearson correlations for every row of ``Y`` against ``x`` at each lag."""
    n = x.size
    Y = Y - Y.mean(axis=1, keepdims=True)
    x = x - x.mean()
    cy = np.concatenate([np.zeros((Y.shape[0], 1)), np.cumsum(Y, axis=1)], axis=1)
    cyy = np.concatenate([np.zeros((Y.shape[0], 1)), np.cumsum(Y * Y, axis=1)], axis=1)
    cx = np.concatenate([[0.0], np.cumsum(x)])
    cxx = np.concatenate([[0.0], np.cumsum(x * x)])
    out = np.empty((Y.shape[0], lags.size))
    for j, lag in enumerate(lags):
        ty, tx = _lag_windows(n, int(lag))
        m = ty.stop - ty.start
        sy = cy[:, ty.stop] - cy[:, ty.start]
        syy = cyy[:, ty.stop] - cyy[:, ty.start]
        sx = cx[tx.stop] - cx[tx.start]
        sxx = cxx[tx.stop] - cxx[tx.start]
        sxy = Y[:, ty] @ x[tx]
        vy = syy - sy * sy / m
        vx = sxx - sx * sx / m
        if vx <= 0 or np.any(vy <= 0):
            raise DegenerateInputError(f"zero-variance window at lag {lag}: correlation undefined")
        out[:, j] = (sxy - sx * sy / m) / np.sqrt(vx * vy)
    return np.clip(out, -1.0, 1.0)


def _check_lag_inputs(target, external, max_lag):
    y, x = as_array(target), as_array(external)
    require_same_length(y, x, ("target", "external"))
    if max_lag < 0 or y.size <= 2 * max_lag:
        raise ArgumentError(f"need 0 <= max_lag and length > 2*max_lag (length {y.size}, max_lag {max_lag})")
    return y, x, np.arange(-max_lag, max_lag + 1)


def lagged_crosscorr(target, external, max_lag: int) -> LagCorrelation:
    """Correlation of ``target_t`` with ``external_{t-lag}`` for lag in [-max_lag, max_lag].

    Positive lags mean the external series leads the target.
    """
    y, x, lags = _check_lag_inputs(target, external, max_lag)
    rho = _lag_corr_matrix(y[None, :], x, lags)[0]
    return LagCorrelation(lags, rho)


def permutation_pvalues(target, external, max_lag: int, permutations: int = 1000,
                        seed=0, chunk: int = 64, threads: int = 1) -> LagCorrelation:
    """Lagged correlations with p-values from random time-permutations of the target.

    ``p = (1 + #{|rho_perm| >= |rho_obs|}) / (permutations + 1)`` per lag.
    """
    if permutations < 1:
        raise ArgumentError("permutations must be positive")
    y, x, lags = _check_lag_inputs(target, external, max_lag)
    obs = _lag_corr_matrix(y[None, :], x, lags)[0]
    sizes = [min(chunk, permutations - i) for i in range(0, permutations, chunk)]
    seeds = _spawn(seed, len(sizes))

    def work(k):
        rng = np.random.default_rng(seeds[k])
        Y = np.stack([rng.permutation(y) for _ in range(sizes[k])])
        r = _lag_corr_matrix(Y, x, lags)
        # tiny slack so exact ties (e.g. identical permutations) count as exceedances
        return np.sum(np.abs(r) >= np.abs(obs) - 1e-12, axis=0)

    hits = np.sum(_map(work, range(len(sizes)), threads), axis=0)
    return LagCorrelation(lags, obs, (hits + 1.0) / (permutations + 1.0))


# -- signal transforms -------------------------------------------------------

def integrate_signal(signal, window: int) -> TimeSeries:
    """Trailing moving-window sum over ``window`` minutes.

    The first ``window - 1`` outputs are partial sums and are flagged as gaps.
    """
    s = signal if isinstance(signal, TimeSeries) else TimeSeries(signal)
    x = s.values
    if window < 1 or window > x.size:
        raise ArgumentError(f"window must be in [1, {x.size}], got {window}")
    out = np.convolve(x, np.ones(window))[: x.size]
    mask = s.gap_mask.copy()
    mask[: window - 1] = True
    return s.with_values(out, mask)


def discretize(series, bins: int = 3) -> np.ndarray:
    """Quantile-bin a series into symbols ``0..bins-1``.

    The k-th edge is the order statistic at position ``floor((n-1) k / bins)``
    and values equal to an edge fall in the lower bin, so the symbols depend
    on ranks only.
    """
    if bins < 2:
        raise ArgumentError("bins must be >= 2")
    x = as_array(series)
    if x.size < bins or np.all(x == x[0]):
        raise DegenerateInputError("cannot discretize a constant or too-short series")
    srt = np.sort(x)
    pos = ((x.size - 1) * np.arange(1, bins)) // bins
    return np.searchsorted(srt[pos], x, side="left").astype(np.int64)


# -- transfer entropy --------------------------------------------------------

def _symbols(s) -> np.ndarray:
    a = np.asarray(s)
    if a.dtype.kind not in "iub":
        if not np.all(a == np.floor(a)):
            raise ArgumentError("symbol sequences must be integer valued")
        a = a.astype(np.int64)
    if a.size and a.min() < 0:
        raise ArgumentError("symbols must be non-negative")
    return a.astype(np.int64)


def transfer_entropy(source_symbols, target_symbols) -> float:
    """Plug-in transfer entropy from source to target, in bits.

    ``sum p(y', y, x) log2[p(y' | y, x) / p(y' | y)]`` where ``y'`` is the
    next target symbol and ``y``, ``x`` the current target and source symbols.
    """
    x, y = _symbols(source_symbols), _symbols(target_symbols)
    require_same_length(x, y, ("source", "target"))
    if x.size < 3:
        raise ArgumentError("need at least 3 observations")
    kx, ky = int(x.max()) + 1, int(y.max()) + 1
    code = (y[1:] * ky + y[:-1]) * kx + x[:-1]
    c = np.bincount(code, minlength=ky * ky * kx).reshape(ky, ky, kx).astype(float)
    return _te_from_counts(c)


def _te_from_counts(c: np.ndarray) -> float:
    total = c.sum()
    c_yx = c.sum(axis=0)            # (y, x)
    c_ny = c.sum(axis=2)            # (y', y)
    c_y = c_ny.sum(axis=0)          # (y,)
    nz = c > 0
    num = c * c_y[None, :, None]
    den = c_yx[None, :, :] * c_ny[:, :, None]
    te = np.sum(c[nz] * np.log2(num[nz] / den[nz])) / total
    return max(float(te), 0.0)


def block_permutation(x: np.ndarray, rng, mean_block: float = 20.0) -> np.ndarray:
    """Reorder contiguous blocks of geometric random length (mean ``mean_block``)."""
    n = x.size
    cuts = [0]
    while cuts[-1] < n:
        cuts.append(cuts[-1] + int(rng.geometric(1.0 / mean_block)))
    cuts[-1] = n
    blocks = [x[a:b] for a, b in zip(cuts[:-1], cuts[1:])]
    order = rng.permutation(len(blocks))
    return np.concatenate([blocks[i] for i in order])


def effective_transfer_entropy(source_symbols, target_symbols, shuffles: int = 100, seed=0,
                               mode: str = "shuffle", mean_block: float = 20.0,
                               names: tuple[str, str] = ("source", "target"),
                               threads: int = 1) -> TransferEntropyResult:
    """TE minus its mean over ``shuffles`` surrogate sources, with a permutation p-value.

    ``mode="shuffle"`` permutes the source fully; ``mode="block"`` permutes
    blocks of mean length ``mean_block`` to keep short-range structure.
    The corrected value is not clamped and may be slightly negative.
    """
    if shuffles < 20:
        raise ArgumentError("shuffles must be >= 20")
    if mode not in ("shuffle", "block"):
        raise ArgumentError(f"unknown surrogate mode {mode!r}")
    x, y = _symbols(source_symbols), _symbols(target_symbols)
    te = transfer_entropy(x, y)
    seeds = _spawn(seed, shuffles)

    def one(k):
        rng = np.random.default_rng(seeds[k])
        xs = rng.permutation(x) if mode == "shuffle" else block_permutation(x, rng, mean_block)
        return transfer_entropy(xs, y)

    null = np.asarray(_map(one, range(shuffles), threads))
    p = (1.0 + np.count_nonzero(null >= te)) / (shuffles + 1.0)
    bins = int(max(x.max(), y.max())) + 1
    return TransferEntropyResult(te, float(te - null.mean()), float(p), tuple(names), bins, shuffles)


# -- unit root ---------------------------------------------------------------

def _adf_design(x: np.ndarray, lags: int, nobs: int):
    dx = np.diff(x)
    cols = [np.ones(nobs), x[-nobs - 1:-1]]
    for i in range(1, lags + 1):
        cols.append(dx[-nobs - i:-i])
    return np.column_stack(cols), dx[-nobs:]


def _ols(X, y):
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return beta, float(resid @ resid), rank


def adf_test(series, max_lag: int | str = "auto", level: str = "1%") -> AdfResult:
    """Augmented Dickey-Fuller test with a constant, lag order chosen by BIC.

    Lag selection compares all orders ``0..max_lag`` on a common sample; the
    chosen order is then re-estimated on the full available sample.
    """
    if level not in ADF_CRITICAL_VALUES:
        raise ArgumentError(f"level must be one of {sorted(ADF_CRITICAL_VALUES)}")
    x = as_array(series)
    n = x.size
    if max_lag == "auto":
        max_lag = int(math.floor(12.0 * (n / 100.0) ** 0.25))
        max_lag = max(0, min(max_lag, n - 25))
    max_lag = int(max_lag)
    if max_lag < 0:
        raise ArgumentError("max_lag must be non-negative")
    if n < 25 + max_lag:
        raise ArgumentError(f"series too short for ADF: length {n} < 25 + max_lag ({max_lag})")
    if np.all(x == x[0]):
        raise DegenerateInputError("constant series: ADF regression is degenerate")

    nobs = n - 1 - max_lag
    X, y = _adf_design(x, max_lag, nobs)
    best, best_bic = 0, np.inf
    for p in range(max_lag + 1):
        k = p + 2
        _, ssr, _ = _ols(X[:, :k], y)
        if ssr <= 0:
            raise DegenerateInputError("ADF regression fits exactly; series is degenerate")
        bic = nobs * math.log(ssr / nobs) + k * math.log(nobs)
        if bic < best_bic:
            best, best_bic = p, bic

    nobs = n - 1 - best
    X, y = _adf_design(x, best, nobs)
    beta, ssr, rank = _ols(X, y)
    if rank < X.shape[1] or ssr <= 0:
        raise DegenerateInputError("ADF regression is rank deficient")
    s2 = ssr / (nobs - X.shape[1])
    cov = s2 * np.linalg.inv(X.T @ X)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    return AdfResult(stat, best, dict(ADF_CRITICAL_VALUES),
                     stat < ADF_CRITICAL_VALUES[level], nobs, level)
