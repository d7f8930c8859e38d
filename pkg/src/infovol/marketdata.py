"""Tick ingestion and minute-level bars.

Trades, quotes and sub-minute signal observations are held column-wise in
numpy arrays.  Minutes are half-open ``[t, t + 60 s)`` intervals on UTC epoch
minutes; every filled-in minute is flagged in the output ``gap_mask``.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, DegenerateInputError, DomainError, EmptyInputError, IngestionError
from .series import TimeSeries, as_array

logger = logging.getLogger(__name__)

MS_PER_MINUTE = 60_000


@dataclass(frozen=True)
class CsvFormat:
    """Column layout of an input CSV.

    ``columns`` maps each required field to its 0-based column index.
    ``header`` is True/False, or None to detect a header from the first row.
    """

    columns: tuple[int, ...] | None = None
    header: bool | None = None
    delimiter: str = ","


@dataclass(frozen=True)
class TradeTicks:
    timestamp: np.ndarray  # epoch ms
    price: np.ndarray
    quantity: np.ndarray
    malformed: int = 0

    def __len__(self):
        return self.timestamp.size


@dataclass(frozen=True)
class QuoteTicks:
    timestamp: np.ndarray
    bid: np.ndarray
    ask: np.ndarray
    malformed: int = 0

    def __len__(self):
        return self.timestamp.size


@dataclass(frozen=True)
class SignalTicks:
    timestamp: np.ndarray
    value: np.ndarray
    malformed: int = 0

    def __len__(self):
        return self.timestamp.size


class DescriptiveStats(NamedTuple):
    mean: float
    median: float
    max: float
    min: float
    std_dev: float
    skewness: float
    kurtosis: float


class Autocorrelation(NamedTuple):
    lags: np.ndarray
    acf: np.ndarray
    band: float


# -- parsing -----------------------------------------------------------------

def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, (str, Path)):
        raw = Path(source).read_bytes()
    else:
        raw = source.read()
        if isinstance(raw, str):
            return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        row = raw[: exc.start].count(b"\n") + 1
        raise IngestionError("input is not valid UTF-8", row=row) from None


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _parse_rows(source, fmt: CsvFormat, ncols: int):
    """Return (rows as float array, 1-based source row numbers)."""
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text), delimiter=fmt.delimiter)
    cols = fmt.columns if fmt.columns is not None else tuple(range(ncols))
    if len(cols) != ncols:
        raise ArgumentError(f"format descriptor needs {ncols} column indices, got {len(cols)}")
    out, rownums = [], []
    first = True
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if first:
            first = False
            header = fmt.header
            if header is None:
                header = not all(_is_number(row[c]) for c in cols if c < len(row))
            if header:
                continue
        try:
            out.append([float(row[c]) for c in cols])
        except (IndexError, ValueError):
            raise IngestionError(f"cannot parse {fmt.delimiter.join(row)!r}", row=lineno) from None
        rownums.append(lineno)
    if not out:
        raise EmptyInputError("no data rows in input")
    return np.asarray(out, dtype=float), np.asarray(rownums)


def _sorted(ts: np.ndarray, *cols: np.ndarray):
    order = np.argsort(ts, kind="stable")
    return (ts[order],) + tuple(c[order] for c in cols)


def parse_trades(source, fmt: CsvFormat = CsvFormat()) -> TradeTicks:
    """Parse ``timestamp_ms,price,quantity`` rows.

    Rows with a non-positive price or quantity are dropped and counted in
    ``malformed``; rows that are not numeric at all raise IngestionError.
    """
    data, rownums = _parse_rows(source, fmt, 3)
    ts, price, qty = data[:, 0], data[:, 1], data[:, 2]
    ok = (price > 0) & (qty > 0) & np.isfinite(price) & np.isfinite(qty) & np.isfinite(ts)
    bad = int((~ok).sum())
    if bad:
        logger.warning("dropped %d malformed trade rows (first at row %d)", bad, rownums[~ok][0])
    ts, price, qty = _sorted(ts[ok].astype(np.int64), price[ok], qty[ok])
    return TradeTicks(ts, price, qty, bad)


def parse_quotes(source, fmt: CsvFormat = CsvFormat()) -> QuoteTicks:
    """Parse ``timestamp_ms,bid,ask`` rows; crossed or non-positive quotes are malformed."""
    data, rownums = _parse_rows(source, fmt, 3)
    ts, bid, ask = data[:, 0], data[:, 1], data[:, 2]
    ok = (bid > 0) & (ask >= bid) & np.isfinite(bid) & np.isfinite(ask) & np.isfinite(ts)
    bad = int((~ok).sum())
    if bad:
        logger.warning("dropped %d malformed quote rows (first at row %d)", bad, rownums[~ok][0])
    ts, bid, ask = _sorted(ts[ok].astype(np.int64), bid[ok], ask[ok])
    return QuoteTicks(ts, bid, ask, bad)


def parse_signal(source, fmt: CsvFormat = CsvFormat()) -> SignalTicks:
    """Parse ``timestamp_ms,value`` rows; non-finite values are malformed."""
    data, _ = _parse_rows(source, fmt, 2)
    ts, val = data[:, 0], data[:, 1]
    ok = np.isfinite(val) & np.isfinite(ts)
    ts, val = _sorted(ts[ok].astype(np.int64), val[ok])
    return SignalTicks(ts, val, int((~ok).sum()))


# -- bars --------------------------------------------------------------------

def _minute_grid(minute: np.ndarray, start: int | None, end: int | None):
    lo = int(minute[0]) if start is None else int(start)
    hi = int(minute[-1]) if end is None else int(end)
    if hi < lo:
        raise ArgumentError(f"empty minute range [{lo}, {hi}]")
    return lo, hi - lo + 1


def _ffill(values: np.ndarray, have: np.ndarray) -> np.ndarray:
    """Forward-fill positions where ``have`` is False; leading holes take the first value."""
    idx = np.where(have, np.arange(values.size), 0)
    np.maximum.accumulate(idx, out=idx)
    filled = values[idx]
    if not have[0]:
        first = np.argmax(have)
        filled[:first] = values[first]
    return filled


def vwap_bars(trades: TradeTicks, start: int | None = None, end: int | None = None) -> TimeSeries:
    """Volume-weighted average trade price for every minute.

    Minutes without trades repeat the previous bar and are flagged.
    """
    if len(trades) == 0:
        raise EmptyInputError("no trades")
    minute = trades.timestamp // MS_PER_MINUTE
    lo, n = _minute_grid(minute, start, end)
    k = minute - lo
    inside = (k >= 0) & (k < n)
    k = k[inside]
    pq = np.bincount(k, weights=(trades.price * trades.quantity)[inside], minlength=n)
    q = np.bincount(k, weights=trades.quantity[inside], minlength=n)
    have = q > 0
    if not have.any():
        raise EmptyInputError("no trades inside the requested minute range")
    price = np.zeros(n)
    price[have] = pq[have] / q[have]
    return TimeSeries(_ffill(price, have), start=lo, gap_mask=~have)


def midquote_bars(quotes: QuoteTicks, start: int | None = None, end: int | None = None) -> TimeSeries:
    """Mid-point of the last best bid/ask quote in each minute."""
    if len(quotes) == 0:
        raise EmptyInputError("no quotes")
    minute = quotes.timestamp // MS_PER_MINUTE
    lo, n = _minute_grid(minute, start, end)
    k = minute - lo
    inside = np.flatnonzero((k >= 0) & (k < n))
    have = np.zeros(n, dtype=bool)
    mid = np.zeros(n)
    # quotes are sorted by time, so later assignments win
    mid[k[inside]] = 0.5 * (quotes.bid[inside] + quotes.ask[inside])
    have[k[inside]] = True
    if not have.any():
        raise EmptyInputError("no quotes inside the requested minute range")
    return TimeSeries(_ffill(mid, have), start=lo, gap_mask=~have)


def log_returns(prices) -> TimeSeries:
    """``r_t = ln(p_t / p_{t-1})``; a return is flagged if either price was filled."""
    p = as_array(prices)
    if p.size < 2:
        raise ArgumentError("need at least two prices")
    if np.any(~(p > 0)):
        raise DomainError("prices must be strictly positive")
    r = np.diff(np.log(p))
    if isinstance(prices, TimeSeries):
        g = prices.gap_mask
        step = prices.interval // 60
        return TimeSeries(r, prices.start + step, prices.interval, g[1:] | g[:-1])
    return TimeSeries(r)


def aggregate_signal(timestamps, values, method: str = "sum",
                     start: int | None = None, end: int | None = None) -> TimeSeries:
    """Bucket sub-minute observations into one value per minute.

    ``method="sum"`` suits event counts and traded amounts (empty minute -> 0);
    ``method="mean"`` suits state variables such as the spread (empty minute
    -> previous value).  Both flag empty minutes.
    """
    if method not in ("sum", "mean"):
        raise ArgumentError(f"method must be 'sum' or 'mean', not {method!r}")
    ts = np.asarray(timestamps, dtype=np.int64)
    val = np.asarray(values, dtype=float)
    if ts.size == 0:
        raise EmptyInputError("no signal observations")
    if ts.size != val.size:
        raise ArgumentError("timestamps and values differ in length")
    minute = ts // MS_PER_MINUTE
    lo, n = _minute_grid(np.sort(minute), start, end)
    k = minute - lo
    inside = (k >= 0) & (k < n)
    k = k[inside]
    total = np.bincount(k, weights=val[inside], minlength=n)
    count = np.bincount(k, minlength=n)
    have = count > 0
    if method == "sum":
        return TimeSeries(total, start=lo, gap_mask=~have)
    if not have.any():
        raise EmptyInputError("no signal observations inside the requested minute range")
    mean = np.zeros(n)
    mean[have] = total[have] / count[have]
    return TimeSeries(_ffill(mean, have), start=lo, gap_mask=~have)


def aggregate_ticks(signal: SignalTicks, method: str = "sum", start=None, end=None) -> TimeSeries:
    return aggregate_signal(signal.timestamp, signal.value, method, start, end)


# -- diagnostics -------------------------------------------------------------

def descriptive_stats(series) -> DescriptiveStats:
    """Sample summary with population-moment skewness and raw (Pearson) kurtosis."""
    x = as_array(series)
    if x.size < 2:
        raise ArgumentError("need at least two observations")
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d * d)
    if m2 == 0.0:
        raise DegenerateInputError("constant series: skewness and kurtosis undefined")
    m3 = np.mean(d ** 3)
    m4 = np.mean(d ** 4)
    return DescriptiveStats(
        mean=float(mean),
        median=float(np.median(x)),
        max=float(x.max()),
        min=float(x.min()),
        std_dev=float(x.std(ddof=1)),
        skewness=float(m3 / m2 ** 1.5),
        kurtosis=float(m4 / m2 ** 2),
    )


def autocorrelation(series, max_lag: int) -> Autocorrelation:
    """Sample ACF at lags ``1..max_lag`` with the +/-1.96/sqrt(n) white-noise band."""
    x = as_array(series)
    n = x.size
    if max_lag < 1 or max_lag >= n:
        raise ArgumentError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise DegenerateInputError("constant series: autocorrelation undefined")
    acf = np.array([d[k:] @ d[:-k] for k in range(1, max_lag + 1)]) / denom
    return Autocorrelation(np.arange(1, max_lag + 1), acf, 1.96 / np.sqrt(n))
