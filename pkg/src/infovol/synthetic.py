"""Synthetic tick-level market with a known volume -> volatility channel.

Minute returns follow a GARCHX recursion driven by the previous minute's
traded volume.  Each minute is then expanded into individual trades, best
bid/ask quotes and tweet events, so the whole ingestion path can be
exercised end to end.
"""
from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np

from .garchcore import ModelSpec, ParamVector, simulate
from .marketdata import MS_PER_MINUTE, QuoteTicks, SignalTicks, TradeTicks


class SyntheticMarket(NamedTuple):
    trades: TradeTicks
    quotes: QuoteTicks
    tweets: SignalTicks
    minute_returns: np.ndarray
    minute_volume: np.ndarray


def simulate_market(n_minutes: int = 10_000, seed: int = 0, start_minute: int = 25_925_760,
                    price0: float = 5200.0, trades_per_minute: float = 2.5,
                    empty_minute_prob: float = 0.01) -> SyntheticMarket:
    """Generate trades, quotes and tweets for ``n_minutes`` consecutive minutes.

    ``start_minute`` defaults to 2019-04-18 00:00 UTC.
    """
    rng = np.random.default_rng(seed)
    volume = rng.lognormal(0.0, 1.0, n_minutes)
    V = 1e-6
    params = ParamVector(0.0, 0.1 * V, 0.1, 0.6, gamma=0.2 * V / np.exp(0.5))
    r = simulate(ModelSpec("GARCH", True), params, n_minutes, exog=volume,
                 seed=int(rng.integers(2 ** 63))).values
    logp = np.log(price0) + np.cumsum(r)

    # trades: at least one per active minute, sizes split the minute's volume
    active = rng.random(n_minutes) >= empty_minute_prob
    active[0] = active[-1] = True
    k = np.where(active, 1 + rng.poisson(trades_per_minute - 1.0, n_minutes), 0)
    minute_of = np.repeat(np.arange(n_minutes), k)
    offset = rng.integers(0, MS_PER_MINUTE, minute_of.size)
    w = rng.gamma(1.0, 1.0, minute_of.size)
    wsum = np.bincount(minute_of, weights=w, minlength=n_minutes)
    qty = volume[minute_of] * w / wsum[minute_of]
    noise = 2e-4 * rng.standard_normal(minute_of.size)
    price = np.exp(logp[minute_of] + noise)
    t_ms = (start_minute + minute_of) * MS_PER_MINUTE + offset
    order = np.lexsort((offset, minute_of))
    trades = TradeTicks(t_ms[order], np.round(price[order], 4), np.round(qty[order] + 1e-8, 8))

    # quotes: one or two per minute, the last one centred on the minute price
    nq = 1 + rng.integers(0, 2, n_minutes)
    qm = np.repeat(np.arange(n_minutes), nq)
    last = np.r_[qm[1:] != qm[:-1], True]
    q_off = np.where(last, MS_PER_MINUTE - 1, rng.integers(0, MS_PER_MINUTE // 2, qm.size))
    half = 0.5 * np.exp(logp[qm]) * (1e-5 + 2e-5 * rng.random(qm.size))
    mid = np.exp(logp[qm] + np.where(last, 0.0, 1e-4 * rng.standard_normal(qm.size)))
    quotes = QuoteTicks((start_minute + qm) * MS_PER_MINUTE + q_off,
                        np.round(mid - half, 4), np.round(mid + half, 4))

    # tweets: Poisson events, one row per event second
    counts = rng.poisson(6.0, n_minutes)
    tm = np.repeat(np.arange(n_minutes), counts)
    sec = rng.integers(0, 60, tm.size)
    key = np.unique(tm * 60 + sec)
    tweets = SignalTicks((start_minute * 60 + key) * 1000,
                         np.bincount(np.searchsorted(key, tm * 60 + sec), minlength=key.size).astype(float))
    return SyntheticMarket(trades, quotes, tweets, r, volume)


def write_market(market: SyntheticMarket, directory) -> dict:
    """Write ``trades.csv``, ``quotes.csv`` and ``tweets.csv`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    t, q, s = market.trades, market.quotes, market.tweets
    paths = {"trades": d / "trades.csv", "quotes": d / "quotes.csv", "tweets": d / "tweets.csv"}
    with open(paths["trades"], "w") as fh:
        fh.write("timestamp_ms,price,quantity\n")
        for row in zip(t.timestamp.tolist(), t.price.tolist(), t.quantity.tolist()):
            fh.write("%d,%r,%r\n" % row)
    with open(paths["quotes"], "w") as fh:
        fh.write("timestamp_ms,bid,ask\n")
        for row in zip(q.timestamp.tolist(), q.bid.tolist(), q.ask.tolist()):
            fh.write("%d,%r,%r\n" % row)
    with open(paths["tweets"], "w") as fh:
        fh.write("timestamp_ms,value\n")
        for row in zip(s.timestamp.tolist(), s.value.tolist()):
            fh.write("%d,%d\n" % row)
    return paths
