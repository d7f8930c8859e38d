"""Minute bars, returns and descriptive statistics from the bundled ticks.

Run with ``python3 demos/bars_and_returns.py``.
"""
from __future__ import annotations

from importlib.resources import files

import numpy as np

from infovol import marketdata
from infovol.series import align

data = files("infovol") / "data"

trades = marketdata.parse_trades(data / "trades.csv")
quotes = marketdata.parse_quotes(data / "quotes.csv")
print(f"{trades.timestamp.size} trades, {quotes.timestamp.size} quotes")

# two price definitions on a common minute grid
vwap, mid = align(marketdata.vwap_bars(trades), marketdata.midquote_bars(quotes))
print(f"{len(vwap)} minutes, {vwap.n_gaps} without trades (forward-filled)")

r_vwap = marketdata.log_returns(vwap)
r_mid = marketdata.log_returns(mid)

# trade prices carry noise around the quote midpoint, so VWAP returns are rougher
for name, r in (("vwap", r_vwap), ("midquote", r_mid)):
    st = marketdata.descriptive_stats(r)
    print(f"{name:>9}: std {st.std_dev:.2e}  skew {st.skewness:+.2f}  kurtosis {st.kurtosis:.1f}")

acf = marketdata.autocorrelation(r_vwap, 5)
print("VWAP return ACF:", np.round(acf.acf, 3), f"(95% band +/-{acf.band:.3f})")

# traded volume summed per minute, on the same grid as the returns
volume = marketdata.aggregate_signal(trades.timestamp, trades.quantity, "sum",
                                     r_vwap.start - 1, r_vwap.start + len(r_vwap) - 1)
r_vwap, volume = align(r_vwap, volume)
print(f"volume: {len(volume)} minutes, mean {volume.values.mean():.3f}")
