"""Minute-indexed time series container and its CSV/JSON serialization."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AlignmentError, ArgumentError, IngestionError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TimeSeries:
    """Real values on a regular grid of epoch minutes.

    ``gap_mask[i]`` is True where the value was filled in rather than
    observed (forward-filled prices, zero-filled counts, warm-up windows).
    """

    values: np.ndarray
    start: int = 0
    interval: int = 60
    gap_mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ArgumentError("TimeSeries values must be one-dimensional")
        mask = self.gap_mask
        mask = np.zeros(values.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if mask.shape != values.shape:
            raise ArgumentError(
                f"gap_mask length {mask.size} does not match values length {values.size}"
            )
        if self.interval <= 0:
            raise ArgumentError("interval must be positive")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gap_mask", mask)

    def __len__(self) -> int:
        return self.values.size

    @property
    def minutes(self) -> np.ndarray:
        """Epoch-minute label of every observation."""
        step = self.interval // 60 if self.interval >= 60 else 1
        return self.start + step * np.arange(len(self), dtype=np.int64)

    @property
    def n_gaps(self) -> int:
        return int(self.gap_mask.sum())

    def slice(self, lo: int, hi: int | None = None) -> "TimeSeries":
        hi = len(self) if hi is None else hi
        step = self.interval // 60 if self.interval >= 60 else 1
        return TimeSeries(self.values[lo:hi], self.start + step * lo, self.interval,
                          self.gap_mask[lo:hi])

    def with_values(self, values, gap_mask=None) -> "TimeSeries":
        return TimeSeries(values, self.start, self.interval,
                          self.gap_mask if gap_mask is None else gap_mask)


def as_array(x) -> np.ndarray:
    """Values of a TimeSeries, or any array-like, as a float ndarray."""
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float)


def as_series(x) -> TimeSeries:
    return x if isinstance(x, TimeSeries) else TimeSeries(np.asarray(x, dtype=float))


def align(*series: TimeSeries) -> list[TimeSeries]:
    """Trim series to their common minute range."""
    if not series:
        return []
    intervals = {s.interval for s in series}
    if len(intervals) != 1:
        raise AlignmentError(f"cannot align series with intervals {sorted(intervals)}")
    lo = max(s.start for s in series)
    hi = min(s.start + len(s) for s in series)
    if hi <= lo:
        raise AlignmentError("series do not overlap in time")
    return [s.slice(lo - s.start, hi - s.start) for s in series]


def require_same_length(a, b, names=("first", "second")) -> None:
    na, nb = len(a), len(b)
    if na != nb:
        raise AlignmentError(f"{names[0]} has length {na} but {names[1]} has length {nb}")


# -- serialization -----------------------------------------------------------

def _fmt(v: float) -> str:
    # repr gives the shortest string that round-trips exactly
    return repr(float(v))


def to_csv(series: TimeSeries) -> str:
    out = io.StringIO()
    out.write("minute_epoch,value,is_gap\n")
    for m, v, g in zip(series.minutes.tolist(), series.values.tolist(), series.gap_mask.tolist()):
        out.write(f"{m},{_fmt(v)},{int(g)}\n")
    return out.getvalue()


def write_csv(series: TimeSeries, path) -> None:
    Path(path).write_text(to_csv(series))


def read_csv(path) -> TimeSeries:
    """Read a ``minute_epoch,value,is_gap`` file written by :func:`write_csv`."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise IngestionError(f"{path}: empty series file")
    if lines[0].startswith("minute_epoch"):
        lines = lines[1:]
    minutes = np.empty(len(lines), dtype=np.int64)
    values = np.empty(len(lines))
    mask = np.zeros(len(lines), dtype=bool)
    for i, line in enumerate(lines):
        parts = line.split(",")
        try:
            minutes[i] = int(parts[0])
            values[i] = float(parts[1])
            mask[i] = len(parts) > 2 and parts[2].strip() not in ("", "0", "false", "False")
        except (ValueError, IndexError):
            raise IngestionError(f"{path}: cannot parse {line!r}", row=i + 2) from None
    if len(minutes) > 1 and np.any(np.diff(minutes) != 1):
        raise IngestionError(f"{path}: minute_epoch column is not a contiguous 1-minute grid")
    start = int(minutes[0]) if len(minutes) else 0
    return TimeSeries(values, start=start, gap_mask=mask)


def envelope(series: TimeSeries, malformed_rows: int = 0, **meta) -> dict:
    """JSON-ready description of a series with its metadata."""
    return {
        "schema_version": SCHEMA_VERSION,
        "start": int(series.start),
        "interval": int(series.interval),
        "count": len(series),
        "gap_count": series.n_gaps,
        "malformed_rows": int(malformed_rows),
        **meta,
        "values": [float(v) for v in series.values],
        "gap_mask": [bool(g) for g in series.gap_mask],
    }


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
