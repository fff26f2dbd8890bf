"""Moving-average trend extraction and additive seasonal decomposition.

Undefined values (trend at the series edges and everything derived from it)
are represented as NaN.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import EvenWindow, SeriesTooShort, WindowTooLarge
from .features import WEEKDAY_NAMES, DailySeries


def moving_average_trend(values, window: int = 7) -> np.ndarray:
    """Centered arithmetic moving average; the first and last ``window // 2`` points are NaN."""
    x = np.asarray(values, dtype=float)
    if window % 2 == 0:
        raise EvenWindow(f"window must be odd, got {window}")
    if window < 1 or window > len(x):
        raise WindowTooLarge(f"window {window} exceeds series length {len(x)}")
    return _centered_filter(x, np.full(window, 1.0 / window))


def _centered_filter(x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    half = len(weights) // 2
    out = np.full(len(x), np.nan)
    if len(x) >= len(weights):
        # explicit window sums keep each defined value independent of distant data
        windows = np.lib.stride_tricks.sliding_window_view(x, len(weights))
        out[half:len(x) - half] = windows @ weights
    return out


def _trend_filter(period: int) -> np.ndarray:
    if period % 2:
        return np.full(period, 1.0 / period)
    # even period: 2 x period centered average
    w = np.full(period + 1, 1.0 / period)
    w[0] = w[-1] = 0.5 / period
    return w


@dataclass
class DecompositionResult:
    observed: np.ndarray
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: int
    seasonal_indices: np.ndarray  # indexed by phase: position i has phase (start_phase + i) % period
    start_phase: int = 0
    dates: list | None = None

    def by_weekday(self) -> dict[str, float]:
        """Seasonal index per weekday name (only meaningful for period 7 series aligned to dates)."""
        if self.period != 7:
            raise ValueError("weekday keys need period 7")
        return {WEEKDAY_NAMES[d]: float(self.seasonal_indices[d]) for d in range(7)}

    def peak_weekday(self) -> str:
        return WEEKDAY_NAMES[int(np.argmax(self.seasonal_indices))]

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["date", "observed", "trend", "seasonal", "residual"])
        labels = self.dates if self.dates is not None else range(len(self.observed))
        for i, label in enumerate(labels):
            w.writerow([str(label), *(_cell(a[i]) for a in (self.observed, self.trend, self.seasonal, self.residual))])
        return buf.getvalue()


def _cell(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def seasonal_decompose_additive(values, period: int = 7, start_phase: int = 0) -> DecompositionResult:
    """Additive decomposition observed = trend + seasonal + residual.

    ``start_phase`` is the seasonal phase of the first observation (for daily
    series with period 7: the weekday of the first day, Monday = 0), so that
    ``seasonal_indices`` are keyed by weekday rather than by position.
    """
    if isinstance(values, DailySeries):
        return decompose_series(values, period)
    x = np.asarray(values, dtype=float)
    if period < 2:
        raise ValueError("period must be at least 2")
    if len(x) < 2 * period:
        raise SeriesTooShort(f"need at least {2 * period} observations, got {len(x)}")

    trend = _centered_filter(x, _trend_filter(period))
    detrended = x - trend
    phase = (np.arange(len(x)) + start_phase) % period
    means = np.array([np.nanmean(detrended[phase == p]) for p in range(period)])
    indices = means - means.mean()
    seasonal = indices[phase]
    residual = x - trend - seasonal
    return DecompositionResult(x, trend, seasonal, residual, period, indices, start_phase)


def decompose_series(series: DailySeries, period: int = 7) -> DecompositionResult:
    start = series.start_weekday % period if period == 7 else 0
    result = seasonal_decompose_additive(series.chars, period, start)
    result.dates = [d.isoformat() for d in series.dates]
    return result


def decompose_halves(series: DailySeries, period: int = 7) -> dict[str, DecompositionResult]:
    """Separate decompositions of the pre- and post-intervention halves."""
    return {w: decompose_series(series.window(w), period) for w in ("h1", "h2")}
