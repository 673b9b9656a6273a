"""Post-processing of time series: crossings, minima, power-law fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PowerLawFit:
    exponent: float
    amplitude: float
    residual: float


def fit_power_law(x, y) -> PowerLawFit:
    """Least-squares fit of ``log y = log A + e log x``.

    ``residual`` is the RMS deviation in ``log y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need at least 3 (x, y) points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    e, c = np.polyfit(lx, ly, 1)
    res = float(np.sqrt(np.mean((ly - (c + e * lx)) ** 2)))
    return PowerLawFit(float(e), float(np.exp(c)), res)


def crossing_time(t, series) -> float | None:
    """First time the series drops through zero, linearly interpolated.

    Returns ``None`` if the series never reaches zero.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    if y.size == 0 or y[0] <= 0:
        raise ValueError("series must start positive")
    idx = np.nonzero(y <= 0)[0]
    if idx.size == 0:
        return None
    k = idx[0]
    t0, t1, y0, y1 = t[k - 1], t[k], y[k - 1], y[k]
    return float(t0 + (t1 - t0) * y0 / (y0 - y1))


def smooth3(y) -> np.ndarray:
    """Centered 3-sample running mean; endpoints keep their values."""
    y = np.asarray(y, dtype=float)
    out = y.copy()
    if y.size >= 3:
        out[1:-1] = (y[:-2] + y[1:-1] + y[2:]) / 3
    return out


def local_minima(y) -> np.ndarray:
    """Indices of strict interior minima after 3-sample smoothing.

    Flat bottoms count once, at their first sample.
    """
    s = smooth3(y)
    out = []
    i = 1
    n = s.size
    while i < n - 1:
        if s[i] < s[i - 1]:
            j = i
            while j + 1 < n and s[j + 1] == s[j]:
                j += 1
            if j + 1 < n and s[j + 1] > s[j]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return np.array(out, dtype=int)


@dataclass
class Extremum:
    value: float
    time: float


def second_minimum(t, series) -> Extremum | None:
    """The second local minimum in time (e.g. of ``Var(J^min)/N``)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    mins = local_minima(y)
    if mins.size < 2:
        return None
    k = mins[1]
    return Extremum(float(y[k]), float(t[k]))
