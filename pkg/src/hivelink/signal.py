"""Signal-conditioning primitives: median smoothing and least-squares fits.

Load-cell noise rides at the +-10 g scale while the rules are kilogram
scale, so detectors consume a median-filtered series; trend rules
(honey flow, supplement depletion) extrapolate with ordinary least squares.
"""

from __future__ import annotations

from typing import Sequence


class EmptyInput(ValueError):
    pass


class EvenK(ValueError):
    pass


class TooFewPoints(ValueError):
    pass


class DegenerateAbscissae(ValueError):
    pass


def smooth(values: Sequence[float], k: int) -> list[float]:
    """Sliding-window median with symmetric shrinking at the edges.

    The window radius at index i is min((k-1)//2, i, n-1-i), so every
    window has odd length and the median is an actual sample value.
    Output length equals input length.
    """
    if k < 1 or k % 2 == 0:
        raise EvenK(f"window size must be odd and >= 1, got {k}")
    n = len(values)
    if n == 0:
        raise EmptyInput("cannot smooth an empty series")
    half = (k - 1) // 2
    out = []
    for i in range(n):
        r = min(half, i, n - 1 - i)
        window = sorted(values[i - r : i + r + 1])
        out.append(window[r])
    return out


def trailing_median(values: Sequence[float], k: int) -> float:
    """Causal median of the last up-to-k values (k odd).

    The effective window is the largest odd prefix length <= min(k, len),
    so the result is always an actual sample value.  This is the streaming
    counterpart of smooth(): it never looks ahead, which keeps incremental
    and whole-trace evaluation identical.
    """
    if k < 1 or k % 2 == 0:
        raise EvenK(f"window size must be odd and >= 1, got {k}")
    n = len(values)
    if n == 0:
        raise EmptyInput("cannot take the median of an empty window")
    length = min(k, n)
    if length % 2 == 0:
        length -= 1
    window = sorted(values[n - length :])
    return window[length // 2]


def linear_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least-squares line through (x, y) points.

    Returns (slope, intercept, rmse).  Exact on collinear input.  Uses the
    centered form of the normal equations for numerical stability.
    """
    n = len(points)
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    mean_x = sum(p[0] for p in points) / n
    mean_y = sum(p[1] for p in points) / n
    sxx = 0.0
    sxy = 0.0
    for x, y in points:
        dx = x - mean_x
        sxx += dx * dx
        sxy += dx * (y - mean_y)
    if sxx == 0.0:
        raise DegenerateAbscissae("all abscissae are equal")
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    sse = 0.0
    for x, y in points:
        resid = y - (slope * x + intercept)
        sse += resid * resid
    rmse = (sse / n) ** 0.5
    return slope, intercept, rmse
