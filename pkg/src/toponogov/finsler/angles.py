"""Forward and backward angles from one-sided difference quotients.

The angle at c(s) between the connector from a base point p and the
curve c is defined through the quotient

    [d(p, c(s+h)) - d(p, c(s))] / d_m(c(s), c(s+h)),   h -> 0+,

whose limit is -cos(angle).  Forward angles step ahead along c,
backward angles step behind (signed h).  The quotient is evaluated at
three step sizes and Richardson-extrapolated; disagreement beyond the
stability gate raises AngleUnstable instead of returning a guess.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import AngleUnstable
from ..model_surface import ModelPoint, model_distance
from .charts import POLE, FinslerChart
from .spray import ChartGeodesic

__all__ = ["forward_angle", "backward_angle", "point_distance"]

_STABILITY_GATE = 1e-3


def point_distance(chart: FinslerChart, p, z) -> float:
    """d(p, z) through the most exact engine the chart offers.

    POLE uses the closed-form radial distance; model-backed polar
    charts use the model connector solver; x-independent norms are a
    single norm evaluation; everything else falls back to shooting.
    """
    z = np.asarray(z, dtype=float)
    if p is POLE:
        if chart.pole_distance is None:
            raise ValueError(f"chart {chart.name} has no pole")
        return float(chart.pole_distance(z))
    p = np.asarray(p, dtype=float)
    if chart.surface is not None:
        d, _ = model_distance(
            chart.surface,
            ModelPoint(float(p[0]), float(p[1])),
            ModelPoint(float(z[0]), float(z[1])),
            path=False,
        )
        return d
    if chart.x_independent:
        return float(chart.F(p, z - p))
    from .distance import distance

    return distance(chart, p, z).d


def _local_dm(chart: FinslerChart, a: np.ndarray, b: np.ndarray) -> float:
    """Symmetrized distance of nearby points: the norm chord suffices."""
    delta = b - a
    return max(float(chart.F(a, delta)), float(chart.F(a, -delta)))


def _quotient(chart: FinslerChart, p, path: ChartGeodesic, s: float, h: float) -> float:
    c0 = np.asarray(path.position_at(s), dtype=float)
    c1 = np.asarray(path.position_at(s + h), dtype=float)
    num = point_distance(chart, p, c1) - point_distance(chart, p, c0)
    den = _local_dm(chart, c0, c1)
    if den <= 0.0:
        raise AngleUnstable(f"degenerate step at s = {s}, h = {h}")
    return num / den


def _angle(chart: FinslerChart, p, path: ChartGeodesic, s: float, h0: float, sign: float) -> float:
    s = float(s)
    length = float(path.s[-1])
    room = (length - s) if sign > 0 else s
    if room <= 1e-9:
        raise ValueError(f"no room for a one-sided step at s = {s} on length {length}")
    base = point_distance(chart, p, np.asarray(path.position_at(s), dtype=float))
    h0 = min(h0, 0.9 * room, base / 20.0)
    if h0 < 1e-7:
        raise ValueError("base point lies on or too close to the curve at s")
    q1 = _quotient(chart, p, path, s, sign * h0)
    q2 = _quotient(chart, p, path, s, sign * h0 / 2.0)
    q3 = _quotient(chart, p, path, s, sign * h0 / 4.0)
    r1 = 2.0 * q2 - q1
    r2 = 2.0 * q3 - q2
    if abs(r2 - r1) > _STABILITY_GATE:
        raise AngleUnstable(
            f"extrapolants differ by {abs(r2 - r1):.3e} at s = {s} (h0 = {h0:g})"
        )
    return math.acos(min(1.0, max(-1.0, -r2)))


def forward_angle(
    chart: FinslerChart, p, path: ChartGeodesic, s: float, *, h0: float = 1e-2
) -> float:
    """Angle at c(s) looking forward along c, measured against p."""
    return _angle(chart, p, path, s, h0, +1.0)


def backward_angle(
    chart: FinslerChart, p, path: ChartGeodesic, s: float, *, h0: float = 1e-2
) -> float:
    """Angle at c(s) looking backward along c, measured against p."""
    return _angle(chart, p, path, s, h0, -1.0)
