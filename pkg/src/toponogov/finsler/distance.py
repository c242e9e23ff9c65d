"""Directed chart distances by multistart shooting.

d(a, b) comes from launching a fan over the indicatrix at a, keeping
the rays that pass nearest b, and polishing each with a damped Newton
iteration in (launch angle, arclength).  Converged hits are clustered
into distinct minimal connectors; x-independent norms skip all of it
because their geodesics are straight lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from ..errors import ShootingFailed
from .charts import FinslerChart
from .spray import ChartGeodesic, _integrate_affine, integrate_geodesic_fan
from .tensor import tensor_matrix

__all__ = [
    "MinimalConnector",
    "distance",
    "reversed_length",
    "dm",
]

_RESIDUAL_ACCEPT = 1e-6
_RESIDUAL_TARGET = 1e-10
_VELOCITY_CLUSTER = 1e-3
_LENGTH_CLUSTER = 1e-6


@dataclass
class MinimalConnector:
    """Directed distance with the minimizing geodesic(s) from a to b."""

    start: np.ndarray
    end: np.ndarray
    path: ChartGeodesic
    d: float
    all_connectors: list[ChartGeodesic] = field(default_factory=list)

    def endpoint_residual(self) -> float:
        return float(np.max(np.abs(self.path.x[-1] - self.end)))


def _straight_connector(chart: FinslerChart, a: np.ndarray, b: np.ndarray) -> MinimalConnector:
    delta = b - a
    d = float(chart.F(a, delta))
    u = delta / d
    m = max(int(math.ceil(d / 1e-2)), 1) + 1
    s = np.linspace(0.0, d, m)
    xs = a[None, :] + s[:, None] * u[None, :]
    vs = np.broadcast_to(u, xs.shape).copy()
    path = ChartGeodesic(s=s, x=xs, v=vs, length=d)
    return MinimalConnector(start=a, end=b, path=path, d=d, all_connectors=[path])


def _unit_velocity(chart: FinslerChart, a: np.ndarray, phi: float) -> np.ndarray:
    u = np.array([math.cos(phi), math.sin(phi)])
    return u / float(chart.F(a, u))


def _newton_polish(
    chart: FinslerChart,
    a: np.ndarray,
    b: np.ndarray,
    phi: float,
    s: float,
    step: float,
    scale: float,
):
    """Damped Newton on (phi, s); returns (phi, s, residual) or None."""
    dphi = 1e-6

    def endpoint(phis, length):
        v0s = np.stack([_unit_velocity(chart, a, p) for p in phis])
        ss, xs, vs, alive = integrate_geodesic_fan(chart, a, v0s, length, step)
        if not alive[-1].all():
            return None, None
        return xs[-1], vs[-1]

    res_norm = math.inf
    for _ in range(30):
        ends, endv = endpoint([phi, phi + dphi, phi - dphi], s)
        if ends is None:
            return None
        r = ends[0] - b
        res_norm = float(np.max(np.abs(r)))
        if res_norm <= _RESIDUAL_TARGET * scale:
            break
        jac = np.column_stack([(ends[1] - ends[2]) / (2.0 * dphi), endv[0]])
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return None
        # damped line search on the residual norm
        lam = 1.0
        improved = False
        for _ in range(6):
            phi_try = phi + lam * delta[0]
            s_try = s + lam * delta[1]
            if s_try > 1e-8:
                ends_try, _ = endpoint([phi_try], s_try)
                if ends_try is not None:
                    r_try = float(np.max(np.abs(ends_try[0] - b)))
                    if r_try < res_norm:
                        phi, s = phi_try, s_try
                        improved = True
                        break
            lam *= 0.5
        if not improved:
            break
    return (phi, s, res_norm) if res_norm <= _RESIDUAL_ACCEPT else None


def distance(
    chart: FinslerChart,
    a,
    b,
    *,
    step: float = 1e-2,
    fan_size: int = 48,
    newton_starts: int = 6,
) -> MinimalConnector:
    """Directed distance d(a, b) with enumerated minimal connectors.

    Shooting runs entirely inside the chart; rays that leave the box
    die in the fan and never reach Newton.  ShootingFailed carries the
    best residual when nothing converges.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (chart.contains(a) and chart.contains(b)):
        raise ValueError("distance endpoints must lie inside the chart box")
    delta = b - a
    enorm = float(np.linalg.norm(delta))
    if enorm < 1e-12:
        raise ValueError("distance endpoints coincide")
    if chart.x_independent:
        return _straight_connector(chart, a, b)
    if chart.dim != 2:
        raise NotImplementedError("shooting distance is implemented for 2D charts")

    chord = max(float(chart.F(a, delta)), float(chart.F(b, delta)))
    l_max = 3.0 * chord
    angles = np.linspace(0.0, 2.0 * math.pi, fan_size, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    speeds = np.asarray(chart.F(a, dirs), dtype=float)
    v0s = dirs / speeds[:, None]
    ss, xs, vs, alive = integrate_geodesic_fan(chart, a, v0s, l_max, step)
    gaps = np.linalg.norm(xs - b[None, None, :], axis=-1)
    gaps = np.where(alive, gaps, np.inf)
    best_gap = gaps.min(axis=0)
    best_idx = gaps.argmin(axis=0)
    order = np.argsort(best_gap)

    solutions = []
    best_res = math.inf
    cutoff = 3.0 * max(float(best_gap[order[0]]), 1e-3 * enorm)
    tried = 0
    for ray in order:
        if tried >= newton_starts or not math.isfinite(best_gap[ray]):
            break
        if float(best_gap[ray]) > cutoff and tried > 0:
            break
        tried += 1
        s_guess = float(ss[best_idx[ray]])
        if s_guess <= 1e-8:
            s_guess = 0.5 * chord
        hit = _newton_polish(chart, a, b, float(angles[ray]), s_guess, step, enorm)
        if hit is None:
            continue
        phi, s, res = hit
        best_res = min(best_res, res)
        solutions.append((phi, s))
    if not solutions:
        raise ShootingFailed(
            f"no connector from {a.tolist()} to {b.tolist()} (best residual {best_res:.3e})"
        )

    solutions.sort(key=lambda t: t[1])
    d_min = solutions[0][1]
    kept: list[tuple[float, float]] = []
    g = tensor_matrix(chart, a, _unit_velocity(chart, a, solutions[0][0]))
    for phi, s in solutions:
        if s > d_min + _LENGTH_CLUSTER:
            break
        v0 = _unit_velocity(chart, a, phi)
        distinct = True
        for phi_k, _ in kept:
            dv = v0 - _unit_velocity(chart, a, phi_k)
            if math.sqrt(max(float(dv @ g @ dv), 0.0)) <= _VELOCITY_CLUSTER:
                distinct = False
                break
        if distinct:
            kept.append((phi, s))

    paths = [
        _integrate_affine(chart, a, _unit_velocity(chart, a, phi), s, step, "truncate")
        for phi, s in kept
    ]
    return MinimalConnector(
        start=a, end=b, path=paths[0], d=float(kept[0][1]), all_connectors=paths
    )


def reversed_length(chart: FinslerChart, path: ChartGeodesic) -> float:
    """Length of the path under max{F(v), F(-v)}: the symmetrized cost."""
    fwd = np.asarray(chart.F(path.x, path.v), dtype=float)
    bwd = np.asarray(chart.F(path.x, -path.v), dtype=float)
    return float(simpson(np.maximum(fwd, bwd), x=path.s))


def dm(chart: FinslerChart, a, b, **kwargs) -> float:
    """Symmetrized distance max{d(a,b), d(b,a)}."""
    return max(distance(chart, a, b, **kwargs).d, distance(chart, b, a, **kwargs).d)
