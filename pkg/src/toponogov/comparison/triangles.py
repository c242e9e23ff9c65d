"""Forward triangles on charts and comparison triangles on model surfaces.

A forward triangle fixes an apex p plus two points x, y, studied via
the minimal connector c from x to y: its symmetrized length and the
directed angles at its two ends against p.  The comparison triangle
transplants those three side lengths onto a rotationally symmetric
model with the apex at the pole, where the angular separation that
realizes the third side is found by monotone root bracketing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import NotAdmissible, ShootingFailed
from ..finsler import (
    POLE,
    ChartGeodesic,
    FinslerChart,
    MinimalConnector,
    backward_angle,
    distance,
    forward_angle,
    integrate_geodesic,
    point_distance,
    reverse_geodesic_check,
    reversed_length,
    tangent_curvature,
    uniform_convexity_margin,
)
from ..finsler.tensor import direction_samples
from ..model_surface import (
    ModelGeodesic,
    ModelPoint,
    ModelSurface,
    classify_model,
    connector_candidates,
    model_distance,
)

__all__ = [
    "ForwardTriangle",
    "ComparisonTriangle",
    "TCTReport",
    "build_forward_triangle",
    "build_comparison_triangle",
    "verify_tct",
    "model_connector_velocities",
]

# hypothesis gates: convexity may dip to finite-difference noise, the
# tangent-curvature certificate tolerates quadrature error, and the
# reverse check reuses the geodesic integrator's own acceptance
_CONVEXITY_GATE = -1e-6
_TANGENT_GATE = 1e-4
_REVERSE_GATE = 1e-6
_SIDE_MATCH = 1e-6


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def model_connector_velocities(
    surface: ModelSurface, p: ModelPoint, z: ModelPoint, slack: float = 1e-6
) -> list[np.ndarray]:
    """Arrival velocities at z of every minimal connector from p.

    Candidates within `slack` of the minimum all count; an angular
    separation of 0 or pi doubles the non-radial ones because both
    orientations realize the same length.
    """
    cands = connector_candidates(surface, p, z)
    if not cands:
        raise ShootingFailed(f"no connector between radii {p.t:.6g} and {z.t:.6g}")
    d_min = cands[0].length
    dth = _wrap(z.theta - p.theta)
    f_z = float(surface.f(z.t))
    symmetric = abs(dth) <= 1e-12 or abs(abs(dth) - math.pi) <= 1e-9
    out: list[np.ndarray] = []
    for cand in cands:
        if cand.length > d_min + slack:
            break
        if cand.branch == "meridian":
            out.append(np.array([math.copysign(1.0, z.t - p.t), 0.0]))
            continue
        if cand.branch == "pole":
            out.append(np.array([1.0, 0.0]))
            continue
        radial = math.sqrt(max(0.0, 1.0 - (cand.nu / f_z) ** 2))
        if cand.branch == "mono":
            radial = math.copysign(radial, z.t - p.t)
        elif cand.branch == "outer":
            radial = -radial
        angular = cand.nu / (f_z * f_z)
        if symmetric and angular > 0.0:
            out.append(np.array([radial, angular]))
            out.append(np.array([radial, -angular]))
        else:
            out.append(np.array([radial, math.copysign(angular, dth)]))
    return out


def _meridian_connector(chart: FinslerChart, x: np.ndarray) -> MinimalConnector:
    """Radial connector from the pole, sampled from the chart floor up.

    The parameter is arclength from the pole itself, so the stored
    samples begin at the chart's inner t wall rather than at zero.
    """
    t_lo = chart.box[0][0]
    t_x, theta = float(x[0]), float(x[1])
    s = np.linspace(t_lo, t_x, 257)
    pts = np.stack([s, np.full_like(s, theta)], axis=-1)
    vel = np.zeros_like(pts)
    vel[:, 0] = 1.0
    path = ChartGeodesic(s=s, x=pts, v=vel, length=t_x)
    return MinimalConnector(
        start=np.array([0.0, theta]), end=np.asarray(x, dtype=float),
        path=path, d=t_x, all_connectors=[path],
    )


def _chart_connector(
    chart: FinslerChart, a: np.ndarray, b: np.ndarray, step: float
) -> MinimalConnector:
    """Minimal connector a -> b as a smooth chart geodesic.

    Model-backed charts get their launch data from the surface engine
    and re-integrate on the chart for dense Hermite sampling; anything
    else falls through to the shooting solver.
    """
    if chart.surface is None:
        return distance(chart, a, b, step=step)
    d, geo = model_distance(
        chart.surface, ModelPoint(*np.asarray(a, float)), ModelPoint(*np.asarray(b, float))
    )
    v0 = np.array([geo.tp[0], geo.thetap[0]])
    path = integrate_geodesic(chart, a, v0, d, step, on_exit="truncate")
    gap = float(np.linalg.norm(path.endpoint() - np.asarray(b, float)))
    if path.exited or gap > 1e-5:
        raise ShootingFailed(
            f"model connector leaves the chart box (endpoint gap {gap:.3e})"
        )
    return MinimalConnector(
        start=np.asarray(a, float), end=np.asarray(b, float),
        path=path, d=d, all_connectors=[path],
    )


@dataclass(frozen=True)
class ForwardTriangle:
    """Apex p with the minimal connector c between x and y."""

    p: object
    x: np.ndarray
    y: np.ndarray
    gamma: MinimalConnector
    sigma: MinimalConnector
    c: MinimalConnector
    d_px: float
    d_py: float
    lm_xy: float
    angle_x: float
    angle_y: float


def build_forward_triangle(
    chart: FinslerChart, p, x, y, *, step: float = 1e-2, h0: float = 1e-2
) -> ForwardTriangle:
    """Assemble connectors, symmetrized side length, and both angles.

    p may be the pole sentinel on a model-backed polar chart, in which
    case the apex connectors are meridians and the apex distance is
    the radial coordinate itself.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if p is POLE:
        if chart.surface is None or chart.pole_distance is None:
            raise ValueError("pole-apex triangles need a model-backed polar chart")
        gamma = _meridian_connector(chart, x)
        sigma = _meridian_connector(chart, y)
    else:
        p = np.asarray(p, dtype=float)
        gamma = _chart_connector(chart, p, x, step)
        sigma = _chart_connector(chart, p, y, step)
    c = _chart_connector(chart, x, y, step)
    d_px = point_distance(chart, p, x)
    d_py = point_distance(chart, p, y)
    lm = reversed_length(chart, c.path)
    angle_x = forward_angle(chart, p, c.path, 0.0, h0=h0)
    angle_y = backward_angle(chart, p, c.path, float(c.path.s[-1]), h0=h0)
    return ForwardTriangle(
        p=p, x=x, y=y, gamma=gamma, sigma=sigma, c=c,
        d_px=d_px, d_py=d_py, lm_xy=lm, angle_x=angle_x, angle_y=angle_y,
    )


@dataclass(frozen=True)
class ComparisonTriangle:
    """Model triangle with the apex at the pole realizing given sides."""

    t_x: float
    t_y: float
    side_xy: float
    delta_theta: float
    angle_x: float
    angle_y: float
    angle_p: float
    realized_side: float
    geodesic: ModelGeodesic | None = field(repr=False, default=None)


def build_comparison_triangle(
    model: ModelSurface, t_x: float, t_y: float, side_xy: float
) -> ComparisonTriangle:
    """Place x at (t_x, 0) and root-find the angular separation.

    The model distance between the two radii grows monotonically with
    angular separation, so a sign change brackets the realizing value;
    NotAdmissible reports side lengths outside the attainable range.
    """
    t_x, t_y, side_xy = float(t_x), float(t_y), float(side_xy)
    for t in (t_x, t_y):
        if not (model.t_min < t <= model.t_max):
            raise ValueError(f"vertex radius {t:.6g} outside the model domain")
    if side_xy <= 1e-9:
        raise NotAdmissible("third side collapses to a point")
    a = ModelPoint(t_x, 0.0)

    def gap(dtheta: float) -> float:
        d, _ = model_distance(model, a, ModelPoint(t_y, dtheta), path=False)
        return d - side_xy

    lo = abs(t_y - t_x)
    if side_xy < lo - 1e-9:
        raise NotAdmissible(
            f"side {side_xy:.6g} is shorter than the radial gap {lo:.6g}"
        )
    if side_xy <= lo + 1e-9:
        return _colinear_triangle(model, t_x, t_y, side_xy)
    hi_gap = gap(math.pi)
    if hi_gap < -1e-9:
        raise NotAdmissible(
            f"side {side_xy:.6g} exceeds the model's reach at separation pi"
        )
    if hi_gap <= 1e-9:
        dtheta = math.pi
    else:
        dtheta = float(brentq(gap, 0.0, math.pi, xtol=1e-12))
    return _realized_triangle(model, t_x, t_y, side_xy, dtheta)


def _colinear_triangle(model: ModelSurface, t_x: float, t_y: float, side_xy: float):
    """Degenerate panel whose side runs along the shared meridian."""
    outward = t_y >= t_x
    return ComparisonTriangle(
        t_x=t_x, t_y=t_y, side_xy=side_xy, delta_theta=0.0,
        angle_x=math.pi if outward else 0.0,
        angle_y=0.0 if outward else math.pi,
        angle_p=0.0, realized_side=abs(t_y - t_x), geodesic=None,
    )


def _realized_triangle(
    model: ModelSurface, t_x: float, t_y: float, side_xy: float, dtheta: float
):
    """Realize the connector at a known separation and read off angles."""
    realized, geo = model_distance(
        model, ModelPoint(t_x, 0.0), ModelPoint(t_y, dtheta)
    )
    angle_x = math.acos(float(np.clip(-geo.tp[0], -1.0, 1.0)))
    angle_y = math.acos(float(np.clip(geo.tp[-1], -1.0, 1.0)))
    return ComparisonTriangle(
        t_x=t_x, t_y=t_y, side_xy=side_xy, delta_theta=dtheta,
        angle_x=angle_x, angle_y=angle_y, angle_p=dtheta,
        realized_side=realized, geodesic=geo,
    )


def comparison_triangle_from_sweep(
    model: ModelSurface, t_x: float, t_y: float, delta_theta: float
) -> ComparisonTriangle:
    """Comparison triangle pinned by its apex sweep instead of a side.

    A nearly radial panel has a side floating point cannot tell from
    the radial gap, while its angular sweep stays perfectly
    representable; pinning the sweep keeps such panels nondegenerate.
    The stored side is the realized connector length.
    """
    t_x, t_y, delta_theta = float(t_x), float(t_y), float(delta_theta)
    for t in (t_x, t_y):
        if not (model.t_min < t <= model.t_max):
            raise ValueError(f"vertex radius {t:.6g} outside the model domain")
    if not 0.0 <= delta_theta <= math.pi:
        raise ValueError(f"sweep must lie in [0, pi], got {delta_theta:.6g}")
    if delta_theta == 0.0:
        if abs(t_y - t_x) <= 1e-9:
            raise NotAdmissible("third side collapses to a point")
        return _colinear_triangle(model, t_x, t_y, abs(t_y - t_x))
    tri = _realized_triangle(model, t_x, t_y, 0.0, delta_theta)
    return ComparisonTriangle(
        t_x=tri.t_x, t_y=tri.t_y, side_xy=tri.realized_side,
        delta_theta=tri.delta_theta, angle_x=tri.angle_x,
        angle_y=tri.angle_y, angle_p=tri.angle_p,
        realized_side=tri.realized_side, geodesic=tri.geodesic,
    )


@dataclass(frozen=True)
class TCTReport:
    """Hypothesis certificates plus angle margins for one triangle."""

    forward: ForwardTriangle
    comparison: ComparisonTriangle | None
    hypotheses: dict
    admissible: bool
    violations: tuple[str, ...]
    margin_x: float | None
    margin_y: float | None


def _apex_velocities(chart: FinslerChart, p, z: np.ndarray) -> list[np.ndarray]:
    if p is POLE:
        return [np.array([1.0, 0.0])]
    if chart.surface is not None:
        return model_connector_velocities(
            chart.surface, ModelPoint(*np.asarray(p, float)), ModelPoint(*z)
        )
    conn = distance(chart, np.asarray(p, float), z)
    return [np.asarray(path.v[-1], dtype=float) for path in conn.all_connectors]


def verify_tct(
    chart: FinslerChart,
    model: ModelSurface,
    p,
    x,
    y,
    *,
    z_samples: int = 32,
    w_samples: int = 64,
    step: float = 1e-2,
    h0: float = 1e-2,
) -> TCTReport:
    """Check the comparison hypotheses along c, then the angle bounds.

    Hypothesis failures come back in-band as a non-admissible report
    with no margins; an admissible triangle gets its model comparison
    built (NotAdmissible propagates if the sides fit no separation)
    and both angle margins reported as chart angle minus model angle.
    """
    rho = classify_model(model)["critical_radius"]
    if rho is None:
        raise ValueError("comparison model has no critical radius")
    tri = build_forward_triangle(chart, p, x, y, step=step, h0=h0)
    path = tri.c.path
    svals = np.linspace(0.0, float(path.s[-1]), z_samples)
    w_dirs = direction_samples(chart.dim, w_samples)

    clearance = math.inf
    convexity = math.inf
    tangent_max = 0.0
    for s in svals:
        z = np.asarray(path.position_at(s), dtype=float)
        clearance = min(clearance, point_distance(chart, tri.p, z) - rho)
        for v in _apex_velocities(chart, tri.p, z):
            convexity = min(convexity, uniform_convexity_margin(chart, z, v))
            for w in w_dirs:
                if abs(v[0] * w[1] - v[1] * w[0]) < 1e-6:
                    continue
                tangent_max = max(tangent_max, abs(tangent_curvature(chart, z, v, w)))
    reverse = reverse_geodesic_check(chart, path)

    hypotheses = {
        "outside_ball": clearance > 0.0,
        "convexity_margin": convexity,
        "tangent_curvature_max": tangent_max,
        "reverse_geodesic_residual": reverse.residual,
    }
    violations = []
    if not hypotheses["outside_ball"]:
        violations.append("outside_ball")
    if convexity < _CONVEXITY_GATE:
        violations.append("convexity_margin")
    if tangent_max > _TANGENT_GATE:
        violations.append("tangent_curvature_max")
    if reverse.residual > _REVERSE_GATE:
        violations.append("reverse_geodesic_residual")
    if violations:
        return TCTReport(
            forward=tri, comparison=None, hypotheses=hypotheses,
            admissible=False, violations=tuple(violations),
            margin_x=None, margin_y=None,
        )
    comp = build_comparison_triangle(model, tri.d_px, tri.d_py, tri.lm_xy)
    if abs(comp.realized_side - tri.lm_xy) > _SIDE_MATCH:
        raise NotAdmissible(
            f"comparison side realization off by {abs(comp.realized_side - tri.lm_xy):.3e}"
        )
    return TCTReport(
        forward=tri, comparison=comp, hypotheses=hypotheses,
        admissible=True, violations=(),
        margin_x=tri.angle_x - comp.angle_x,
        margin_y=tri.angle_y - comp.angle_y,
    )
