"""Conjugate points, cut locus, and the acute-angle property.

On a rotationally symmetric surface with decaying warp, the cut locus
of a point off the pole is either empty or a ray on the opposite
meridian.  Its start is located by comparing the through-pole route
against winding connectors; the first conjugate point along the radial
geodesic is found from the scalar Jacobi equation J'' + K J = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import HypothesisViolated, ShootingFailed
from .distance import model_distance
from .surface import ModelPoint, ModelSurface

__all__ = [
    "first_conjugate_point",
    "cut_locus",
    "CutLocus",
    "check_angle_lemma",
    "AngleLemmaReport",
]


def first_conjugate_point(
    surface: ModelSurface,
    t_start: float,
    step: float = 1e-4,
    budget: float | None = None,
):
    """Arc length to the first conjugate point along the inward radial ray.

    The unit-speed geodesic leaves (t_start, theta) toward the pole,
    passes through it at s = t_start, and continues on the opposite
    meridian.  Radial curvature seen along it is K(s) = G(|t_start - s|).
    Returns the first zero s* > 0 of the Jacobi field with J(0) = 0,
    J'(0) = 1, or None if no zero occurs within the budget (default:
    t_start + t_max, the far edge of the chart).
    """
    if budget is None:
        budget = t_start + surface.t_max
    n = int(math.ceil(budget / step))
    s_nodes = np.arange(2 * n + 1) * (0.5 * step)  # nodes and half-nodes
    k_nodes = np.asarray(surface.G(np.abs(t_start - s_nodes)), dtype=float)

    j, jp = 0.0, 1.0
    h = step
    prev = (0.0, j, jp)
    for i in range(n):
        k0 = k_nodes[2 * i]
        km = k_nodes[2 * i + 1]
        k1 = k_nodes[2 * i + 2]
        # RK4 for (J, J')' = (J', -K J)
        a1, b1 = jp, -k0 * j
        a2, b2 = jp + 0.5 * h * b1, -km * (j + 0.5 * h * a1)
        a3, b3 = jp + 0.5 * h * b2, -km * (j + 0.5 * h * a2)
        a4, b4 = jp + h * b3, -k1 * (j + h * a3)
        j_new = j + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        jp_new = jp + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        s_new = (i + 1) * h
        if j_new <= 0.0 and s_new > step:
            s0, j0, jp0 = prev
            return _hermite_zero(s0, j0, jp0, s_new, j_new, jp_new)
        prev = (s_new, j_new, jp_new)
        j, jp = j_new, jp_new
    return None


def _hermite_zero(s0, j0, jp0, s1, j1, jp1):
    """Zero of the cubic Hermite interpolant on a bracketing step."""
    h = s1 - s0

    def val(s):
        u = (s - s0) / h
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return h00 * j0 + h10 * h * jp0 + h01 * j1 + h11 * h * jp1

    if j1 == 0.0:
        return float(s1)
    return float(brentq(val, s0, s1, xtol=1e-14))


@dataclass(frozen=True)
class CutLocus:
    """Cut locus of a base point: empty, or a ray on the opposite meridian."""

    empty: bool
    theta: float | None = None
    t_cut: float | None = None


def _band_distance(surface: ModelSurface, a: ModelPoint, b: ModelPoint):
    """Shortest winding connector, pole route excluded; None if none exists."""
    try:
        d, _ = model_distance(surface, a, b, path=False, include_pole=False)
    except ShootingFailed:
        return None
    return d


def cut_locus(
    surface: ModelSurface,
    point: ModelPoint,
    probe_radius: float | None = None,
    tol: float = 1e-5,
) -> CutLocus:
    """Locate the cut locus of `point` as a ray on the opposite meridian.

    A radius t on the opposite meridian lies past the cut point exactly
    when some winding connector beats the through-pole route of length
    t_0 + t.  The ray start is found by bisection on that indicator.
    `probe_radius` sets where the initial strictly-cut probe is taken;
    if the probe is not cut the locus is reported empty.
    """
    surface.check_point(point)
    t0 = point.t
    theta_opp = point.theta + math.pi
    if probe_radius is None:
        probe_radius = min(surface.t_max, max(t0 + 2.0, 3.0))

    def is_cut(t: float) -> bool:
        d_band = _band_distance(surface, point, ModelPoint(t, theta_opp))
        if d_band is None:
            return False
        return (t0 + t) - d_band > 1e-9

    if not is_cut(probe_radius):
        return CutLocus(empty=True)
    lo, hi = surface.t_min + 1e-9, probe_radius
    if is_cut(lo):
        return CutLocus(empty=False, theta=theta_opp, t_cut=lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_cut(mid):
            hi = mid
        else:
            lo = mid
    return CutLocus(empty=False, theta=theta_opp, t_cut=0.5 * (lo + hi))


@dataclass(frozen=True)
class AngleLemmaReport:
    """Outcome of the acute-angle check for a pair beyond the waist."""

    angle_at_x: float
    passes: bool
    min_t: float


def check_angle_lemma(
    surface: ModelSurface, x: ModelPoint, y: ModelPoint
) -> AngleLemmaReport:
    """Check the acute-angle property of the minimal connector.

    Both endpoints must lie strictly beyond the waist radius and be
    ordered x.t <= y.t.  The check passes when the minimal geodesic
    from x to y leaves x at an angle below pi/2 from the outward
    radial direction and never dips to the waist radius or below.
    """
    rho = surface.critical_radius
    if rho is None:
        raise HypothesisViolated("surface has no waist radius")
    if x.t <= rho or y.t <= rho:
        raise HypothesisViolated(
            f"both radii must exceed the waist radius {rho:.6g}"
        )
    if x.t > y.t:
        raise HypothesisViolated("expected x.t <= y.t")
    _, geo = model_distance(surface, x, y, path=True)
    min_t = float(np.min(geo.t))
    passes = geo.psi < 0.5 * math.pi and min_t > rho
    return AngleLemmaReport(angle_at_x=geo.psi, passes=passes, min_t=min_t)
