"""Broken geodesic chains laid panel by panel on a model surface.

Each panel is a comparison triangle sharing its pole sides with its
neighbors; laying them side by side accumulates angular offsets and
produces the broken geodesic along the outer sides.  A single minimal
geodesic shot between the chain's endpoints must under-pass the chain:
shorter, radially below at matched angle, and with its rotational
invariant small enough to satisfy the quadratic distance estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from ..errors import HingeViolated, NotAdmissible
from ..model_surface import ModelGeodesic, ModelPoint, ModelSurface, model_distance
from .triangles import (
    ComparisonTriangle,
    build_comparison_triangle,
    comparison_triangle_from_sweep,
)

__all__ = ["ChainReport", "broken_geodesic_chain", "chain_from_geodesic"]

_HINGE_SLACK = 1e-6
_UNDER_SLACK = 1e-6


@dataclass(frozen=True)
class ChainReport:
    """Panels, hinge certificates, and the under-passing geodesic."""

    radii: list
    sides: list
    panels: list
    theta_offsets: list
    hinge_sums: list
    xi_theta: np.ndarray = field(repr=False)
    xi_t: np.ndarray = field(repr=False)
    xi_length: float
    eta: ModelGeodesic = field(repr=False)
    eta_length: float
    nu: float
    bound_lhs: float
    bound_rhs: float
    passes_under: bool
    under_excess: float

    @property
    def bound_holds(self) -> bool:
        return self.bound_lhs >= self.bound_rhs

    @property
    def length_ok(self) -> bool:
        return self.eta_length <= self.xi_length + _UNDER_SLACK


def _clairaut_estimate(model: ModelSurface, nu: float, t_lo: float, t_hi: float) -> float:
    """nu^2 * integral of f^-2 over [t_lo, t_hi], evaluated in logs.

    Along a geodesic with invariant nu the integrand is sin^2 of the
    meridian angle, bounded by one, so the log-space form never
    overflows even when f underflows the square.
    """
    if nu <= 0.0 or t_hi <= t_lo:
        return 0.0
    ts = np.linspace(t_lo, t_hi, 2001)
    log_ratio = math.log(nu) - np.log(np.asarray(model.f(ts), dtype=float))
    return float(np.trapezoid(np.exp(2.0 * log_ratio), ts))


_PROFILE_N = 8193


def _clairaut_pivot(model: ModelSurface, nu: float, t_seed: float):
    """Radius where f crosses the Clairaut level, by Newton from t_seed."""
    t = t_seed
    for _ in range(8):
        fp = float(model.fp(t))
        if abs(fp) < 1e-10:
            return None
        step = (float(model.f(t)) - nu) / fp
        t -= step
        if abs(step) < 1e-14 * max(1.0, abs(t)):
            break
    if not math.isfinite(t) or abs(float(model.f(t)) - nu) > 1e-12 * nu:
        return None
    return t


def _tangent_leg_theta(model: ModelSurface, nu: float, lo: float, hi: float, at_lo: bool):
    """Sweep samples for a leg grazing the Clairaut level at one end.

    Substituting t = pivot +/- u^2 absorbs the inverse square root at
    the tangency, so Simpson sees a smooth integrand however close the
    endpoint sits to the turning radius.
    """
    t_end = lo if at_lo else hi
    pivot = _clairaut_pivot(model, nu, t_end)
    if pivot is None:
        return None
    # the tangency must sit at or just outside the grazing end
    if at_lo:
        pivot = min(pivot, lo)
        if lo - pivot > 0.5 * (hi - lo):
            return None
        u = np.linspace(math.sqrt(lo - pivot), math.sqrt(hi - pivot), _PROFILE_N)
        t = pivot + u * u
    else:
        pivot = max(pivot, hi)
        if pivot - hi > 0.5 * (hi - lo):
            return None
        u = np.linspace(math.sqrt(pivot - hi), math.sqrt(pivot - lo), _PROFILE_N)
        t = pivot - u * u
    f = np.asarray(model.f(t), dtype=float)
    gap2 = f * f - nu * nu
    # the subtraction cancels catastrophically within ~1e3 ulp of the
    # pivot, so nodes under the floor take the analytic tangency limit
    grazing = gap2 <= 2.2e-13 * nu * nu
    if int(np.count_nonzero(grazing)) > 8:
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 2.0 * u * nu / (f * np.sqrt(np.maximum(gap2, 0.0)))
    g[grazing] = math.sqrt(2.0 / (nu * abs(float(model.fp(pivot)))))
    if not np.all(np.isfinite(g)):
        return None
    th = cumulative_simpson(g, x=u, initial=0.0)
    if at_lo:
        return th, t
    return (th[-1] - th)[::-1], t[::-1]


def _leg_profile(model: ModelSurface, nu: float, t_from: float, t_to: float):
    """Fine (theta, t) samples of one monotone Clairaut leg.

    Theta accumulates from zero in traversal order; cumulative Simpson
    on a uniform radius grid keeps the sweep relatively accurate even
    when the integrand spans hundreds of orders of magnitude.  Legs
    grazing the Clairaut level at an endpoint switch to a square-root
    substitution there.  Returns None when neither quadrature applies,
    so callers can fall back to realized samples.
    """
    lo, hi = (t_from, t_to) if t_from <= t_to else (t_to, t_from)
    if not hi > lo:
        return None
    gap_lo = float(model.f(lo)) ** 2 - nu * nu
    gap_hi = float(model.f(hi)) ** 2 - nu * nu
    near = 1e-2 * nu * nu
    pair = None
    if gap_lo <= 1e-9 * nu * nu and gap_hi <= 1e-9 * nu * nu:
        return None
    if min(gap_lo, gap_hi) <= near:
        pair = _tangent_leg_theta(model, nu, lo, hi, at_lo=gap_lo <= gap_hi)
    if pair is None:
        t = np.linspace(lo, hi, _PROFILE_N)
        f = np.asarray(model.f(t), dtype=float)
        gap2 = f * f - nu * nu
        if np.any(gap2 <= 0.0):
            return None
        slope = nu / (f * np.sqrt(gap2))
        if not np.all(np.isfinite(slope)):
            return None
        pair = cumulative_simpson(slope, x=t, initial=0.0), t
    th, t = pair
    if t_from <= t_to:
        return th, t
    return (th[-1] - th)[::-1], t[::-1]


def _turning_profile(model: ModelSurface, nu: float, t_arr: np.ndarray):
    """Profile of a connector that reverses radial direction once."""
    t0, t1 = float(t_arr[0]), float(t_arr[-1])
    k_min, k_max = int(np.argmin(t_arr)), int(np.argmax(t_arr))
    dips = 0 < k_min < t_arr.size - 1
    bulges = 0 < k_max < t_arr.size - 1
    if dips == bulges:
        return None
    turn = _clairaut_pivot(model, nu, float(t_arr[k_min if dips else k_max]))
    if turn is None:
        return None
    first = _leg_profile(model, nu, t0, turn)
    second = _leg_profile(model, nu, turn, t1)
    if first is None or second is None:
        return None
    th_a, t_a = first
    th_b, t_b = second
    theta = np.concatenate([th_a, th_a[-1] + th_b[1:]])
    return theta, np.concatenate([t_a, t_b[1:]])


def _connector_profile(model: ModelSurface, geo: ModelGeodesic):
    """(theta, t) profile of a realized connector, theta ascending.

    Monotone and single-turn legs are requadrated at certificate
    resolution from the connector's rotational invariant; anything
    else keeps its realized samples.
    """
    nu = abs(float(geo.clairaut))
    t_arr = np.asarray(geo.t, dtype=float)
    if nu <= 0.0:
        return np.array([0.0, 0.0]), np.array([t_arr[0], t_arr[-1]])
    dt = np.diff(t_arr)
    if np.all(dt >= -1e-12) or np.all(dt <= 1e-12):
        prof = _leg_profile(model, nu, float(t_arr[0]), float(t_arr[-1]))
    else:
        prof = _turning_profile(model, nu, t_arr)
    if prof is not None:
        return prof
    th = np.abs(np.asarray(geo.theta, dtype=float) - float(geo.theta[0]))
    return np.maximum.accumulate(th), t_arr


def _profile_radius(theta: np.ndarray, t: np.ndarray, grid: np.ndarray):
    """Evaluate t(theta) on the grid by monotone cubic interpolation."""
    keep = np.concatenate([[True], np.diff(theta) > 0.0])
    th, tt = theta[keep], t[keep]
    if th.size < 2:
        return np.full(grid.shape, float(tt[0]))
    spline = PchipInterpolator(th, tt)
    return np.asarray(spline(np.clip(grid, th[0], th[-1])), dtype=float)


def _merge_panels(panels: list[ComparisonTriangle], signs: list[float]):
    """Concatenate realized sides with cumulative signed offsets."""
    thetas, radii = [], []
    offsets = [0.0]
    for panel, sign in zip(panels, signs):
        off = offsets[-1]
        if panel.geodesic is None:
            # colinear panel: the side runs along the meridian
            t_grid = np.linspace(panel.t_x, panel.t_y, 65)
            th_grid = np.full_like(t_grid, off)
        else:
            t_grid = panel.geodesic.t
            th_grid = sign * panel.geodesic.theta + off
        thetas.append(th_grid)
        radii.append(t_grid)
        offsets.append(off + sign * panel.delta_theta)
    return np.concatenate(thetas), np.concatenate(radii), offsets


def broken_geodesic_chain(model: ModelSurface, panel_sides) -> ChainReport:
    """Assemble the chain, check hinges, and shoot the under-passer.

    panel_sides lists (t_start, t_end, side) per panel, optionally
    extended to (t_start, t_end, side, sweep) with a signed angular
    sweep pinning the panel directly; consecutive panels must share
    their meridian radius.  A hinge whose two adjacent angles sum past
    pi is a construction contradiction and raises HingeViolated rather
    than producing a report.
    """
    rows = []
    for row in panel_sides:
        row = tuple(float(v) for v in row)
        if len(row) == 3:
            rows.append(row + (None,))
        elif len(row) == 4:
            rows.append(row)
        else:
            raise ValueError("panels are (t_start, t_end, side[, sweep]) tuples")
    panel_sides = rows
    if not panel_sides:
        raise ValueError("chain needs at least one panel")
    for (_, t_end, _, _), (t_start, _, _, _) in zip(panel_sides, panel_sides[1:]):
        if abs(t_end - t_start) > 1e-12:
            raise ValueError("consecutive panels must share their meridian radius")

    panels, signs = [], []
    for idx, (t_a, t_b, side, sweep) in enumerate(panel_sides):
        try:
            if sweep is None:
                panels.append(build_comparison_triangle(model, t_a, t_b, side))
                signs.append(1.0)
            else:
                panels.append(
                    comparison_triangle_from_sweep(model, t_a, t_b, abs(sweep))
                )
                signs.append(-1.0 if sweep < 0.0 else 1.0)
                realized = panels[-1].realized_side
                if abs(realized - side) > 1e-6 * max(1.0, side):
                    raise NotAdmissible(
                        f"side {side:.6g} inconsistent with sweep "
                        f"{sweep:.6g} (realizes {realized:.6g})"
                    )
        except NotAdmissible as err:
            raise NotAdmissible(f"panel {idx}: {err}") from err

    hinge_sums = []
    for idx in range(len(panels) - 1):
        total = panels[idx].angle_y + panels[idx + 1].angle_x
        hinge_sums.append(total)
        if total > math.pi + _HINGE_SLACK:
            raise HingeViolated(
                f"hinge {idx}: adjacent angles sum to {total:.8f} > pi"
            )

    xi_theta, xi_t, offsets = _merge_panels(panels, signs)
    xi_length = sum(side for _, _, side, _ in panel_sides)
    start = ModelPoint(panel_sides[0][0], 0.0)
    end = ModelPoint(panel_sides[-1][1], offsets[-1])
    eta_length, eta = model_distance(model, start, end)
    nu = abs(float(eta.clairaut))

    t_lo = float(np.min(eta.t))
    t_hi = float(np.max(eta.t))
    bound_lhs = 4.0 * panel_sides[0][0]
    bound_rhs = _clairaut_estimate(model, nu, t_lo, t_hi)

    # under-passing certificate on a shared angular grid; chains with
    # no sweep or mixed winding senses fall back to matched arclength
    sweep = offsets[-1]
    eta_sweep = float(eta.theta[-1] - eta.theta[0])
    orient = -1.0 if sweep < 0.0 else 1.0
    aligned = all(
        orient * sg * panel.delta_theta >= -1e-15
        for panel, sg in zip(panels, signs)
    )
    if abs(sweep) > 1e-9 and abs(eta_sweep) > 1e-9 and aligned:
        th_pieces, t_pieces = [], []
        off = 0.0
        for panel, sg in zip(panels, signs):
            if panel.geodesic is None:
                th, tt = np.array([0.0, 0.0]), np.array([panel.t_x, panel.t_y])
            else:
                th, tt = _connector_profile(model, panel.geodesic)
            th_pieces.append(off + th)
            t_pieces.append(tt)
            off += panel.delta_theta
        xi_prof_theta = np.concatenate(th_pieces)
        xi_prof_t = np.concatenate(t_pieces)
        eta_th, eta_t = _connector_profile(model, eta)
        hi = min(abs(sweep), abs(eta_sweep))
        # the sweep piles up where the warp collapses, so the shared
        # grid is geometric to cover every angular scale
        grid = np.geomspace(hi * 1e-9, hi, 257)
        t_xi = _profile_radius(xi_prof_theta, xi_prof_t, grid)
        t_eta = _profile_radius(eta_th, eta_t, grid)
        excess = float(np.max(t_eta - t_xi))
    else:
        grid = np.linspace(0.0, min(xi_length, eta.length), 257)
        f_mid = np.asarray(model.f(0.5 * (xi_t[1:] + xi_t[:-1])), dtype=float)
        s_xi = np.concatenate(
            [[0.0], np.cumsum(np.hypot(np.diff(xi_t), f_mid * np.diff(xi_theta)))]
        )
        t_xi = np.interp(grid, s_xi, xi_t)
        t_eta = np.interp(grid, eta.s, eta.t)
        excess = float(np.max(t_eta - t_xi))

    return ChainReport(
        radii=[panel_sides[0][0]] + [b for _, b, _, _ in panel_sides],
        sides=[c for _, _, c, _ in panel_sides],
        panels=panels,
        theta_offsets=offsets,
        hinge_sums=hinge_sums,
        xi_theta=xi_theta,
        xi_t=xi_t,
        xi_length=xi_length,
        eta=eta,
        eta_length=eta_length,
        nu=nu,
        bound_lhs=bound_lhs,
        bound_rhs=bound_rhs,
        passes_under=excess <= _UNDER_SLACK,
        under_excess=excess,
    )


def chain_from_geodesic(model: ModelSurface, geodesic: ModelGeodesic, k: int) -> list:
    """Panel data from an equal-arclength subdivision of a geodesic.

    Chord lengths are measured with the distance engine and each panel
    carries its signed sweep, so feeding a minimizing geodesic back
    through broken_geodesic_chain reproduces it panel by panel even
    when the winding cost is far below float resolution of the sides.
    """
    if k < 1:
        raise ValueError("need at least one panel")
    s_nodes = np.linspace(0.0, float(geodesic.s[-1]), k + 1)
    t_nodes = np.interp(s_nodes, geodesic.s, geodesic.t)
    th_nodes = np.interp(s_nodes, geodesic.s, geodesic.theta)
    nu = abs(float(geodesic.clairaut))
    t_samples = np.asarray(geodesic.t, dtype=float)
    dt = np.diff(t_samples)
    if nu > 0.0 and (np.all(dt >= -1e-12) or np.all(dt <= 1e-12)):
        prof = _leg_profile(model, nu, float(t_samples[0]), float(t_samples[-1]))
    elif nu > 0.0:
        prof = _turning_profile(model, nu, t_samples)
    else:
        prof = None
    if prof is not None:
        # requadrate the node sweeps so each panel stays relatively
        # accurate even where the winding is minute
        th_prof, t_prof = prof
        sgn = 1.0 if float(geodesic.theta[-1]) >= float(geodesic.theta[0]) else -1.0
        swept = np.empty_like(t_nodes)
        d_prof = np.diff(t_prof)
        if np.all(d_prof >= 0.0) or np.all(d_prof <= 0.0):
            order = np.argsort(t_prof)
            swept[:] = np.interp(t_nodes, t_prof[order], th_prof[order])
        else:
            # one radial turn: invert each leg of the profile on its
            # own side of the turn so nodes keep on-curve sweeps
            falls = t_prof[1] < t_prof[0]
            m = int(np.argmin(t_prof) if falls else np.argmax(t_prof))
            k_ext = int(np.argmin(t_samples) if falls else np.argmax(t_samples))
            s_ext = float(geodesic.s[k_ext])
            for i, (sv, tv) in enumerate(zip(s_nodes, t_nodes)):
                leg = slice(0, m + 1) if sv <= s_ext else slice(m, None)
                seg_t, seg_th = t_prof[leg], th_prof[leg]
                order = np.argsort(seg_t)
                swept[i] = np.interp(tv, seg_t[order], seg_th[order])
        th_nodes = float(geodesic.theta[0]) + sgn * swept
    panels = []
    for a, b in zip(range(k), range(1, k + 1)):
        d, _ = model_distance(
            model,
            ModelPoint(float(t_nodes[a]), float(th_nodes[a])),
            ModelPoint(float(t_nodes[b]), float(th_nodes[b])),
            path=False,
        )
        sweep = float(th_nodes[b] - th_nodes[a])
        panels.append((float(t_nodes[a]), float(t_nodes[b]), float(d), sweep))
    return panels
