"""Two-point distance on model surfaces via Clairaut reduction.

A connecting geodesic with Clairaut constant nu > 0 satisfies

    dtheta/dt = +- nu / (f sqrt(f^2 - nu^2)),
    ds/dt     =      f / sqrt(f^2 - nu^2),

on each radially monotone leg, so the two-point problem reduces to
root-finding in nu of the accumulated angle.  Legs are integrated by
Gauss-Legendre quadrature under a cubic clustering map that removes the
inverse-square-root turning-point singularity.  Candidate connectors
come in three shapes: radially monotone, inward-turning, and
outward-turning; meridian and through-pole routes are handled as
explicit special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ..errors import IntegrandSingular, ShootingFailed
from .geodesics import ModelGeodesic
from .surface import ModelPoint, ModelSurface

__all__ = ["model_distance", "length_lower_bound", "ConnectorCandidate"]

_GL_N = 64
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_GL_N)
_gl_u = 0.5 * (_gl_x + 1.0)
_gl_wu = 0.5 * _gl_w

_GL8_x, _GL8_w = np.polynomial.legendre.leggauss(8)
_gl8_u = 0.5 * (_GL8_x + 1.0)
_gl8_w = 0.5 * _GL8_w


@dataclass(frozen=True)
class ConnectorCandidate:
    """One admissible connector: shape label, Clairaut constant, data."""

    branch: str
    nu: float
    dtheta: float
    length: float


def _cluster_map(lo: float, hi: float, u: np.ndarray):
    """Cubic map [0,1] -> [lo,hi] with vanishing derivative at both ends."""
    span = hi - lo
    t = lo + span * u * u * (3.0 - 2.0 * u)
    dt = span * 6.0 * u * (1.0 - u)
    return t, dt


def _leg_integrals(
    surface: ModelSurface,
    nu: float,
    lo: float,
    hi: float,
    refined: bool = False,
    turn_at: str | None = None,
):
    """(accumulated angle, length) of one monotone leg between radii.

    When one end is an exact turning point (f = nu there), the inverse
    square root singularity is subtracted using the linear reference
    warp g(t) = nu + f'(t*) (t - t*), whose angle and length integrals
    have closed forms; only the regular difference is quadrated.  The
    remaining integrand vanishes like sqrt(t - t*), which the cubic
    clustering map renders analytic in the quadrature variable.

    With refined=True the parameter domain is split in two and each
    half gets the full rule, for cross-checking root candidates.
    """
    if hi <= lo:
        return 0.0, 0.0
    if refined:
        u = np.concatenate([0.5 * _gl_u, 0.5 + 0.5 * _gl_u])
        wu = np.concatenate([0.5 * _gl_wu, 0.5 * _gl_wu])
    else:
        u, wu = _gl_u, _gl_wu
    t, dt = _cluster_map(lo, hi, u)
    f = np.asarray(surface.f(t))
    root = np.sqrt(np.maximum(f * f - nu * nu, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        gth = np.where(root > 0.0, nu / (f * root), 0.0)
        glen = np.where(root > 0.0, f / root, 0.0)
    w = wu * dt

    if turn_at is not None:
        tstar = lo if turn_at == "lo" else hi
        p = float(surface.fp(tstar))
        span = hi - lo
        if abs(p) * span >= 1e-3 * nu:
            # subtract the linear-warp reference, add its closed form
            g = nu + abs(p) * np.abs(t - tstar)
            groot = np.sqrt(np.maximum(g * g - nu * nu, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                gth = gth - np.where(groot > 0.0, nu / (g * groot), 0.0)
                glen = glen - np.where(groot > 0.0, g / groot, 0.0)
            g_far = nu + abs(p) * span
            angle = math.acos(min(nu / g_far, 1.0)) / abs(p)
            length = math.sqrt(max(g_far * g_far - nu * nu, 0.0)) / abs(p)
            return (
                angle + float(np.sum(gth * w)),
                length + float(np.sum(glen * w)),
            )
        # waist-grazing turn: layer is wide and the plain rule is fine
    return float(np.sum(gth * w)), float(np.sum(glen * w))


def _inner_turning(surface: ModelSurface, nu: float, hint_hi: float):
    """Smallest radius where f = nu, or None when it sits below resolution."""
    f = surface.f
    floor = 1e-12
    if f(floor) >= nu:
        return None
    hi = surface.critical_radius if surface.critical_radius is not None else None
    if hi is None:
        hi = max(hint_hi, 1.0)
        for _ in range(80):
            if f(hi) >= nu:
                break
            hi *= 2.0
        else:
            return None
    if f(hi) < nu:
        return None
    return float(brentq(lambda t: f(t) - nu, floor, hi, xtol=1e-15, rtol=8.9e-16))


def _outer_turning(surface: ModelSurface, nu: float):
    """First radius beyond the waist where f drops back to nu, or None."""
    rho = surface.critical_radius
    if rho is None:
        return None
    f = surface.f
    if nu >= f(rho):
        return None
    cap = surface.t_max
    if f(cap) > nu:
        return None
    return float(brentq(lambda t: f(t) - nu, rho, cap, xtol=1e-15, rtol=8.9e-16))


def _branch_eval(
    surface: ModelSurface,
    branch: str,
    tx: float,
    ty: float,
    nu: float,
    refined: bool = False,
):
    """(dtheta, length) of the `branch`-shaped connector at Clairaut nu."""
    numax = min(surface.f(tx), surface.f(ty))
    if nu <= 0.0 or nu >= numax:
        return None
    lo, hi = (tx, ty) if tx <= ty else (ty, tx)
    if branch == "mono":
        if tx == ty:
            return None
        a1, l1 = _leg_integrals(surface, nu, lo, hi, refined)
        return a1, l1
    if branch == "inner":
        tstar = _inner_turning(surface, nu, hint_hi=lo)
        if tstar is None or tstar >= lo - 1e-15:
            return None
        a1, l1 = _leg_integrals(surface, nu, tstar, tx, refined, turn_at="lo")
        a2, l2 = _leg_integrals(surface, nu, tstar, ty, refined, turn_at="lo")
        return a1 + a2, l1 + l2
    if branch == "outer":
        tstar = _outer_turning(surface, nu)
        if tstar is None or tstar <= hi + 1e-15:
            return None
        a1, l1 = _leg_integrals(surface, nu, tx, tstar, refined, turn_at="hi")
        a2, l2 = _leg_integrals(surface, nu, ty, tstar, refined, turn_at="hi")
        return a1 + a2, l1 + l2
    raise ValueError(f"unknown branch {branch!r}")


def _nu_grid(surface: ModelSurface, tx: float, ty: float, dtheta: float) -> np.ndarray:
    """Deterministic Clairaut-constant scan grid for bracketing."""
    numax = min(surface.f(tx), surface.f(ty))
    psi = np.linspace(1e-4, 0.5 * math.pi - 1e-7, 48)
    nodes = [numax * np.sin(psi)]
    nodes.append(numax * np.logspace(-14.0, -1.2, 20))
    nodes.append(numax * (1.0 - np.logspace(-13.0, -2.0, 16)))
    # linearized seed: for nearly radial connectors dtheta ~ nu * int f^-2
    lo, hi = min(tx, ty), max(tx, ty)
    if hi > lo and dtheta > 0.0:
        t, dt = _cluster_map(lo, hi, _gl_u)
        f = np.asarray(surface.f(t))
        q0 = float(np.sum(_gl_wu * dt / (f * f)))
        if q0 > 0.0 and np.isfinite(q0):
            nu0 = dtheta / q0
            nodes.append(nu0 * np.logspace(-3.0, 3.0, 13))
    grid = np.unique(np.concatenate(nodes))
    return grid[(grid > 0.0) & (grid < numax)]


def _solve_branch(
    surface: ModelSurface, branch: str, tx: float, ty: float, dtheta: float
) -> list[ConnectorCandidate]:
    """All connectors of one shape whose accumulated angle hits dtheta.

    Roots are bracketed on the coarse rule and must survive a refined
    re-bracketing; brackets that vanish under refinement were produced
    by unresolved turning layers and are discarded.
    """
    grid = _nu_grid(surface, tx, ty, dtheta)
    if grid.size == 0:
        return []
    vals = np.full(grid.shape, np.nan)
    for i, nu in enumerate(grid):
        res = _branch_eval(surface, branch, tx, ty, nu)
        if res is not None:
            vals[i] = res[0] - dtheta

    def refined_residual(nu):
        res = _branch_eval(surface, branch, tx, ty, nu, refined=True)
        return np.nan if res is None else res[0] - dtheta

    def confirm(lo: float, hi: float):
        ra, rb = refined_residual(lo), refined_residual(hi)
        if not (np.isfinite(ra) and np.isfinite(rb)):
            return None
        if ra == 0.0:
            return lo
        if rb == 0.0:
            return hi
        if ra * rb > 0.0:
            return None
        return brentq(refined_residual, lo, hi, xtol=1e-280, rtol=8.9e-16)

    out = []
    n = len(grid)
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a != 0.0 and a * b >= 0.0:
            continue
        root = confirm(float(grid[i]), float(grid[i + 1]))
        if root is None:
            # a root sitting on a grid node can drift across it under
            # refinement; retry once on the node-widened interval
            lo_i = i - 1 if i > 0 and np.isfinite(vals[i - 1]) else i
            hi_i = i + 2 if i + 2 < n and np.isfinite(vals[i + 2]) else i + 1
            if (lo_i, hi_i) != (i, i + 1):
                root = confirm(float(grid[lo_i]), float(grid[hi_i]))
        if root is None:
            continue
        if any(abs(root - c.nu) <= 1e-9 * max(root, c.nu) for c in out):
            continue
        res = _branch_eval(surface, branch, tx, ty, float(root), refined=True)
        if res is None:
            continue
        out.append(ConnectorCandidate(branch, float(root), res[0], res[1]))
    return out


def _wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]."""
    y = math.fmod(x + math.pi, 2.0 * math.pi)
    if y <= 0.0:
        y += 2.0 * math.pi
    return y - math.pi


def _leg_path(surface: ModelSurface, nu, r_from, r_to, n_panels):
    """Cumulative samples along one leg traversed from r_from to r_to.

    Returns (t, dtheta_cum, s_cum) at panel boundaries in traversal
    order, including both ends.
    """
    lo, hi = (r_from, r_to) if r_from <= r_to else (r_to, r_from)
    uu = np.linspace(0.0, 1.0, n_panels + 1)
    th_panels = np.empty(n_panels)
    len_panels = np.empty(n_panels)
    for j in range(n_panels):
        u = uu[j] + (uu[j + 1] - uu[j]) * _gl8_u
        t, dt = _cluster_map(lo, hi, u)
        f = np.asarray(surface.f(t))
        root = np.sqrt(np.maximum(f * f - nu * nu, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            gth = np.where(root > 0.0, nu / (f * root), 0.0)
            glen = np.where(root > 0.0, f / root, 0.0)
        w = _gl8_w * dt * (uu[j + 1] - uu[j])
        th_panels[j] = np.sum(gth * w)
        len_panels[j] = np.sum(glen * w)
    t_bound, _ = _cluster_map(lo, hi, uu)
    th_cum = np.concatenate([[0.0], np.cumsum(th_panels)])
    s_cum = np.concatenate([[0.0], np.cumsum(len_panels)])
    if r_from <= r_to:
        return t_bound, th_cum, s_cum
    # traverse downward: reverse order, integrals measured from the top
    t_rev = t_bound[::-1]
    th_rev = th_cum[-1] - th_cum[::-1]
    s_rev = s_cum[-1] - s_cum[::-1]
    return t_rev, th_rev, s_rev


def _branch_geodesic(
    surface: ModelSurface,
    cand: ConnectorCandidate,
    a: ModelPoint,
    b: ModelPoint,
    orient: float,
    n_panels: int = 64,
) -> ModelGeodesic:
    """Sample the winning connector into a ModelGeodesic."""
    nu = cand.nu
    tx, ty = a.t, b.t
    if cand.branch == "mono":
        legs = [(tx, ty)]
    elif cand.branch == "inner":
        tstar = _inner_turning(surface, nu, hint_hi=min(tx, ty))
        legs = [(tx, tstar), (tstar, ty)]
    else:
        tstar = _outer_turning(surface, nu)
        legs = [(tx, tstar), (tstar, ty)]

    t_all, th_all, s_all = [], [], []
    s_off, th_off = 0.0, 0.0
    for j, (r_from, r_to) in enumerate(legs):
        t_leg, th_leg, s_leg = _leg_path(surface, nu, r_from, r_to, n_panels)
        start_k = 1 if j > 0 else 0  # joint sample appears once
        t_all.append(t_leg[start_k:])
        th_all.append(th_off + th_leg[start_k:])
        s_all.append(s_off + s_leg[start_k:])
        th_off += th_leg[-1]
        s_off += s_leg[-1]
    t_arr = np.concatenate(t_all)
    th_arr = a.theta + orient * np.concatenate(th_all)
    s_arr = np.concatenate(s_all)

    f_arr = np.asarray(surface.f(t_arr))
    root = np.sqrt(np.maximum(f_arr * f_arr - nu * nu, 0.0))
    tp = root / f_arr
    # radial velocity sign per leg: increasing or decreasing radius
    signs = np.ones_like(t_arr)
    idx = 0
    for j, (r_from, r_to) in enumerate(legs):
        count = n_panels + 1 if j == 0 else n_panels
        sgn = 1.0 if r_to >= r_from else -1.0
        signs[idx : idx + count] = sgn
        idx += count
    tp = tp * signs
    thp = orient * nu / (f_arr * f_arr)

    psi = math.atan2(nu / surface.f(tx), float(tp[0]))
    return ModelGeodesic(
        start=a,
        psi=psi,
        clairaut=nu,
        s=s_arr,
        t=t_arr,
        theta=th_arr,
        tp=tp,
        thetap=thp,
        length=cand.length,
        branch=cand.branch,
    )


def _meridian_geodesic(surface, a: ModelPoint, b: ModelPoint, n: int = 129) -> ModelGeodesic:
    t_arr = np.linspace(a.t, b.t, n)
    s_arr = np.abs(t_arr - a.t)
    sgn = 1.0 if b.t >= a.t else -1.0
    return ModelGeodesic(
        start=a,
        psi=0.0 if sgn > 0 else math.pi,
        clairaut=0.0,
        s=s_arr,
        t=t_arr,
        theta=np.full(n, a.theta),
        tp=np.full(n, sgn),
        thetap=np.zeros(n),
        length=abs(b.t - a.t),
        branch="meridian",
    )


def _pole_geodesic(surface, a: ModelPoint, b: ModelPoint, orient: float, n: int = 65) -> ModelGeodesic:
    """Concatenated meridians through the pole; theta jumps by pi there."""
    t_in = np.linspace(a.t, 0.0, n)
    t_out = np.linspace(0.0, b.t, n)[1:]
    t_arr = np.concatenate([t_in, t_out])
    s_arr = np.concatenate([a.t - t_in, a.t + t_out])
    th_arr = np.concatenate(
        [np.full(n, a.theta), np.full(n - 1, a.theta + orient * math.pi)]
    )
    tp = np.concatenate([np.full(n, -1.0), np.full(n - 1, 1.0)])
    return ModelGeodesic(
        start=a,
        psi=math.pi,
        clairaut=0.0,
        s=s_arr,
        t=t_arr,
        theta=th_arr,
        tp=tp,
        thetap=np.zeros(2 * n - 1),
        length=a.t + b.t,
        branch="pole",
    )


_BRANCH_ORDER = {"mono": 0, "inner": 1, "outer": 2, "pole": 3}


def _seam_candidate(surface: ModelSurface, tx: float, ty: float, adth: float):
    """Connector tangential at its min-f endpoint, where branches meet.

    The mono family is open at nu = min(f(tx), f(ty)) and the dipping
    family is open at the same value from the other side, so targets
    inside the sliver between their angle ranges bracket no root.  The
    seam path itself is evaluated directly; it only counts when its
    accumulated angle lands within the engine's angle acceptance.
    """
    if abs(tx - ty) <= 1e-14:
        return None
    lo, hi = (tx, ty) if tx < ty else (ty, tx)
    f_lo, f_hi = float(surface.f(lo)), float(surface.f(hi))
    nu = min(f_lo, f_hi)
    probe = np.asarray(surface.f(np.linspace(lo, hi, 257)))
    if float(probe.min()) < nu * (1.0 - 1e-12):
        return None
    mid = 0.5 * (lo + hi)
    a1, l1 = _leg_integrals(
        surface, nu, lo, mid, refined=True, turn_at="lo" if f_lo <= f_hi else None
    )
    a2, l2 = _leg_integrals(
        surface, nu, mid, hi, refined=True, turn_at="hi" if f_hi <= f_lo else None
    )
    dth_total = a1 + a2
    if not math.isfinite(dth_total) or abs(dth_total - adth) > 1e-6:
        return None
    return ConnectorCandidate("mono", nu, dth_total, l1 + l2)


def connector_candidates(
    surface: ModelSurface, a: ModelPoint, b: ModelPoint, include_pole: bool = True
) -> list[ConnectorCandidate]:
    """All connector candidates between a and b, sorted by length."""
    surface.check_point(a)
    surface.check_point(b)
    dth = _wrap_angle(b.theta - a.theta)
    adth = abs(dth)
    cands: list[ConnectorCandidate] = []
    if adth <= 1e-14:
        cands.append(ConnectorCandidate("meridian", 0.0, 0.0, abs(b.t - a.t)))
    else:
        for branch in ("mono", "inner", "outer"):
            cands.extend(_solve_branch(surface, branch, a.t, b.t, adth))
        seam = _seam_candidate(surface, a.t, b.t, adth)
        if seam is not None:
            cands.append(seam)
        if include_pole and abs(adth - math.pi) <= 1e-9:
            cands.append(ConnectorCandidate("pole", 0.0, math.pi, a.t + b.t))
    cands.sort(key=lambda c: (c.length, _BRANCH_ORDER.get(c.branch, 9), c.nu))
    return cands


def model_distance(
    surface: ModelSurface,
    a: ModelPoint,
    b: ModelPoint,
    path: bool = True,
    include_pole: bool = True,
):
    """Minimal connecting geodesic between two points.

    Returns (d, geodesic); with path=False the geodesic is None and
    only the length-bearing data is computed.  Raises ShootingFailed
    when no connector shape reaches the target angular separation.
    """
    dth = _wrap_angle(b.theta - a.theta)
    adth = abs(dth)
    orient = 1.0 if dth >= 0.0 else -1.0
    cands = connector_candidates(surface, a, b, include_pole=include_pole)
    if not cands:
        raise ShootingFailed(
            f"no connector found for radii ({a.t:.6g}, {b.t:.6g}), dtheta = {adth:.6g}"
        )
    best = cands[0]
    if best.branch not in ("meridian", "pole") and abs(best.dtheta - adth) > 1e-6:
        raise ShootingFailed(
            f"connector angle residual {abs(best.dtheta - adth):.3g} exceeds 1e-6"
        )
    if not path:
        return best.length, None
    if best.branch == "meridian":
        geo = _meridian_geodesic(surface, a, b)
    elif best.branch == "pole":
        geo = _pole_geodesic(surface, a, b, orient)
    else:
        geo = _branch_geodesic(surface, best, a, b, orient)
    return best.length, geo


def length_lower_bound(surface: ModelSurface, nu: float, t0: float, t1: float) -> float:
    """Lower bound for the length of a radially monotone geodesic segment.

    Evaluates (t1 - t0) + (nu^2 / 2) * int_{t0}^{t1} dt / (f sqrt(f^2 - nu^2))
    by adaptive quadrature; the integrand must stay regular, so f - nu
    is required to be at least 1e-8 on the whole interval.
    """
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    if nu < 0.0:
        raise ValueError("nu must be nonnegative")
    if nu == 0.0:
        return t1 - t0
    ts = np.linspace(t0, t1, 2001)
    fs = np.asarray(surface.f(ts))
    if np.min(fs - nu) < 1e-8:
        t_bad = float(ts[np.argmin(fs - nu)])
        raise IntegrandSingular(
            f"f - nu = {float(np.min(fs - nu)):.3g} near t = {t_bad:.6g}"
        )

    def integrand(t):
        f = surface.f(t)
        return 1.0 / (f * math.sqrt(f * f - nu * nu))

    val, _ = quad(integrand, t0, t1, limit=200)
    return (t1 - t0) + 0.5 * nu * nu * val
