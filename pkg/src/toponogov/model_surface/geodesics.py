"""Geodesic tracing on model surfaces.

Geodesics are integrated in second-order form

    t'' = f(t) f'(t) theta'^2,   theta'' = -2 (f'(t)/f(t)) t' theta',

which stays regular at turning points; the Clairaut quantity
f(t)^2 |theta'| is conserved along exact solutions and is used as the
step-quality certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PoleCrossing
from .surface import ModelPoint, ModelSurface

__all__ = ["ModelGeodesic", "integrate_geodesic", "integrate_geodesic_fan"]


@dataclass(frozen=True)
class ModelGeodesic:
    """Sampled unit-speed geodesic path on a model surface."""

    start: ModelPoint
    psi: float
    clairaut: float
    s: np.ndarray
    t: np.ndarray
    theta: np.ndarray
    tp: np.ndarray
    thetap: np.ndarray
    length: float
    branch: str = "integrated"

    def endpoint(self) -> ModelPoint:
        return ModelPoint(float(self.t[-1]), float(self.theta[-1]))

    def clairaut_drift(self, surface: ModelSurface) -> float:
        f_vals = np.asarray(surface.f(self.t))
        return float(np.max(np.abs(f_vals * f_vals * np.abs(self.thetap) - self.clairaut)))

    def unit_speed_residual(self, surface: ModelSurface) -> float:
        f_vals = np.asarray(surface.f(self.t))
        speed_sq = self.tp * self.tp + f_vals * f_vals * self.thetap * self.thetap
        return float(np.max(np.abs(speed_sq - 1.0)))


def _rk4_scalar(surface: ModelSurface, t0, th0, tp0, thp0, length, step):
    """Fixed-step integration of one geodesic, scalar fast path."""
    f, fp = surface.f, surface.fp
    n = max(1, math.ceil(length / step))
    h = length / n
    out = np.empty((n + 1, 4))
    out[0] = (t0, th0, tp0, thp0)
    t, th, tp, thp = t0, th0, tp0, thp0
    t_min = surface.t_min

    def rhs(t, tp, thp):
        fv = f(t)
        fpv = fp(t)
        return tp, thp, fv * fpv * thp * thp, -2.0 * (fpv / fv) * tp * thp

    for i in range(n):
        k1 = rhs(t, tp, thp)
        k2 = rhs(t + 0.5 * h * k1[0], tp + 0.5 * h * k1[2], thp + 0.5 * h * k1[3])
        k3 = rhs(t + 0.5 * h * k2[0], tp + 0.5 * h * k2[2], thp + 0.5 * h * k2[3])
        k4 = rhs(t + h * k3[0], tp + h * k3[2], thp + h * k3[3])
        t += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        th += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        tp += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        thp += (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        if t <= t_min:
            raise PoleCrossing(
                f"geodesic reached t = {t:.6g} <= t_min at arc length {(i + 1) * h:.6g}"
            )
        out[i + 1] = (t, th, tp, thp)
    s = np.linspace(0.0, length, n + 1)
    return s, out


def integrate_geodesic(
    surface: ModelSurface,
    start: ModelPoint,
    psi: float,
    length: float,
    step: float = 1e-3,
    drift_tol: float = 1e-6,
    max_halvings: int = 6,
) -> ModelGeodesic:
    """Trace the geodesic leaving `start` at angle psi from radial.

    The step is halved until both conservation certificates (Clairaut
    drift and unit-speed residual) fall below drift_tol.  A meridian
    heading into the pole raises PoleCrossing; callers needing paths
    through the pole concatenate meridians explicitly.
    """
    surface.check_point(start)
    if not (0.0 <= psi <= math.pi + 1e-12):
        raise ValueError("psi must lie in [0, pi]")
    if length <= 0.0:
        raise ValueError("length must be positive")
    f0 = float(surface.f(start.t))
    nu = f0 * math.sin(psi)
    tp0 = math.cos(psi)
    thp0 = math.sin(psi) / f0

    h = step
    for _ in range(max_halvings + 1):
        s, out = _rk4_scalar(surface, start.t, start.theta, tp0, thp0, length, h)
        geo = ModelGeodesic(
            start=start,
            psi=float(psi),
            clairaut=nu,
            s=s,
            t=out[:, 0],
            theta=out[:, 1],
            tp=out[:, 2],
            thetap=out[:, 3],
            length=float(length),
        )
        worst = max(geo.clairaut_drift(surface), geo.unit_speed_residual(surface))
        if worst <= drift_tol:
            return geo
        h *= 0.5
    raise RuntimeError(
        f"conservation residual stayed above {drift_tol} after {max_halvings} halvings"
    )


def integrate_geodesic_fan(
    surface: ModelSurface,
    start: ModelPoint,
    psis: np.ndarray,
    length: float,
    step: float = 1e-3,
):
    """Trace a fan of geodesics from one start, batched over launch angles.

    Returns (s, states, alive) where states has shape
    (n_steps + 1, n_psis, 4) carrying (t, theta, t', theta') and alive
    marks trajectories that never entered the pole-exclusion disc;
    states of a trajectory are frozen from the step where it dies.
    """
    surface.check_point(start)
    psis = np.asarray(psis, dtype=float)
    f, fp = surface.f, surface.fp
    f0 = float(surface.f(start.t))
    n = max(1, math.ceil(length / step))
    h = length / n
    m = len(psis)
    state = np.empty((m, 4))
    state[:, 0] = start.t
    state[:, 1] = start.theta
    state[:, 2] = np.cos(psis)
    state[:, 3] = np.sin(psis) / f0
    out = np.empty((n + 1, m, 4))
    out[0] = state
    alive = np.ones(m, dtype=bool)
    t_min = surface.t_min

    def rhs(st):
        fv = f(st[:, 0])
        fpv = fp(st[:, 0])
        d = np.empty_like(st)
        d[:, 0] = st[:, 2]
        d[:, 1] = st[:, 3]
        d[:, 2] = fv * fpv * st[:, 3] * st[:, 3]
        d[:, 3] = -2.0 * (fpv / fv) * st[:, 2] * st[:, 3]
        return d

    for i in range(n):
        prev = state.copy()
        with np.errstate(all="ignore"):
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * h * k1)
            k3 = rhs(state + 0.5 * h * k2)
            k4 = rhs(state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        died = alive & ((state[:, 0] <= t_min) | ~np.isfinite(state).all(axis=1))
        if np.any(died):
            state[died] = prev[died]
            alive = alive & ~died
        state[~alive] = prev[~alive]
        out[i + 1] = state
    s = np.linspace(0.0, length, n + 1)
    return s, out, alive
