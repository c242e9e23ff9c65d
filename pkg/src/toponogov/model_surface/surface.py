"""Model surface container: warp + curvature + waist classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from ..errors import MultipleCriticalRadii, PoleTooClose
from .warps import (
    BUILTIN_WARPS,
    RadialCurvature,
    Warp,
    curvature_from_warp,
    get_warp,
    validate_warp,
)

__all__ = [
    "ModelPoint",
    "ModelSurface",
    "make_model",
    "classify_model",
    "clairaut_constant",
    "surface_to_record",
    "surface_from_record",
]


@dataclass(frozen=True)
class ModelPoint:
    """Point in geodesic polar coordinates (t, theta), t > 0."""

    t: float
    theta: float = 0.0


@dataclass(frozen=True)
class ModelSurface:
    """Surface of revolution dt^2 + f(t)^2 dtheta^2 with classification.

    t_min is the pole-exclusion radius for geodesic work; t_max the
    working truncation radius.  critical_radius is the unique zero of
    f' when one exists (the waist/bulge parallel, itself a geodesic);
    curvature_at_critical records G there without assuming its sign.
    """

    warp: Warp
    curvature: RadialCurvature
    t_min: float = 1e-3
    t_max: float = 10.0
    von_mangoldt: bool = False
    critical_radius: float | None = None
    curvature_at_critical: float | None = None

    def f(self, t):
        return self.warp.f(t)

    def fp(self, t):
        return self.warp.fp(t)

    def fpp(self, t):
        return self.warp.fpp(t)

    def G(self, t):
        return self.curvature(t)

    def check_point(self, p: ModelPoint) -> None:
        if not (self.t_min < p.t <= self.t_max):
            raise PoleTooClose(
                f"point radius {p.t} outside working range ({self.t_min}, {self.t_max}]"
            )


def _classify(
    warp: Warp,
    curvature: RadialCurvature,
    t_min: float,
    t_max: float,
    grid: np.ndarray,
    monotone_tol: float = 1e-9,
):
    fp_vals = np.asarray(warp.fp(grid))
    signs = np.sign(fp_vals)
    # treat exact zeros as the sign to their left so one root is one change
    for i in range(1, len(signs)):
        if signs[i] == 0.0:
            signs[i] = signs[i - 1]
    changes = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]
    if len(changes) > 1:
        raise MultipleCriticalRadii(
            f"warp derivative changes sign {len(changes)} times on the grid"
        )
    rho = None
    g_at_rho = None
    if len(changes) == 1:
        i = changes[0]
        rho = float(brentq(warp.fp, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
        g_at_rho = float(curvature(rho))
    g_vals = np.asarray(curvature(grid))
    von_mangoldt = bool(np.max(np.diff(g_vals)) <= monotone_tol)
    return von_mangoldt, rho, g_at_rho


def classify_model(surface: ModelSurface, grid: Iterable[float] | None = None) -> dict:
    """Report von Mangoldt monotonicity and the critical radius, if any.

    Sign changes of f' on the grid are refined by bracketed
    root-finding; more than one sign change raises
    MultipleCriticalRadii since such surfaces are outside the class
    this workbench targets.
    """
    if grid is None:
        grid = np.linspace(surface.t_min, surface.t_max, 10_000)
    grid = np.asarray(grid, dtype=float)
    von_mangoldt, rho, g_at_rho = _classify(
        surface.warp, surface.curvature, surface.t_min, surface.t_max, grid
    )
    return {"von_mangoldt": von_mangoldt, "critical_radius": rho, "curvature_at_critical": g_at_rho}


def make_model(
    warp: Warp | str,
    *,
    curvature: RadialCurvature | None = None,
    t_min: float = 1e-3,
    t_max: float = 10.0,
    grid_points: int = 10_000,
    validate: bool = True,
) -> ModelSurface:
    """Build a classified ModelSurface from a warp (builtin name or Warp).

    The curvature defaults to the warp's analytic formula when the
    family provides one, otherwise to the -f''/f ratio.  Validation
    checks the pole normalization, positivity, and the compatibility
    residual |f'' + G f| on the working grid.
    """
    if isinstance(warp, str):
        warp = get_warp(warp)
    if curvature is None:
        if warp.curvature is not None:
            curvature = RadialCurvature(
                name=f"{warp.name}-curvature",
                g=warp.curvature,
                source="analytic",
                t_max=warp.t_max,
            )
        else:
            curvature = curvature_from_warp(warp)
    if not (0.0 < t_min < t_max):
        raise ValueError("need 0 < t_min < t_max")

    grid = np.linspace(t_min, t_max, grid_points)
    if validate:
        validate_warp(warp, t_max)
        residual = np.abs(
            np.asarray(warp.fpp(grid))
            + np.asarray(curvature(grid)) * np.asarray(warp.f(grid))
        )
        allowed = 1e-6 * (1.0 + np.abs(np.asarray(warp.f(grid))))
        worst = np.max(residual - allowed)
        if worst > 0.0:
            t_bad = float(grid[np.argmax(residual - allowed)])
            raise ValueError(
                f"warp/curvature incompatible near t = {t_bad:.4g}: "
                f"|f'' + G f| exceeds tolerance by {worst:.3g}"
            )

    von_mangoldt, rho, g_at_rho = _classify(warp, curvature, t_min, t_max, grid)
    return ModelSurface(
        warp=warp,
        curvature=curvature,
        t_min=t_min,
        t_max=t_max,
        von_mangoldt=von_mangoldt,
        critical_radius=rho,
        curvature_at_critical=g_at_rho,
    )


def clairaut_constant(surface: ModelSurface, point: ModelPoint, psi: float) -> float:
    """Conserved quantity f(t) sin(psi) of the geodesic leaving `point`.

    psi is the launch angle in [0, pi] measured from the outward radial
    direction.
    """
    surface.check_point(point)
    if not (0.0 <= psi <= math.pi + 1e-12):
        raise ValueError("psi must lie in [0, pi]")
    return float(surface.f(point.t)) * math.sin(psi)


def surface_to_record(surface: ModelSurface) -> dict:
    """Serializable description; only builtin warp families round-trip."""
    if surface.warp.name not in BUILTIN_WARPS:
        raise ValueError(
            f"warp {surface.warp.name!r} is not a builtin family; cannot serialize"
        )
    return {
        "family": surface.warp.name,
        "params": dict(surface.warp.params),
        "t_min": surface.t_min,
        "t_max": surface.t_max,
    }


def surface_from_record(record: dict) -> ModelSurface:
    return make_model(
        record["family"],
        t_min=float(record.get("t_min", 1e-3)),
        t_max=float(record.get("t_max", 10.0)),
    )
