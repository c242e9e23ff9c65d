"""Forward critical points: per-point verdicts and annulus scans.

A point x is forward critical for p when every nonzero direction w at
x makes an obtuse-or-right angle, in the fundamental-tensor sense,
with at least one arriving minimal-connector velocity.  The check runs
over a deterministic direction set enriched with the connector
velocities themselves, which are the adversarial directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ShootingFailed
from ..finsler import FinslerChart, POLE, distance, integrate_geodesic, point_distance
from ..finsler.tensor import direction_samples, tensor_matrix
from ..model_surface import ModelPoint, ModelSurface
from .triangles import model_connector_velocities

__all__ = [
    "CriticalVerdict",
    "is_forward_critical",
    "CriticalScanReport",
    "critical_scan",
]

_CRITICAL_GATE = 1e-9


@dataclass(frozen=True)
class CriticalVerdict:
    """Outcome of the directional sweep at one point."""

    critical: bool
    witness: np.ndarray | None
    connectors: list
    checked: int


def _connector_velocities(chart: FinslerChart, p, x: np.ndarray) -> list[np.ndarray]:
    if p is POLE:
        if chart.surface is None:
            raise ValueError("pole connectors need a model-backed chart")
        return [np.array([1.0, 0.0])]
    if chart.surface is not None:
        return model_connector_velocities(
            chart.surface, ModelPoint(*np.asarray(p, float)), ModelPoint(*x)
        )
    conn = distance(chart, np.asarray(p, float), x)
    return [np.asarray(path.v[-1], dtype=float) for path in conn.all_connectors]


def is_forward_critical(
    chart: FinslerChart,
    p,
    x,
    w_samples: int | None = None,
    connector_set=None,
) -> CriticalVerdict:
    """Sweep directions at x for the obtuse-angle certificate.

    With an explicit connector_set the arriving velocities are taken
    as given; otherwise they are enumerated from the chart.  The point
    is critical iff every sampled w has some arriving v with
    g_v(v, w) <= 1e-9; the first w defeating all v is the witness.
    """
    x = np.asarray(x, dtype=float)
    vels = (
        [np.asarray(v, dtype=float) for v in connector_set]
        if connector_set is not None
        else _connector_velocities(chart, p, x)
    )
    if not vels:
        raise ShootingFailed(f"no connector velocities at {x.tolist()}")
    tensors = [tensor_matrix(chart, x, v) for v in vels]
    dirs = list(direction_samples(chart.dim, w_samples or 64))
    dirs.extend(v / np.linalg.norm(v) for v in vels)
    for w in dirs:
        if all(float(v @ g @ w) > _CRITICAL_GATE for v, g in zip(vels, tensors)):
            return CriticalVerdict(
                critical=False, witness=w, connectors=vels, checked=len(dirs)
            )
    return CriticalVerdict(critical=True, witness=None, connectors=vels, checked=len(dirs))


@dataclass(frozen=True)
class CriticalScanReport:
    """Shell-by-shell criticality portrait around p."""

    p: object
    radii: list
    verdicts: list
    outermost_critical_radius: float | None


def _shell_points(
    chart: FinslerChart, p, radius: float, count: int, step: float
) -> list[tuple[np.ndarray, str | None]]:
    """Points at the given forward distance from p, with error notes."""
    if p is POLE:
        th_lo, th_hi = chart.box[1]
        pad = 0.05 * (th_hi - th_lo)
        thetas = np.linspace(th_lo + pad, th_hi - pad, count)
        note = None if chart.box[0][0] <= radius <= chart.box[0][1] else "shell outside the chart"
        return [(np.array([radius, th]), note) for th in thetas]
    p = np.asarray(p, dtype=float)
    out: list[tuple[np.ndarray, str | None]] = []
    for ang in np.linspace(0.0, 2.0 * math.pi, count, endpoint=False) + 0.11:
        u = np.array([math.cos(ang), math.sin(ang)])
        v0 = u / float(chart.F(p, u))
        geo = integrate_geodesic(chart, p, v0, radius, step, on_exit="truncate")
        if geo.exited or geo.s[-1] < radius - 1e-9:
            out.append((np.asarray(geo.endpoint(), float), "ray left the chart"))
        else:
            out.append((np.asarray(geo.endpoint(), float), None))
    return out


def critical_scan(
    chart: FinslerChart,
    model: ModelSurface,
    p,
    radii,
    *,
    points_per_shell: int = 8,
    w_samples: int = 64,
    step: float = 1e-2,
) -> CriticalScanReport:
    """Run the criticality sweep over concentric forward shells.

    Per-point failures (shooting breakdowns, rays leaving the box) are
    recorded in the verdict rows rather than aborting the scan.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("shell radii must be strictly increasing")
    if radii and not (model.t_min < radii[0] and radii[-1] <= model.t_max):
        raise ValueError("shell radii must lie inside the model domain")
    verdicts = []
    outermost = None
    for r in radii:
        for point, note in _shell_points(chart, p, r, points_per_shell, step):
            row = {
                "radius": r,
                "point": point,
                "connectors": 0,
                "critical": False,
                "witness": None,
                "error": note,
            }
            if note is None:
                try:
                    verdict = is_forward_critical(chart, p, point, w_samples)
                    row["connectors"] = len(verdict.connectors)
                    row["critical"] = verdict.critical
                    row["witness"] = verdict.witness
                    if verdict.critical:
                        outermost = r if outermost is None else max(outermost, r)
                except ShootingFailed as err:
                    row["error"] = str(err)
            verdicts.append(row)
    return CriticalScanReport(
        p=p, radii=radii, verdicts=verdicts, outermost_critical_radius=outermost
    )
