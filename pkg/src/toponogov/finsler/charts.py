"""Finsler metrics on coordinate boxes.

A chart packages a positively 1-homogeneous norm field F(x, v) over an
axis-aligned box together with whatever closed-form structure the
family provides (fundamental tensor, spray coefficients, a pole
distance for polar charts).  Everything downstream (tensors, sprays,
geodesics, distances, angles, curvature) consumes only this interface,
so finite-difference fallbacks and analytic fast paths are
interchangeable per family.

All F callables broadcast over leading axes: x and v may carry any
compatible batch shape with the coordinate axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..model_surface import ModelSurface, get_warp, make_model

__all__ = [
    "POLE",
    "FinslerChart",
    "euclidean",
    "riemannian_chart",
    "conformal_chart",
    "sphere_patch",
    "warped_polar",
    "minkowski_pnorm",
    "randers",
    "validate_chart",
    "chart_to_record",
    "chart_from_record",
]


class _PoleType:
    """Sentinel for the rotation pole of a polar chart (not a box point)."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - trivial
        return "POLE"


POLE = _PoleType()


@dataclass(frozen=True)
class FinslerChart:
    """Norm field on a box, with optional closed-form structure.

    F(x, v) must be positively 1-homogeneous in v and positive for
    v != 0.  analytic_tensor / analytic_spray, when present, override
    the finite-difference paths.  metric_matrix marks quadratic
    (Riemannian) families; pole_distance gives d(POLE, x) on polar
    charts where the pole itself sits outside the box.
    """

    name: str
    dim: int
    box: tuple[tuple[float, float], ...]
    F: Callable[[np.ndarray, np.ndarray], np.ndarray]
    family: str
    params: dict = field(default_factory=dict)
    reversible: bool = False
    x_independent: bool = False
    analytic_tensor: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    analytic_spray: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    metric_matrix: Callable[[np.ndarray], np.ndarray] | None = None
    pole_distance: Callable[[np.ndarray], float] | None = None
    surface: ModelSurface | None = None

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        for i, (lo, hi) in enumerate(self.box):
            if not (lo + margin <= x[..., i].min() and x[..., i].max() <= hi - margin):
                return False
        return True

    def scale(self) -> float:
        """Largest box edge; sets the x finite-difference step."""
        return max(hi - lo for lo, hi in self.box)

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.box])

    def norm(self, x, v) -> float:
        return float(self.F(np.asarray(x, float), np.asarray(v, float)))

    def unit(self, x, v) -> np.ndarray:
        """Rescale v to F(x, v) = 1."""
        v = np.asarray(v, dtype=float)
        n = self.norm(x, v)
        if n <= 0.0 or not math.isfinite(n):
            raise ValueError(f"cannot normalize vector with F = {n}")
        return v / n


def _as_box(box, dim) -> tuple[tuple[float, float], ...]:
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != dim:
        raise ValueError(f"box has {len(box)} sides for dimension {dim}")
    for lo, hi in box:
        if not lo < hi:
            raise ValueError(f"degenerate box side ({lo}, {hi})")
    return box


def euclidean(dim: int = 2, halfwidth: float = 5.0) -> FinslerChart:
    """Flat reversible chart; the reference case for every oracle."""

    def F(x, v):
        v = np.asarray(v, dtype=float)
        return np.linalg.norm(v, axis=-1)

    eye = np.eye(dim)

    def tensor(x, v):
        return eye.copy()

    def spray(x, v):
        v = np.asarray(v, dtype=float)
        return np.zeros_like(np.broadcast_arrays(np.asarray(x, float), v)[1])

    def metric(x):
        return eye.copy()

    return FinslerChart(
        name=f"euclidean{dim}",
        dim=dim,
        box=_as_box([(-halfwidth, halfwidth)] * dim, dim),
        F=F,
        family="riemannian",
        params={"preset": "euclidean", "halfwidth": halfwidth},
        reversible=True,
        x_independent=True,
        analytic_tensor=tensor,
        analytic_spray=spray,
        metric_matrix=metric,
    )


def riemannian_chart(
    name: str,
    metric: Callable[[np.ndarray], np.ndarray],
    box,
    *,
    analytic_spray: Callable | None = None,
    params: dict | None = None,
) -> FinslerChart:
    """Quadratic F from a matrix field g(x); g must broadcast over x."""

    box = _as_box(box, len(tuple(box)))
    dim = len(box)

    def F(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        g = np.asarray(metric(x), dtype=float)
        q = np.einsum("...i,...ij,...j->...", v, g, v)
        return np.sqrt(q)

    def tensor(x, v):
        return np.asarray(metric(np.asarray(x, float)), dtype=float)

    return FinslerChart(
        name=name,
        dim=dim,
        box=box,
        F=F,
        family="riemannian",
        params=params or {},
        reversible=True,
        analytic_tensor=tensor,
        analytic_spray=analytic_spray,
        metric_matrix=lambda x: np.asarray(metric(np.asarray(x, float)), dtype=float),
    )


def conformal_chart(
    name: str,
    phi: Callable[[np.ndarray], np.ndarray],
    grad_phi: Callable[[np.ndarray], np.ndarray],
    box,
    *,
    params: dict | None = None,
) -> FinslerChart:
    """Metric e^{2 phi(x)} * (dx . dx) with the closed-form spray.

    Spray coefficients for a conformally flat plane:
        G^i = (grad phi . v) v^i - |v|^2 (grad phi)^i / 2
    which keeps flag-curvature probes on an analytic path.
    """

    box = _as_box(box, len(tuple(box)))
    dim = len(box)

    def F(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.exp(np.asarray(phi(x), dtype=float)) * np.linalg.norm(v, axis=-1)

    def metric(x):
        x = np.asarray(x, dtype=float)
        w = np.exp(2.0 * np.asarray(phi(x), dtype=float))
        eye = np.eye(dim)
        return w[..., None, None] * eye

    def tensor(x, v):
        return metric(x)

    def spray(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        dp = np.asarray(grad_phi(x), dtype=float)
        dp, v = np.broadcast_arrays(dp, v)
        dot = np.einsum("...i,...i->...", dp, v)
        vv = np.einsum("...i,...i->...", v, v)
        return dot[..., None] * v - 0.5 * vv[..., None] * dp

    return FinslerChart(
        name=name,
        dim=dim,
        box=box,
        F=F,
        family="riemannian",
        params=params or {},
        reversible=True,
        analytic_tensor=tensor,
        analytic_spray=spray,
        metric_matrix=metric,
    )


def sphere_patch(halfwidth: float = 0.9) -> FinslerChart:
    """Stereographic patch of the unit sphere: e^{2 phi} flat metric.

    phi = log 2 - log(1 + |x|^2) gives constant sectional curvature +1,
    the standard positive-curvature oracle.
    """

    def phi(x):
        x = np.asarray(x, dtype=float)
        r2 = np.einsum("...i,...i->...", x, x)
        return math.log(2.0) - np.log1p(r2)

    def grad_phi(x):
        x = np.asarray(x, dtype=float)
        r2 = np.einsum("...i,...i->...", x, x)
        return -2.0 * x / (1.0 + r2)[..., None]

    return conformal_chart(
        "sphere_patch",
        phi,
        grad_phi,
        [(-halfwidth, halfwidth)] * 2,
        params={"preset": "sphere_patch", "halfwidth": halfwidth},
    )


def warped_polar(
    surface: ModelSurface | str,
    *,
    t_range: tuple[float, float] | None = None,
    theta_range: tuple[float, float] = (-math.pi, math.pi),
) -> FinslerChart:
    """The model surface as a chart in (t, theta) coordinates.

    The rotation pole t = 0 lies outside the box; the POLE sentinel
    plus pole_distance(x) = t(x) stand in for it, since meridians
    realize that distance exactly.
    """

    if isinstance(surface, str):
        surface = make_model(get_warp(surface))
    if t_range is None:
        # cap the box where the warp keeps the metric resolvable: past
        # f ~ 1e-6 the angular eigenvalue f^2 drowns in rounding
        grid = np.linspace(surface.t_min, surface.t_max, 2001)
        fg = np.asarray(surface.f(grid), dtype=float)
        ok = np.nonzero(fg >= 1e-6 * max(1.0, float(fg.max())))[0]
        t_hi = float(grid[ok[-1]]) if len(ok) else surface.t_max
        t_range = (max(surface.t_min, 1e-2), t_hi)
    t_lo, t_hi = t_range
    if not surface.t_min <= t_lo < t_hi <= surface.t_max:
        raise ValueError(f"t_range {t_range} outside surface working range")
    f, fp = surface.f, surface.fp

    def F(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        fx = np.asarray(f(x[..., 0]), dtype=float)
        return np.hypot(v[..., 0], fx * v[..., 1])

    def metric(x):
        x = np.asarray(x, dtype=float)
        fx = np.asarray(f(x[..., 0]), dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = fx * fx
        return out

    def tensor(x, v):
        return metric(x)

    def spray(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        x, v = np.broadcast_arrays(x, v)
        t = x[..., 0]
        fx = np.asarray(f(t), dtype=float)
        fpx = np.asarray(fp(t), dtype=float)
        # geodesic equations: t'' = f f' th'^2, th'' = -2 (f'/f) t' th';
        # with the convention x'' + 2 G(x, x') = 0 this pins G below.
        gt = -0.5 * fx * fpx * v[..., 1] ** 2
        gth = (fpx / fx) * v[..., 0] * v[..., 1]
        return np.stack([gt, gth], axis=-1)

    def pole_distance(x) -> float:
        return float(np.asarray(x, dtype=float)[..., 0])

    record = {"t_range": (float(t_lo), float(t_hi))}
    if surface.warp.name is not None:
        record["warp"] = surface.warp.name

    return FinslerChart(
        name=f"warped_polar[{surface.warp.name}]",
        dim=2,
        box=_as_box([t_range, theta_range], 2),
        F=F,
        family="warped_polar",
        params=record,
        reversible=True,
        analytic_tensor=tensor,
        analytic_spray=spray,
        metric_matrix=metric,
        pole_distance=pole_distance,
        surface=surface,
    )


def minkowski_pnorm(p: float = 4.0, dim: int = 2, halfwidth: float = 5.0) -> FinslerChart:
    """x-independent p-norm; flat spray, non-quadratic indicatrix.

    The fundamental tensor degenerates on coordinate axes for p > 2
    (the |v_i|^{p-2} factors vanish), which downstream code reports as
    DegenerateTensor rather than papering over.
    """

    if p <= 1.0:
        raise ValueError("p-norm needs p > 1 for a convex indicatrix")

    def F(x, v):
        v = np.asarray(v, dtype=float)
        m = np.max(np.abs(v), axis=-1)
        m = np.where(m == 0.0, 1.0, m)
        q = np.sum(np.abs(v / m[..., None]) ** p, axis=-1)
        out = m * q ** (1.0 / p)
        return np.where(np.max(np.abs(np.asarray(v)), axis=-1) == 0.0, 0.0, out)

    def tensor(x, v):
        v = np.asarray(v, dtype=float)
        q = float(np.sum(np.abs(v) ** p))
        sigma = np.abs(v) ** (p - 1.0) * np.sign(v)
        diag = (p - 1.0) * q ** (2.0 / p - 1.0) * np.abs(v) ** (p - 2.0)
        g = (2.0 - p) * q ** (2.0 / p - 2.0) * np.outer(sigma, sigma)
        g[np.diag_indices_from(g)] += diag
        return g

    def spray(x, v):
        v = np.asarray(v, dtype=float)
        return np.zeros_like(np.broadcast_arrays(np.asarray(x, float), v)[1])

    return FinslerChart(
        name=f"minkowski_p{p:g}",
        dim=dim,
        box=_as_box([(-halfwidth, halfwidth)] * dim, dim),
        F=F,
        family="minkowski",
        params={"p": float(p), "halfwidth": halfwidth},
        reversible=True,
        x_independent=True,
        analytic_tensor=tensor,
        analytic_spray=spray,
    )


_RANDERS_PRESETS = {
    # drift strength grows with the second coordinate; keeps |b| < 1
    "shear": (
        lambda x: np.stack(
            [0.2 + 0.15 * np.asarray(x, float)[..., 1], np.zeros(np.asarray(x).shape[:-1])],
            axis=-1,
        ),
        "b(x) = (0.2 + 0.15 x2, 0)",
    ),
}


def randers(
    b=(0.3, 0.0),
    *,
    preset: str | None = None,
    halfwidth: float = 2.0,
) -> FinslerChart:
    """Randers norm |v| + <b(x), v> over the flat background.

    Constant drift b gives an x-independent, non-reversible Minkowski
    norm; the named presets vary b across the box.  No analytic tensor
    is attached on purpose: the finite-difference path stays honestly
    comparable against the closed-form Randers tensor used in tests.
    """

    if preset is not None:
        b_field, label = _RANDERS_PRESETS[preset]
        x_independent = False
        name = f"randers[{preset}]"
        params = {"preset": preset, "halfwidth": halfwidth, "formula": label}
    else:
        b_const = np.asarray(b, dtype=float)
        if np.linalg.norm(b_const) >= 1.0:
            raise ValueError("randers drift needs |b| < 1 for positivity")

        def b_field(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(b_const, x.shape).copy()

        x_independent = True
        name = f"randers[b={tuple(round(c, 6) for c in b_const.tolist())}]"
        params = {"b": [float(c) for c in b_const], "halfwidth": halfwidth}

    dim = 2

    def F(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        drift = np.asarray(b_field(x), dtype=float)
        drift, v = np.broadcast_arrays(drift, v)
        return np.linalg.norm(v, axis=-1) + np.einsum("...i,...i->...", drift, v)

    spray = None
    if x_independent:

        def spray(x, v):
            v = np.asarray(v, dtype=float)
            return np.zeros_like(np.broadcast_arrays(np.asarray(x, float), v)[1])

    return FinslerChart(
        name=name,
        dim=dim,
        box=_as_box([(-halfwidth, halfwidth)] * dim, dim),
        F=F,
        family="randers",
        params=params,
        reversible=False,
        x_independent=x_independent,
        analytic_spray=spray,
    )


def validate_chart(chart: FinslerChart, rng=None, samples: int = 20) -> None:
    """Spot-check homogeneity, positivity, and tensor definiteness.

    Raises ValueError on a homogeneity or positivity violation and
    propagates DegenerateTensor from the tensor check.  Sampling stays
    away from coordinate axes so families that legitimately degenerate
    there (p-norms) still certify on generic data.
    """

    from .tensor import fundamental_tensor

    rng = np.random.default_rng(0) if rng is None else rng
    lows = np.array([lo for lo, _ in chart.box])
    highs = np.array([hi for _, hi in chart.box])
    span = highs - lows
    for _ in range(samples):
        x = lows + 0.1 * span + 0.8 * span * rng.random(chart.dim)
        v = rng.normal(size=chart.dim)
        while np.min(np.abs(v)) < 1e-3 * np.linalg.norm(v):
            v = rng.normal(size=chart.dim)
        base = float(chart.F(x, v))
        if not base > 0.0:
            raise ValueError(f"{chart.name}: F not positive at a sampled direction")
        for lam in (0.5, 2.0, 10.0):
            err = abs(float(chart.F(x, lam * v)) - lam * base)
            if err > 1e-9 * max(1.0, lam * base):
                raise ValueError(
                    f"{chart.name}: homogeneity violated by {err:g} at lambda={lam}"
                )
        fundamental_tensor(chart, x, v)


def chart_to_record(chart: FinslerChart) -> dict:
    """Serializable description; only parameterized presets round-trip."""
    params = {
        k: v for k, v in chart.params.items() if isinstance(v, (int, float, str, list, tuple))
    }
    if chart.family == "riemannian" and "preset" not in params:
        raise ValueError(f"chart {chart.name!r} has no serializable preset")
    return {
        "family": chart.family,
        "dimension": chart.dim,
        "box": [list(side) for side in chart.box],
        "params": params,
    }


def chart_from_record(record: dict) -> FinslerChart:
    family = record["family"]
    params = dict(record.get("params", {}))
    if family == "riemannian":
        preset = params.get("preset")
        if preset == "euclidean":
            return euclidean(record.get("dimension", 2), halfwidth=params.get("halfwidth", 5.0))
        if preset == "sphere_patch":
            return sphere_patch(halfwidth=params.get("halfwidth", 0.9))
        raise ValueError(f"unknown riemannian preset {preset!r}")
    if family == "minkowski":
        return minkowski_pnorm(
            params.get("p", 4.0), record.get("dimension", 2), halfwidth=params.get("halfwidth", 5.0)
        )
    if family == "randers":
        if "preset" in params:
            return randers(preset=params["preset"], halfwidth=params.get("halfwidth", 2.0))
        return randers(tuple(params["b"]), halfwidth=params.get("halfwidth", 2.0))
    if family == "warped_polar":
        surface = make_model(get_warp(params["warp"]))
        t_range = tuple(params.get("t_range", (max(surface.t_min, 1e-2), surface.t_max)))
        return warped_polar(surface, t_range=t_range)
    raise ValueError(f"unknown chart family {family!r}")
