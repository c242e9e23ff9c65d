"""Warp profiles for surfaces of revolution.

A rotationally symmetric surface with a pole is described by a warp
profile f with f(0) = 0 and f'(0) = 1; the metric in geodesic polar
coordinates is dt^2 + f(t)^2 dtheta^2.  The radial curvature G is tied
to the warp by the Jacobi-type relation f'' + G f = 0, so warp and
curvature determine each other through an ODE with pole initial data.
This module holds the builtin analytic families and the two conversion
routines between f and G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

from ..errors import PoleTooClose, WarpVanishes

__all__ = [
    "Warp",
    "RadialCurvature",
    "BUILTIN_WARPS",
    "get_warp",
    "warp_from_curvature",
    "warp_from_callable",
    "curvature_from_warp",
    "validate_warp",
]


def _scalar_or_array(out, t):
    return float(out) if np.ndim(t) == 0 else out


def _const(value: float) -> Callable:
    def evaluator(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, value)
        return _scalar_or_array(out, t)

    return evaluator


@dataclass(frozen=True)
class Warp:
    """Warp profile f(t) with derivative evaluators.

    All evaluators accept scalars or arrays and are defined for any
    real t through the odd extension f(-t) = -f(t); t_max records the
    range on which the profile is trusted (infinite for analytic
    families, the ODE grid end for integrated ones).
    """

    name: str
    f: Callable
    fp: Callable
    fpp: Callable
    t_max: float
    source: str  # "analytic" or "ode-grid" or "finite-difference"
    formula: str = ""
    curvature: Callable | None = None  # analytic G(t) when known
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.f(t)


@dataclass(frozen=True)
class RadialCurvature:
    """Radial curvature evaluator G(t) on [0, t_max]."""

    name: str
    g: Callable
    source: str  # "analytic" or "warp-ratio"
    t_max: float = math.inf

    def __call__(self, t):
        return self.g(t)


# ---------------------------------------------------------------------------
# builtin analytic families


def _flat_f(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(t.copy(), t)


def _sinh_f(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(np.sinh(t), t)


def _cosh(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(np.cosh(t), t)


def _paraboloid_f(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(t / np.sqrt(1.0 + t * t), t)


def _paraboloid_fp(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array((1.0 + t * t) ** -1.5, t)


def _paraboloid_fpp(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(-3.0 * t * (1.0 + t * t) ** -2.5, t)


def _paraboloid_G(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(3.0 / (1.0 + t * t) ** 2, t)


def _gauss_tanh_f(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(np.exp(-t * t) * np.tanh(t), t)


def _gauss_tanh_fp(t):
    t = np.asarray(t, dtype=float)
    sech2 = np.cosh(t) ** -2.0
    out = np.exp(-t * t) * (sech2 - 2.0 * t * np.tanh(t))
    return _scalar_or_array(out, t)


def _gauss_tanh_fpp(t):
    t = np.asarray(t, dtype=float)
    th = np.tanh(t)
    sech2 = np.cosh(t) ** -2.0
    out = np.exp(-t * t) * (
        -2.0 * sech2 * th - 2.0 * th - 4.0 * t * sech2 + 4.0 * t * t * th
    )
    return _scalar_or_array(out, t)


def _gauss_tanh_G(t):
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-7
    # 8t/sinh(2t) is 0/0 at the pole; switch to the even Taylor series there
    safe = np.where(small, 0.5, t)
    main = (
        2.0
        + 2.0 * np.cosh(safe) ** -2.0
        + 8.0 * safe / np.sinh(2.0 * safe)
        - 4.0 * safe * safe
    )
    series = 8.0 - (26.0 / 3.0) * t * t
    return _scalar_or_array(np.where(small, series, main), t)


BUILTIN_WARPS: dict[str, Warp] = {
    "flat": Warp(
        name="flat",
        f=_flat_f,
        fp=_const(1.0),
        fpp=_const(0.0),
        t_max=math.inf,
        source="analytic",
        formula="f(t) = t",
        curvature=_const(0.0),
    ),
    "sinh": Warp(
        name="sinh",
        f=_sinh_f,
        fp=_cosh,
        fpp=_sinh_f,
        t_max=math.inf,
        source="analytic",
        formula="f(t) = sinh(t)",
        curvature=_const(-1.0),
    ),
    "paraboloid": Warp(
        name="paraboloid",
        f=_paraboloid_f,
        fp=_paraboloid_fp,
        fpp=_paraboloid_fpp,
        t_max=math.inf,
        source="analytic",
        formula="f(t) = t / sqrt(1 + t^2)",
        curvature=_paraboloid_G,
    ),
    "gauss_tanh": Warp(
        name="gauss_tanh",
        f=_gauss_tanh_f,
        fp=_gauss_tanh_fp,
        fpp=_gauss_tanh_fpp,
        t_max=math.inf,
        source="analytic",
        formula="f(t) = exp(-t^2) * tanh(t)",
        curvature=_gauss_tanh_G,
    ),
}


def get_warp(name: str) -> Warp:
    """Look up a builtin warp family by name."""
    try:
        return BUILTIN_WARPS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_WARPS))
        raise KeyError(f"unknown warp family {name!r}; builtins: {known}") from None


# ---------------------------------------------------------------------------
# conversions


def _eval_curvature(G, t):
    """Evaluate a curvature given as RadialCurvature or bare callable."""
    fn = G.g if isinstance(G, RadialCurvature) else G
    t = np.asarray(t, dtype=float)
    try:
        out = np.asarray(fn(t), dtype=float)
        if out.shape != t.shape:
            raise ValueError
    except Exception:
        out = np.array([float(fn(x)) for x in t.ravel()]).reshape(t.shape)
    return out


def _tail_switch(g_nodes: np.ndarray) -> int | None:
    """First node index from which the curvature stays at or below -4.

    Beyond such a point the two solution branches of f'' + G f = 0
    separate exponentially, which is where forward integration of a
    decaying profile loses the branch.
    """
    suffix_max = np.maximum.accumulate(g_nodes[::-1])[::-1]
    idx = np.nonzero(suffix_max <= -4.0)[0]
    if idx.size == 0 or idx[0] >= g_nodes.size - 2:
        return None
    return int(idx[0])


def _stabilized_tail(G, ts, h, fs, fps, g_nodes, g_half, i_sw) -> bool:
    """Rebuild nodes past i_sw from the backward log-derivative branch.

    With strongly negative curvature the decaying profile satisfies
    w = f'/f close to -sqrt(-G), a branch that repels forward but
    attracts backward.  Integrating w' = -G - w^2 in reverse from a
    seed well past the working range forgets the seed error at rate
    exp(-2 int sqrt(-G)) and recovers the decaying branch to full
    precision; f is then rebuilt from the accumulated log.  Applied
    only when the forward solution is actually tracking that branch.
    """
    f_sw, fp_sw = fs[i_sw], fps[i_sw]
    if f_sw <= 0.0 or fp_sw >= 0.0:
        return False
    w_fwd = fp_sw / f_sw
    w_ref = -math.sqrt(-g_nodes[i_sw])
    if not (1.5 * w_ref <= w_fwd <= 0.5 * w_ref):
        return False

    pad, m = 2.0, 0
    g_ext = g_ext_half = None
    while pad >= 2.0 * h:
        m = int(math.ceil(pad / h))
        t_ext = ts[-1] + h * np.arange(1, m + 1)
        try:
            ge = _eval_curvature(G, t_ext)
            gh = _eval_curvature(G, t_ext - 0.5 * h)
        except Exception:
            pad *= 0.5
            continue
        if np.all(np.isfinite(ge)) and np.all(np.isfinite(gh)) and ge[-1] < -1.0:
            g_ext, g_ext_half = ge, gh
            break
        pad *= 0.5
    if g_ext is None:
        m = 0

    if m:
        node_g = np.concatenate([g_nodes[i_sw:], g_ext])
        half_g = np.concatenate([g_half[i_sw:], g_ext_half])
    else:
        node_g, half_g = g_nodes[i_sw:], g_half[i_sw:]
    if node_g[-1] >= 0.0:
        return False

    k_last = node_g.size - 1
    w = -math.sqrt(-node_g[-1])
    ell = 0.0
    ws = np.empty(node_g.size)
    ls = np.empty(node_g.size)
    ws[k_last], ls[k_last] = w, ell
    hb = -h
    for k in range(k_last, 0, -1):
        g1, g2, g4 = node_g[k], half_g[k - 1], node_g[k - 1]
        k1w, k1l = -g1 - w * w, w
        w2 = w + 0.5 * hb * k1w
        k2w, k2l = -g2 - w2 * w2, w2
        w3 = w + 0.5 * hb * k2w
        k3w, k3l = -g2 - w3 * w3, w3
        w4 = w + hb * k3w
        k4w, k4l = -g4 - w4 * w4, w4
        w += (hb / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        ell += (hb / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
        if not (math.isfinite(w) and math.isfinite(ell)):
            return False
        ws[k - 1], ls[k - 1] = w, ell

    for j in range(len(ts) - i_sw):
        fj = f_sw * math.exp(ls[j] - ls[0])
        fs[i_sw + j] = fj
        fps[i_sw + j] = ws[j] * fj
    return True


def warp_from_curvature(G, t_max: float, step: float = 1e-3) -> Warp:
    """Integrate f'' + G f = 0 with f(0) = 0, f'(0) = 1 up to t_max.

    Classical fixed-step 4th order integration on a grid of spacing at
    most `step`; the result interpolates (f, f', f'') node data with a
    piecewise quintic, so the returned evaluators are C^2 and accurate
    to roughly step^4.  Where the curvature has a strongly negative
    tail and the solution is decaying, the tail nodes are rebuilt by a
    backward-stable log-derivative integration, since the decaying
    branch is exponentially unstable under forward marching there.
    Raises WarpVanishes if f hits zero before t_max, since the profile
    then leaves the class of plane-like surfaces.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    n = max(2, math.ceil(t_max / step))
    ts = np.linspace(0.0, t_max, n + 1)
    h = ts[1] - ts[0]

    g_nodes = _eval_curvature(G, ts)
    g_half = _eval_curvature(G, ts[:-1] + 0.5 * h)

    fs = np.empty(n + 1)
    fps = np.empty(n + 1)
    fs[0], fps[0] = 0.0, 1.0
    f, fp = 0.0, 1.0
    for i in range(n):
        g1, g2, g4 = g_nodes[i], g_half[i], g_nodes[i + 1]
        k1f, k1p = fp, -g1 * f
        k2f, k2p = fp + 0.5 * h * k1p, -g2 * (f + 0.5 * h * k1f)
        k3f, k3p = fp + 0.5 * h * k2p, -g2 * (f + 0.5 * h * k2f)
        k4f, k4p = fp + h * k3p, -g4 * (f + h * k3f)
        f += (h / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
        fp += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        fs[i + 1], fps[i + 1] = f, fp

    i_sw = _tail_switch(g_nodes)
    if i_sw is not None:
        _stabilized_tail(G, ts, h, fs, fps, g_nodes, g_half, i_sw)

    bad = np.nonzero(fs[1:] <= 0.0)[0]
    if bad.size:
        t_star = ts[bad[0] + 1]
        raise WarpVanishes(f"warp vanishes near t = {t_star:.6g}")

    fpps = -g_nodes * fs
    poly = BPoly.from_derivatives(ts, np.column_stack([fs, fps, fpps]))
    dpoly = poly.derivative()
    ddpoly = poly.derivative(2)

    def f_eval(t):
        t = np.asarray(t, dtype=float)
        out = np.sign(t) * poly(np.abs(t))
        return _scalar_or_array(out, t)

    def fp_eval(t):
        t = np.asarray(t, dtype=float)
        out = dpoly(np.abs(t))
        return _scalar_or_array(out, t)

    def fpp_eval(t):
        t = np.asarray(t, dtype=float)
        out = np.sign(t) * ddpoly(np.abs(t))
        return _scalar_or_array(out, t)

    curvature_fn = G.g if isinstance(G, RadialCurvature) else G
    return Warp(
        name="from-curvature",
        f=f_eval,
        fp=fp_eval,
        fpp=fpp_eval,
        t_max=float(t_max),
        source="ode-grid",
        formula="f'' + G f = 0, f(0) = 0, f'(0) = 1",
        curvature=curvature_fn,
        params={"t_max": float(t_max), "step": float(h)},
    )


def warp_from_callable(name: str, f: Callable, t_max: float, fd_step: float = 1e-4) -> Warp:
    """Wrap a bare profile callable, building f' and f'' by 5-point stencils.

    The odd extension is used below the pole, so the stencil is valid
    down to t = 0.
    """

    def _batch(t):
        t = np.asarray(t, dtype=float)
        out = np.sign(t) * np.asarray(f(np.abs(t)), dtype=float)
        return out

    def fp_eval(t):
        t = np.asarray(t, dtype=float)
        h = fd_step
        out = (
            -_batch(t + 2 * h) + 8.0 * _batch(t + h) - 8.0 * _batch(t - h) + _batch(t - 2 * h)
        ) / (12.0 * h)
        return _scalar_or_array(out, t)

    def fpp_eval(t):
        t = np.asarray(t, dtype=float)
        h = fd_step
        out = (
            -_batch(t + 2 * h)
            + 16.0 * _batch(t + h)
            - 30.0 * _batch(t)
            + 16.0 * _batch(t - h)
            - _batch(t - 2 * h)
        ) / (12.0 * h * h)
        return _scalar_or_array(out, t)

    def f_eval(t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(_batch(t), t)

    return Warp(
        name=name,
        f=f_eval,
        fp=fp_eval,
        fpp=fpp_eval,
        t_max=float(t_max),
        source="finite-difference",
        formula="",
        params={"fd_step": fd_step},
    )


def curvature_from_warp(warp: Warp, t_min: float = 0.0) -> RadialCurvature:
    """Radial curvature G = -f''/f computed from the warp evaluators.

    This is always the ratio route (never a stored analytic curvature),
    so composing it with warp_from_curvature exercises a genuine
    roundtrip.  Since G extends evenly through the pole, evaluation
    points below 1e-6 are clamped there, which keeps the 0/0 ratio at
    the pole well conditioned; requests below `t_min` raise.
    """

    def g_eval(t):
        t_in = np.asarray(t, dtype=float)
        if np.any(t_in < t_min):
            raise PoleTooClose(f"curvature requested below t_min = {t_min}")
        t_safe = np.maximum(np.abs(t_in), 1e-6)
        out = -np.asarray(warp.fpp(t_safe), dtype=float) / np.asarray(
            warp.f(t_safe), dtype=float
        )
        return _scalar_or_array(out, t_in)

    return RadialCurvature(
        name=f"{warp.name}-curvature",
        g=g_eval,
        source="warp-ratio",
        t_max=warp.t_max,
    )


def validate_warp(warp: Warp, t_max: float, n_grid: int = 2000) -> None:
    """Check pole normalization and positivity on a sampled grid.

    Verifies f(t)/t is within 1% of 1 at t = 1e-3 and 1e-4 (the pole
    slope condition) and that f > 0 on (0, t_max].
    """
    for t in (1e-3, 1e-4):
        ratio = warp.f(t) / t
        if not (0.99 <= ratio <= 1.01):
            raise WarpVanishes(
                f"warp {warp.name!r} has pole slope {ratio:.4f} at t = {t}; expected 1"
            )
    ts = np.linspace(t_max / n_grid, t_max, n_grid)
    vals = np.asarray(warp.f(ts))
    if np.any(vals <= 0.0):
        t_star = float(ts[np.argmax(vals <= 0.0)])
        raise WarpVanishes(f"warp {warp.name!r} is nonpositive near t = {t_star:.6g}")
