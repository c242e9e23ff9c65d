"""Flag curvature, tangent curvature, and radial curvature bounds.

Flag curvature comes from the spray's curvature operator

    R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dv^k
            + 2 G^j d2G^i/dv^j dv^k - (dG^i/dv^j)(dG^j/dv^k)

evaluated with nested central differences (analytic sprays keep the
steps tight; fully finite-difference sprays widen them one order).
Tangent curvature compares covariant derivatives taken with two
different reference vectors through connection coefficients assembled
from the fundamental tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FlagDegenerate
from ..model_surface import ModelSurface
from .charts import POLE, FinslerChart
from .spray import integrate_geodesic, spray
from .tensor import fundamental_tensor, tensor_matrix

__all__ = [
    "riemann_operator",
    "flag_curvature",
    "chern_coefficients",
    "covariant_derivative",
    "tangent_curvature",
    "RadialBoundReport",
    "radial_bound_check",
]


def _steps(chart: FinslerChart) -> tuple[float, float]:
    """(x-step, relative v-step) matched to the spray's smoothness."""
    if chart.analytic_spray is not None:
        return 1e-4 * chart.scale(), 1e-4
    return 1e-3 * chart.scale(), 1e-3


def riemann_operator(chart: FinslerChart, x, v) -> np.ndarray:
    """Matrix R^i_k of the curvature operator at (x, v)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    n = chart.dim
    hx, hv_rel = _steps(chart)
    hv = hv_rel * float(chart.F(x, v))
    eye = np.eye(n)

    def g_spray(xx, vv):
        return np.asarray(spray(chart, xx, vv), dtype=float)

    g0 = g_spray(x, v)

    # 2 dG/dx
    term1 = np.empty((n, n))
    for k in range(n):
        term1[:, k] = (g_spray(x + hx * eye[k], v) - g_spray(x - hx * eye[k], v)) / (2.0 * hx)
    term1 *= 2.0

    # y^j d2G/dx^j dv^k: v-derivative of the directional x-derivative along v
    vnorm = float(np.linalg.norm(v))
    u = v / vnorm

    def dir_x(vv):
        return (g_spray(x + hx * u, vv) - g_spray(x - hx * u, vv)) / (2.0 * hx) * vnorm

    term2 = np.empty((n, n))
    for k in range(n):
        term2[:, k] = (dir_x(v + hv * eye[k]) - dir_x(v - hv * eye[k])) / (2.0 * hv)

    # 2 G^j d2G/dv^j dv^k: v-derivative of the v-directional derivative along G
    gnorm = float(np.linalg.norm(g0))
    term3 = np.zeros((n, n))
    if gnorm > 1e-14:
        w = g0 / gnorm

        def dir_v(vv):
            return (g_spray(x, vv + hv * w) - g_spray(x, vv - hv * w)) / (2.0 * hv) * gnorm

        for k in range(n):
            term3[:, k] = (dir_v(v + hv * eye[k]) - dir_v(v - hv * eye[k])) / (2.0 * hv)
        term3 *= 2.0

    # (dG/dv) (dG/dv)
    jac = np.empty((n, n))
    for j in range(n):
        jac[:, j] = (g_spray(x, v + hv * eye[j]) - g_spray(x, v - hv * eye[j])) / (2.0 * hv)

    return term1 - term2 + term3 - jac @ jac


def flag_curvature(chart: FinslerChart, x, v, w) -> float:
    """K of the flag (v, w): g_v(R(w), w) over the Gram determinant."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    g = fundamental_tensor(chart, x, v).matrix
    den = float((v @ g @ v) * (w @ g @ w) - (v @ g @ w) ** 2)
    if den < 1e-12:
        raise FlagDegenerate(f"flag Gram determinant {den:.3e} at v={v.tolist()}")
    r = riemann_operator(chart, x, v)
    num = float(w @ g @ (r @ w))
    return num / den


def chern_coefficients(chart: FinslerChart, x, ref) -> np.ndarray:
    """Connection coefficients Gamma^l_jk at (x, ref).

    Formal Christoffels of g(., ref) corrected by Cartan-tensor terms
    contracted with the nonlinear connection N^m_k = dG^m/dv^k; the
    corrections vanish when both lower slots are fed the reference
    vector, which is the identity the tests pin down.
    """
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    n = chart.dim
    hx, hv_rel = _steps(chart)
    hv = hv_rel * float(chart.F(x, ref))
    eye = np.eye(n)

    g0 = tensor_matrix(chart, x, ref)
    g_inv = np.linalg.inv(g0)

    dg_x = np.empty((n, n, n))  # dg_x[k] = d g / d x^k
    for k in range(n):
        gp = tensor_matrix(chart, x + hx * eye[k], ref)
        gm = tensor_matrix(chart, x - hx * eye[k], ref)
        dg_x[k] = (gp - gm) / (2.0 * hx)

    # gamma^l_jk = 0.5 g^{lm} (d_j g_mk + d_k g_mj - d_m g_jk)
    term = np.empty((n, n, n))
    for j in range(n):
        for k in range(n):
            term[:, j, k] = dg_x[j][:, k] + dg_x[k][:, j] - dg_x[:, j, k]
    gamma = 0.5 * np.einsum("lm,mjk->ljk", g_inv, term)

    # Cartan tensor C_ijm = 0.5 d g_ij / d v^m and nonlinear connection
    cartan = np.empty((n, n, n))
    for m in range(n):
        gp = tensor_matrix(chart, x, ref + hv * eye[m])
        gm = tensor_matrix(chart, x, ref - hv * eye[m])
        cartan[:, :, m] = (gp - gm) / (4.0 * hv)
    nconn = np.empty((n, n))
    for k in range(n):
        nconn[:, k] = (
            np.asarray(spray(chart, x, ref + hv * eye[k]), dtype=float)
            - np.asarray(spray(chart, x, ref - hv * eye[k]), dtype=float)
        ) / (2.0 * hv)

    corr = (
        np.einsum("ijm,mk->ijk", cartan, nconn)
        + np.einsum("ikm,mj->ijk", cartan, nconn)
        - np.einsum("jkm,mi->ijk", cartan, nconn)
    )
    return gamma - np.einsum("li,ijk->ljk", g_inv, corr)


def covariant_derivative(chart: FinslerChart, x, ref, direction, vec_field) -> np.ndarray:
    """D^ref_direction of vec_field at x: field derivative plus connection."""
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    direction = np.asarray(direction, dtype=float)
    n = chart.dim
    hx = 1e-5 * chart.scale()
    eye = np.eye(n)
    jac = np.empty((n, n))  # jac[l, j] = d field^l / d x^j
    for j in range(n):
        fp = np.asarray(vec_field(x + hx * eye[j]), dtype=float)
        fm = np.asarray(vec_field(x - hx * eye[j]), dtype=float)
        jac[:, j] = (fp - fm) / (2.0 * hx)
    gamma = chern_coefficients(chart, x, ref)
    w = np.asarray(vec_field(x), dtype=float)
    return jac @ direction + np.einsum("ljk,j,k->l", gamma, direction, w)


def tangent_curvature(
    chart: FinslerChart,
    x,
    v,
    w,
    *,
    x_field=None,
    y_field=None,
) -> float:
    """T(v, w): the g_v-projection onto v of the reference-swap defect.

    Extends v and w to vector fields X, Y (coordinate-constant unless
    callables are supplied), and returns

        g_v( D^Y_Y Y - D^X_Y Y, v )  evaluated at x,

    which vanishes identically on Berwald-type norms (Riemannian and
    locally Minkowski charts) and generically not otherwise.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if x_field is None:
        x_field = lambda z: v
    if y_field is None:
        y_field = lambda z: w
    x_at = np.asarray(x_field(x), dtype=float)
    y_at = np.asarray(y_field(x), dtype=float)
    if not np.allclose(x_at, v, atol=1e-12) or not np.allclose(y_at, w, atol=1e-12):
        raise ValueError("extension fields must agree with (v, w) at x")
    dyy = covariant_derivative(chart, x, ref=w, direction=w, vec_field=y_field)
    dxy = covariant_derivative(chart, x, ref=v, direction=w, vec_field=y_field)
    g = fundamental_tensor(chart, x, v).matrix
    return float((dyy - dxy) @ g @ v)


@dataclass(frozen=True)
class RadialBoundReport:
    """Worst margin of K along radial rays against the model's G."""

    min_margin: float
    samples: list
    rays: int

    @property
    def passes(self) -> bool:
        return self.min_margin >= -1e-9


def radial_bound_check(
    chart: FinslerChart,
    model: ModelSurface,
    p,
    t_samples,
    w_per_point: int = 3,
    *,
    n_rays: int = 4,
    step: float = 1e-2,
) -> RadialBoundReport:
    """Check K(radial velocity, w) >= G(t) along rays from p.

    With p = POLE on a model-backed chart the rays are meridians and
    need no integration; otherwise unit-speed geodesics fan out from p
    and are sampled at the requested arclengths (rays that leave the
    box forfeit their remaining samples rather than failing the run).
    """
    t_samples = sorted(float(t) for t in t_samples)
    if not t_samples or t_samples[0] <= 0.0:
        raise ValueError("t_samples must be positive")
    samples = []
    min_margin = math.inf

    def record(t, k, g_ref):
        nonlocal min_margin
        margin = k - g_ref
        samples.append({"t": t, "K": k, "G": g_ref, "margin": margin})
        min_margin = min(min_margin, margin)

    if p is POLE:
        if chart.surface is None or chart.pole_distance is None:
            raise ValueError("POLE rays need a model-backed polar chart")
        t_lo, t_hi = chart.box[0]
        th_lo, th_hi = chart.box[1]
        thetas = np.linspace(th_lo + 0.1 * (th_hi - th_lo), th_hi - 0.1 * (th_hi - th_lo), n_rays)
        for theta in thetas:
            for t in t_samples:
                if not t_lo <= t <= t_hi:
                    continue
                xx = np.array([t, theta])
                vv = np.array([1.0, 0.0])
                for j in range(w_per_point):
                    ang = (j + 1) * math.pi / (w_per_point + 1)
                    ww = np.array([math.cos(ang), math.sin(ang) / float(model.f(t))])
                    record(t, flag_curvature(chart, xx, vv, ww), float(model.G(t)))
        return RadialBoundReport(min_margin=min_margin, samples=samples, rays=n_rays)

    p = np.asarray(p, dtype=float)
    reach = t_samples[-1]
    angles = np.linspace(0.0, 2.0 * math.pi, n_rays, endpoint=False) + 0.37
    for ang in angles:
        u = np.array([math.cos(ang), math.sin(ang)])
        v0 = u / float(chart.F(p, u))
        geo = integrate_geodesic(chart, p, v0, reach + 1e-9, step, on_exit="truncate")
        for t in t_samples:
            if t > geo.s[-1]:
                break
            xx = np.asarray(geo.position_at(t), dtype=float)
            vv = np.asarray(geo.velocity_at(t), dtype=float)
            for j in range(w_per_point):
                wang = (j + 1) * math.pi / (w_per_point + 1)
                ww = math.cos(wang) * vv + math.sin(wang) * np.array([-vv[1], vv[0]])
                record(t, flag_curvature(chart, xx, vv, ww), float(model.G(t)))
    return RadialBoundReport(min_margin=min_margin, samples=samples, rays=n_rays)
