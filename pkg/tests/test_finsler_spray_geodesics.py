"""Spray coefficients and chart geodesic integration."""

import math

import numpy as np
import pytest

from toponogov.errors import LeftDomain
from toponogov.finsler import (
    euclidean,
    integrate_geodesic,
    integrate_geodesic_fan,
    minkowski_pnorm,
    randers,
    reverse_geodesic_check,
    riemannian_chart,
    sphere_patch,
    spray,
    warped_polar,
)
from toponogov.model_surface import ModelPoint, get_warp, make_model
from toponogov.model_surface import integrate_geodesic as model_integrate


def _bumpy_metric(x):
    x = np.asarray(x, dtype=float)
    g = np.zeros(x.shape[:-1] + (2, 2))
    g[..., 0, 0] = 1.0 + 0.5 * x[..., 1] ** 2
    g[..., 1, 1] = 1.0 + 0.5 * x[..., 0] ** 2
    g[..., 0, 1] = g[..., 1, 0] = 0.2 * x[..., 0] * x[..., 1]
    return g


def _bumpy_metric_dx(x):
    # hand-coded partials of _bumpy_metric: dg[k][i, j] = d g_ij / d x^k
    x1, x2 = float(x[0]), float(x[1])
    d1 = np.array([[0.0, 0.2 * x2], [0.2 * x2, x1]])
    d2 = np.array([[x2, 0.2 * x1], [0.2 * x1, 0.0]])
    return np.stack([d1, d2])


def _christoffel_spray_oracle(x, v):
    # G^i = (1/2) Gamma^i_jk v^j v^k from the metric's exact derivatives
    g = _bumpy_metric(x)
    dg = _bumpy_metric_dx(x)
    g_inv = np.linalg.inv(g)
    gamma = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                acc = 0.0
                for l in range(2):
                    acc += g_inv[i, l] * (dg[j][l, k] + dg[k][l, j] - dg[l][j, k])
                gamma[i, j, k] = 0.5 * acc
    return 0.5 * np.einsum("ijk,j,k->i", gamma, v, v)


def test_minkowski_spray_vanishes():
    chart = minkowski_pnorm(4.0)
    g = spray(chart, [0.3, -0.2], [0.6, 0.8])
    assert np.max(np.abs(g)) < 1e-7


def test_fd_spray_matches_christoffel_oracle():
    chart = riemannian_chart("bumpy", _bumpy_metric, [(-1.0, 1.0)] * 2)
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.uniform(-0.8, 0.8, size=2)
        v = rng.normal(size=2)
        got = spray(chart, x, v)
        want = _christoffel_spray_oracle(x, v)
        assert np.max(np.abs(got - want)) < 1e-5


def test_spray_degree_two_homogeneity():
    chart = riemannian_chart("bumpy", _bumpy_metric, [(-1.0, 1.0)] * 2)
    x = np.array([0.3, -0.5])
    v = np.array([0.7, 0.4])
    g1 = spray(chart, x, v)
    g2 = spray(chart, x, 2.0 * v)
    assert np.max(np.abs(g2 - 4.0 * g1)) < 1e-6


def test_analytic_sprays_match_fd_fallback():
    for chart in (sphere_patch(), warped_polar("gauss_tanh")):
        x = chart.center() + 0.05
        v = np.array([0.5, 0.3])
        an = spray(chart, x, v)
        fd = spray(chart, x, v, force_fd=True)
        assert np.max(np.abs(an - fd)) < 1e-7


def test_euclidean_geodesics_are_straight():
    chart = euclidean(2)
    geo = integrate_geodesic(chart, [0.2, -0.1], [0.6, 0.8], 3.0)
    expect = np.array([0.2, -0.1]) + 3.0 * np.array([0.6, 0.8])
    assert np.max(np.abs(geo.endpoint() - expect)) < 1e-8
    assert geo.speed_drift(chart) < 1e-12


def test_minkowski_geodesics_are_straight():
    chart = minkowski_pnorm(4.0)
    v0 = chart.unit([0.0, 0.0], [1.0, 0.7])
    geo = integrate_geodesic(chart, [0.0, 0.0], v0, 2.0)
    expect = 2.0 * v0
    assert np.max(np.abs(geo.endpoint() - expect)) < 1e-8


def test_speed_conserved_on_curved_chart():
    # length 2.8 keeps the orbit short of the antipode, where stereographic
    # coordinates blow up
    chart = sphere_patch(halfwidth=20.0)
    v0 = chart.unit([0.0, 0.0], [1.0, 0.4])
    geo = integrate_geodesic(chart, [0.0, 0.0], v0, 2.8)
    assert geo.speed_drift(chart) < 1e-6


def test_warped_chart_agrees_with_model_integrator():
    surface = make_model(get_warp("gauss_tanh"), t_max=6.0)
    chart = warped_polar(surface, theta_range=(-40.0, 40.0))
    psi = 2.2
    start = ModelPoint(1.5, 0.0)
    v0 = np.array([math.cos(psi), math.sin(psi) / surface.f(start.t)])
    geo = integrate_geodesic(chart, [start.t, start.theta], v0, 5.0, 5e-3)
    ref = model_integrate(surface, start, psi, 5.0)
    for k in range(0, len(geo.s), max(1, len(geo.s) // 20)):
        s = geo.s[k]
        t_ref = np.interp(s, ref.s, ref.t)
        th_ref = np.interp(s, ref.s, ref.theta)
        assert abs(geo.x[k, 0] - t_ref) < 1e-4
        assert abs(geo.x[k, 1] - th_ref) < 1e-4


def test_bad_initial_speed_rejected():
    chart = euclidean(2)
    with pytest.raises(ValueError, match="speed"):
        integrate_geodesic(chart, [0.0, 0.0], [2.0, 0.0], 1.0)


def test_left_domain_raises_with_exit_arclength():
    chart = euclidean(2, halfwidth=1.0)
    with pytest.raises(LeftDomain) as err:
        integrate_geodesic(chart, [0.5, 0.0], [1.0, 0.0], 2.0)
    assert err.value.s_exit == pytest.approx(0.5, abs=2e-2)


def test_truncate_mode_sets_exit_flag():
    chart = euclidean(2, halfwidth=1.0)
    geo = integrate_geodesic(chart, [0.5, 0.0], [1.0, 0.0], 2.0, on_exit="truncate")
    assert geo.exited
    assert geo.s[-1] <= 0.5 + 1e-9
    assert geo.s_exit == pytest.approx(0.5, abs=2e-2)


def test_fan_matches_scalar_integration():
    chart = sphere_patch()
    x0 = np.array([0.1, -0.2])
    angles = [0.3, 1.4, 2.8]
    v0s = np.stack([chart.unit(x0, [math.cos(a), math.sin(a)]) for a in angles])
    s, xs, vs, alive = integrate_geodesic_fan(chart, x0, v0s, 0.8, 5e-3)
    assert alive[-1].all()
    for i, a in enumerate(angles):
        geo = integrate_geodesic(chart, x0, v0s[i], 0.8, 5e-3)
        assert np.max(np.abs(xs[-1, i] - geo.endpoint())) < 1e-10


def test_fan_marks_dead_rays_and_freezes_them():
    chart = euclidean(2, halfwidth=1.0)
    v0s = np.array([[1.0, 0.0], [0.0, 1.0]])
    s, xs, vs, alive = integrate_geodesic_fan(chart, np.array([0.9, 0.0]), v0s, 0.9, 1e-2)
    assert not alive[-1, 0]
    assert alive[-1, 1]
    # frozen at the last inside position, not beyond the wall
    assert xs[-1, 0, 0] <= 1.0 + 1e-12
    assert xs[-1, 1, 1] == pytest.approx(0.9, abs=1e-9)


def test_reverse_check_passes_on_reversible_charts():
    chart = sphere_patch()
    v0 = chart.unit([0.1, -0.2], [0.7, 0.4])
    geo = integrate_geodesic(chart, [0.1, -0.2], v0, 1.2, 5e-3)
    rc = reverse_geodesic_check(chart, geo)
    assert rc.is_geodesic
    assert rc.residual < 1e-6


def test_reverse_check_passes_on_constant_drift():
    chart = randers((0.3, 0.0))
    v0 = chart.unit([-0.5, 0.0], [1.0, 0.3])
    geo = integrate_geodesic(chart, [-0.5, 0.0], v0, 1.0)
    rc = reverse_geodesic_check(chart, geo)
    assert rc.is_geodesic
    assert rc.residual < 1e-6


def test_reverse_check_fails_on_curved_asymmetric_chart():
    chart = randers(preset="shear")
    v0 = chart.unit([-0.5, -0.5], [1.0, 0.8])
    geo = integrate_geodesic(chart, [-0.5, -0.5], v0, 1.2, 5e-3)
    rc = reverse_geodesic_check(chart, geo)
    assert not rc.is_geodesic
    assert rc.residual > 1e-2
