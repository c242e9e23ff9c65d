"""Two-point distance on model surfaces against independent oracles."""

import math

import numpy as np
import pytest

from toponogov.errors import IntegrandSingular, PoleTooClose
from toponogov.model_surface import (
    ModelPoint,
    connector_candidates,
    integrate_geodesic,
    integrate_geodesic_fan,
    length_lower_bound,
    make_model,
    model_distance,
)


@pytest.fixture(scope="module")
def flat():
    return make_model("flat")


@pytest.fixture(scope="module")
def hyper():
    return make_model("sinh", t_max=6.0)


@pytest.fixture(scope="module")
def gauss():
    return make_model("gauss_tanh")


def test_flat_law_of_cosines(flat):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        t1, t2 = rng.uniform(0.3, 3.0, 2)
        th = rng.uniform(-math.pi, math.pi)
        d, _ = model_distance(flat, ModelPoint(t1, 0.0), ModelPoint(t2, th), path=False)
        ref = math.sqrt(t1 * t1 + t2 * t2 - 2.0 * t1 * t2 * math.cos(th))
        worst = max(worst, abs(d - ref))
    assert worst <= 1e-8


def test_hyperbolic_law_of_cosines(hyper):
    rng = np.random.default_rng(5)
    for _ in range(60):
        t1, t2 = rng.uniform(0.3, 3.0, 2)
        th = rng.uniform(-math.pi, math.pi)
        d, _ = model_distance(hyper, ModelPoint(t1, 0.0), ModelPoint(t2, th), path=False)
        arg = math.cosh(t1) * math.cosh(t2) - math.sinh(t1) * math.sinh(t2) * math.cos(th)
        ref = math.acosh(max(1.0, arg))
        assert d == pytest.approx(ref, abs=1e-9)


def test_meridian_and_pole_routes_are_exact(flat):
    d, geo = model_distance(flat, ModelPoint(0.5, 0.2), ModelPoint(2.5, 0.2))
    assert d == 2.0
    assert geo.branch == "meridian"
    d, geo = model_distance(flat, ModelPoint(1.0, 0.0), ModelPoint(1.5, math.pi))
    assert d == 2.5
    assert geo.branch == "pole"
    # the through-pole path is continuous in arc length
    assert np.all(np.diff(geo.s) > 0.0)


def test_near_antipodal_stays_clean(flat):
    # the small-Clairaut winding limit must not beat the pole route
    for eps in (1e-3, 1e-7, 1e-11):
        th = math.pi - eps
        d, _ = model_distance(flat, ModelPoint(1.0, 0.0), ModelPoint(1.0, th), path=False)
        ref = math.sqrt(2.0 - 2.0 * math.cos(th))
        assert d == pytest.approx(ref, abs=1e-9)


def test_symmetry_and_triangle_inequality(gauss):
    rng = np.random.default_rng(9)
    for _ in range(15):
        pts = [
            ModelPoint(rng.uniform(0.3, 2.5), rng.uniform(-math.pi, math.pi))
            for _ in range(3)
        ]
        dab, _ = model_distance(gauss, pts[0], pts[1], path=False)
        dba, _ = model_distance(gauss, pts[1], pts[0], path=False)
        dbc, _ = model_distance(gauss, pts[1], pts[2], path=False)
        dac, _ = model_distance(gauss, pts[0], pts[2], path=False)
        assert dab == pytest.approx(dba, abs=1e-10)
        assert dac <= dab + dbc + 1e-6


def test_distance_against_shooting_fan_oracle(gauss):
    # independent oracle: RK4 fan over launch angles, bisected on the
    # crossing angle at the target radius circle
    a = ModelPoint(2.0, 0.0)
    t_target, th_target = 2.5, 0.4
    d, geo = model_distance(gauss, a, ModelPoint(t_target, th_target), path=False)

    def crossing_theta_and_length(psi, length=3.0, step=1e-3):
        g = integrate_geodesic(gauss, a, psi, length=length, step=step)
        below = g.t < t_target
        idx = np.nonzero(below[:-1] != below[1:])[0]
        if idx.size == 0:
            return None
        i = idx[0]
        lam = (t_target - g.t[i]) / (g.t[i + 1] - g.t[i])
        return (
            g.theta[i] + lam * (g.theta[i + 1] - g.theta[i]),
            g.s[i] + lam * (g.s[i + 1] - g.s[i]),
        )

    lo, hi = 1e-8, math.pi / 2
    th_lo = crossing_theta_and_length(lo)[0] - th_target
    best = None
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        res = crossing_theta_and_length(mid)
        if res is None:
            hi = mid
            continue
        if (res[0] - th_target) * th_lo > 0.0:
            lo = mid
            th_lo = res[0] - th_target
        else:
            hi = mid
        best = res
    assert best is not None
    assert d == pytest.approx(best[1], abs=1e-5)


def test_path_reproduces_ode_solution(gauss):
    # quadrature-sampled path against direct integration of the same launch
    a, b = ModelPoint(1.0, 0.0), ModelPoint(1.8, 0.9)
    d, geo = model_distance(gauss, a, b)
    ode = integrate_geodesic(gauss, a, geo.psi, length=d, step=1e-4)
    end = ode.endpoint()
    assert end.t == pytest.approx(b.t, abs=1e-6)
    assert math.remainder(end.theta - b.theta, 2.0 * math.pi) == pytest.approx(
        0.0, abs=1e-6
    )
    # spot-check a mid-path sample against the ODE trace
    k = len(geo.s) // 2
    assert float(np.interp(geo.s[k], ode.s, ode.t)) == pytest.approx(
        geo.t[k], abs=1e-6
    )


def test_path_unit_speed_and_endpoint(gauss):
    rng = np.random.default_rng(21)
    for _ in range(8):
        a = ModelPoint(rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi))
        b = ModelPoint(rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi))
        if abs(a.t - b.t) < 1e-3:
            continue
        d, geo = model_distance(gauss, a, b)
        assert geo.s[0] == 0.0
        assert geo.s[-1] == pytest.approx(d, rel=1e-9)
        assert geo.t[0] == pytest.approx(a.t, abs=1e-12)
        assert geo.t[-1] == pytest.approx(b.t, abs=1e-10)
        assert geo.unit_speed_residual(gauss) <= 1e-8
        assert geo.clairaut_drift(gauss) <= 1e-8


def test_connector_enumeration_includes_winding_routes(gauss):
    # points on the narrow tube: both the short arc and the wrap exist
    cands = connector_candidates(gauss, ModelPoint(1.5, 0.0), ModelPoint(2.0, math.pi))
    assert len(cands) >= 2
    branches = {c.branch for c in cands}
    assert "mono" in branches
    lengths = [c.length for c in cands]
    assert lengths == sorted(lengths)
    assert lengths[0] < 1.0  # tube wrap beats both meridian routes


def test_rejects_points_outside_working_range(gauss):
    with pytest.raises(PoleTooClose):
        model_distance(gauss, ModelPoint(1e-5, 0.0), ModelPoint(1.0, 1.0))


# --- length lower bound ---------------------------------------------------


def _flat_bound(nu, t0, t1):
    # closed form of the defect integral for f(t) = t
    return (t1 - t0) + 0.5 * nu * (math.acos(nu / t1) - math.acos(nu / t0))


def test_length_bound_flat_closed_form(flat):
    for nu, t0, t1 in [(0.3, 0.5, 2.0), (0.9, 1.0, 3.0), (0.1, 0.2, 1.0)]:
        got = length_lower_bound(flat, nu, t0, t1)
        assert got == pytest.approx(_flat_bound(nu, t0, t1), rel=1e-9)


def test_length_bound_zero_clairaut_is_radial(gauss):
    assert length_lower_bound(gauss, 0.0, 0.7, 2.3) == pytest.approx(1.6, rel=1e-15)


def test_length_bound_raises_when_singular(gauss):
    # nu equals the warp value inside the interval: integrand blows up
    nu = gauss.f(1.0)
    with pytest.raises(IntegrandSingular):
        length_lower_bound(gauss, nu, 0.9, 1.1)


def test_monotone_segments_obey_length_bound(gauss):
    # bound must sit at or below the true segment length
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 25:
        t0 = rng.uniform(0.7, 2.0)
        psi = rng.uniform(0.1, 0.45 * math.pi)
        geo = integrate_geodesic(gauss, ModelPoint(t0, 0.0), psi, length=2.5)
        tp_sign = np.sign(geo.tp)
        if np.any(tp_sign[:-1] != tp_sign[0]):
            monotone_end = int(np.argmax(tp_sign[:-1] != tp_sign[0]))
        else:
            monotone_end = len(geo.s) - 1
        if monotone_end < 10:
            continue
        seg_len = float(geo.s[monotone_end])
        ta = float(geo.t[0])
        tb = float(geo.t[monotone_end])
        if tb <= ta + 1e-3:
            continue
        try:
            bound = length_lower_bound(gauss, geo.clairaut, ta, tb)
        except IntegrandSingular:
            continue
        assert seg_len >= bound - 1e-6
        checked += 1
