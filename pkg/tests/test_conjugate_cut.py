"""Conjugate points, cut locus rays, and the acute-angle check."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from toponogov.errors import HypothesisViolated
from toponogov.model_surface import (
    model_distance,
    ModelPoint,
    check_angle_lemma,
    cut_locus,
    first_conjugate_point,
    integrate_geodesic,
    make_model,
)


@pytest.fixture(scope="module")
def gauss():
    return make_model("gauss_tanh")


def _jacobi_zero_ivp(surface, t_start, s_max):
    """Independent conjugate-point oracle via an adaptive integrator."""

    def rhs(s, y):
        return [y[1], -surface.G(abs(t_start - s)) * y[0]]

    def hit_zero(s, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1
    # start a hair past zero so the event does not fire at s = 0
    s0 = 1e-8
    sol = solve_ivp(
        rhs,
        (s0, s_max),
        [s0, 1.0],
        events=hit_zero,
        rtol=1e-12,
        atol=1e-14,
        dense_output=False,
    )
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return None


def test_conjugate_point_matches_adaptive_oracle(gauss):
    for t0 in (0.5, 1.2, 2.0):
        got = first_conjugate_point(gauss, t0)
        want = _jacobi_zero_ivp(gauss, t0, t0 + gauss.t_max)
        assert got is not None and want is not None
        assert got == pytest.approx(want, abs=1e-6)


def test_conjugate_point_frozen_values(gauss):
    assert first_conjugate_point(gauss, 0.5) == pytest.approx(1.1388853, abs=1e-5)
    assert first_conjugate_point(gauss, 1.2) == pytest.approx(1.3300838, abs=1e-5)


def test_conjugate_point_from_refocusing_fan():
    # geometric oracle: nearly-radial launches refocus on the opposite
    # meridian; the crossing arc length tends to the conjugate distance
    surface = make_model("gauss_tanh", t_min=1e-4)
    t0 = 1.2
    crossings = []
    deltas = (0.06, 0.04, 0.02)
    for delta in deltas:
        geo = integrate_geodesic(
            surface, ModelPoint(t0, 0.0), math.pi - delta, length=2.2, step=5e-5
        )
        above = geo.theta >= math.pi
        idx = np.nonzero(above[:-1] != above[1:])[0]
        assert idx.size, "trajectory should cross the opposite meridian"
        i = idx[0]
        lam = (math.pi - geo.theta[i]) / (geo.theta[i + 1] - geo.theta[i])
        crossings.append(float(geo.s[i] + lam * (geo.s[i + 1] - geo.s[i])))
    # extrapolate the delta^2 convergence to zero aperture
    x = np.array(deltas) ** 2
    fit = np.polyfit(x, crossings, 1)
    assert fit[1] == pytest.approx(first_conjugate_point(surface, t0), abs=1e-3)


def test_no_conjugate_points_without_positive_curvature():
    flat = make_model("flat")
    hyper = make_model("sinh", t_max=6.0)
    assert first_conjugate_point(flat, 1.0) is None
    assert first_conjugate_point(hyper, 1.0) is None


def test_budget_exhaustion_returns_none(gauss):
    assert first_conjugate_point(gauss, 1.2, budget=0.5) is None


def test_cut_locus_empty_on_nonfocusing_models():
    flat = make_model("flat")
    hyper = make_model("sinh", t_max=6.0)
    assert cut_locus(flat, ModelPoint(1.2, 0.0)).empty
    assert cut_locus(hyper, ModelPoint(1.2, 0.0)).empty


def test_cut_locus_ray_starts_at_conjugate_point(gauss):
    # collapsing case: for the decaying warp the cut ray on the opposite
    # meridian begins where the radial geodesic first refocuses
    point = ModelPoint(1.2, 0.0)
    ray = cut_locus(gauss, point)
    assert not ray.empty
    assert ray.theta == pytest.approx(point.theta + math.pi)
    conj = first_conjugate_point(gauss, point.t) - point.t
    assert ray.t_cut == pytest.approx(conj, abs=1e-3)


def test_cut_locus_angular_offset_carries_base_theta(gauss):
    ray = cut_locus(gauss, ModelPoint(1.2, 0.7))
    assert ray.theta == pytest.approx(0.7 + math.pi)


def test_angle_lemma_beyond_waist(gauss):
    report = check_angle_lemma(gauss, ModelPoint(0.9, 0.0), ModelPoint(1.4, 0.3))
    assert report.passes
    assert report.angle_at_x < math.pi / 2
    assert report.min_t > gauss.critical_radius


def test_angle_lemma_holds_on_tube_wrap(gauss):
    # on the collapsing tube the wrap leaves x outward at a shallow
    # angle and never dips toward the waist, so the check still passes
    report = check_angle_lemma(gauss, ModelPoint(1.5, 0.0), ModelPoint(2.0, math.pi))
    assert report.passes
    assert report.angle_at_x < 0.5
    assert report.min_t >= 1.5


def test_angle_lemma_angle_consistent_with_clairaut(gauss):
    # the reported angle must match the winning connector's Clairaut data
    x, y = ModelPoint(0.7, 0.0), ModelPoint(0.7, math.pi)
    report = check_angle_lemma(gauss, x, y)
    _, geo = model_distance(gauss, x, y)
    fx = gauss.f(x.t)
    want = math.atan2(geo.clairaut / fx, math.sqrt(1.0 - (geo.clairaut / fx) ** 2))
    assert report.angle_at_x == pytest.approx(want, abs=1e-12)
    assert report.passes


def test_angle_lemma_preconditions(gauss):
    with pytest.raises(HypothesisViolated):
        check_angle_lemma(gauss, ModelPoint(0.3, 0.0), ModelPoint(1.4, 0.3))
    with pytest.raises(HypothesisViolated):
        check_angle_lemma(gauss, ModelPoint(1.4, 0.0), ModelPoint(0.9, 0.3))
    flat = make_model("flat")
    with pytest.raises(HypothesisViolated):
        check_angle_lemma(flat, ModelPoint(1.0, 0.0), ModelPoint(2.0, 0.3))
