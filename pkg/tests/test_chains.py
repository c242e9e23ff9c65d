"""Broken geodesic chains: panel layout, hinge checks, under-passing."""

import math

import pytest

from toponogov.comparison import broken_geodesic_chain, chain_from_geodesic
from toponogov.errors import HingeViolated, NotAdmissible
from toponogov.model_surface import ModelPoint, get_warp, make_model, model_distance

# winding invariant of the minimal connector (1, 0) -> (t_end, 0.3),
# frozen from an independent bisection on the angular-cost integral
FROZEN_NU = {
    3.0: 5.2566117849e-08,
    5.0: 1.1452017627e-21,
    8.0: 2.4595971572e-55,
}


@pytest.fixture(scope="module")
def gauss():
    return make_model(get_warp("gauss_tanh"), t_max=12.0)


@pytest.fixture(scope="module")
def flat():
    return make_model(get_warp("flat"), t_max=60.0)


def _subdivided_report(model, t_end, k=4):
    _, geo = model_distance(model, ModelPoint(1.0, 0.0), ModelPoint(t_end, 0.3))
    return broken_geodesic_chain(model, chain_from_geodesic(model, geo, k)), geo


@pytest.mark.parametrize("t_end", [3.0, 5.0, 8.0])
def test_chain_reproduces_frozen_invariant(gauss, t_end):
    rep, geo = _subdivided_report(gauss, t_end)
    assert rep.nu == pytest.approx(FROZEN_NU[t_end], rel=1e-6)
    assert rep.nu == pytest.approx(abs(geo.clairaut), rel=1e-6)


def test_invariant_decays_down_the_funnel(gauss):
    nus = [_subdivided_report(gauss, t_end)[0].nu for t_end in (3.0, 5.0, 8.0)]
    assert nus[0] > nus[1] > nus[2] > 0.0


@pytest.mark.parametrize("t_end", [3.0, 5.0, 8.0])
def test_chain_certificates(gauss, t_end):
    rep, geo = _subdivided_report(gauss, t_end)
    assert all(h <= math.pi + 1e-6 for h in rep.hinge_sums)
    assert rep.eta_length <= rep.xi_length + 1e-6
    assert rep.length_ok
    # subdividing a minimizer reproduces its own length
    assert rep.xi_length == pytest.approx(geo.length, abs=1e-4)
    assert rep.bound_holds
    assert rep.bound_lhs == pytest.approx(4.0 * rep.radii[0])
    assert rep.bound_rhs >= 0.0
    assert rep.passes_under
    assert rep.under_excess <= 1e-6
    assert rep.theta_offsets[-1] == pytest.approx(0.3, abs=1e-9)


def test_turning_connector_chain(gauss):
    # the chord between equal radii dips inward; panels straddle the
    # radial turn and the subdivision still under-passes itself
    for k in (3, 4):
        _, geo = model_distance(gauss, ModelPoint(1.5, 0.0), ModelPoint(1.5, 2.0))
        rep = broken_geodesic_chain(gauss, chain_from_geodesic(gauss, geo, k))
        assert all(h <= math.pi + 1e-6 for h in rep.hinge_sums)
        assert rep.eta_length == pytest.approx(geo.length, rel=1e-8)
        assert rep.passes_under
        assert rep.under_excess <= 1e-6


def test_tangential_panel_chain(flat):
    # nodes along a straight line tangent to the unit circle: every
    # panel shares the line's invariant and the line under-passes
    # itself exactly
    thetas = [0.0, 0.35, 0.7, 1.0]
    rows = []
    for a in range(3):
        r_a, r_b = 1.0 / math.cos(thetas[a]), 1.0 / math.cos(thetas[a + 1])
        d, _ = model_distance(
            flat, ModelPoint(r_a, thetas[a]), ModelPoint(r_b, thetas[a + 1]), path=False
        )
        rows.append((r_a, r_b, d))
    rep = broken_geodesic_chain(flat, rows)
    assert rep.nu == pytest.approx(1.0, abs=1e-9)
    assert all(h == pytest.approx(math.pi, abs=1e-6) for h in rep.hinge_sums)
    assert rep.eta_length == pytest.approx(math.tan(1.0), rel=1e-9)
    assert rep.passes_under
    assert rep.under_excess <= 1e-6


def test_meridian_chain_collapses_to_a_segment(flat):
    rep = broken_geodesic_chain(flat, [(1.0, 2.0, 1.0), (2.0, 3.5, 1.5)])
    assert rep.nu == 0.0
    assert rep.eta_length == pytest.approx(2.5, abs=1e-12)
    assert rep.xi_length == pytest.approx(2.5, abs=1e-12)
    assert rep.passes_under
    assert rep.under_excess <= 0.0


def test_zigzag_violates_the_hinge_condition(flat):
    d, _ = model_distance(flat, ModelPoint(2.0, 0.0), ModelPoint(1.0, 0.3), path=False)
    with pytest.raises(HingeViolated, match="adjacent angles sum"):
        broken_geodesic_chain(flat, [(2.0, 1.0, d), (1.0, 2.0, d)])


def test_panel_row_validation(flat):
    with pytest.raises(ValueError, match="tuples"):
        broken_geodesic_chain(flat, [(1.0, 2.0)])
    with pytest.raises(NotAdmissible, match="inconsistent with sweep"):
        broken_geodesic_chain(flat, [(1.0, 2.0, 1.05, 0.4)])
    with pytest.raises(NotAdmissible, match="panel 1"):
        broken_geodesic_chain(flat, [(1.0, 2.0, 1.0), (2.0, 4.0, 1.0)])


def test_subdivision_needs_a_panel(gauss):
    _, geo = model_distance(gauss, ModelPoint(1.0, 0.0), ModelPoint(3.0, 0.3))
    with pytest.raises(ValueError, match="at least one panel"):
        chain_from_geodesic(gauss, geo, 0)


def test_signed_sweeps_round_trip(flat):
    # a sweep-pinned panel carries its orientation; mirrored chains
    # report mirrored offsets but identical certificates
    _, geo = model_distance(flat, ModelPoint(1.0, 0.0), ModelPoint(2.0, 0.5))
    rows = chain_from_geodesic(flat, geo, 2)
    rep = broken_geodesic_chain(flat, rows)
    mirrored = [(a, b, side, -sw) for a, b, side, sw in rows]
    rep_m = broken_geodesic_chain(flat, mirrored)
    assert rep_m.theta_offsets[-1] == pytest.approx(-rep.theta_offsets[-1], abs=1e-12)
    assert rep_m.eta_length == pytest.approx(rep.eta_length, rel=1e-10)
    assert rep_m.passes_under == rep.passes_under
