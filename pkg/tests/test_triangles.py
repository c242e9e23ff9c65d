"""Comparison triangles on model surfaces: placement, angles, admissibility."""

import math

import numpy as np
import pytest

from toponogov.comparison import (
    build_comparison_triangle,
    comparison_triangle_from_sweep,
)
from toponogov.errors import NotAdmissible
from toponogov.model_surface import get_warp, make_model


@pytest.fixture(scope="module")
def flat():
    return make_model(get_warp("flat"), t_max=60.0)


@pytest.fixture(scope="module")
def gauss():
    return make_model(get_warp("gauss_tanh"), t_max=6.0)


def _planar_side(t_x, t_y, dtheta):
    return math.sqrt(t_x * t_x + t_y * t_y - 2.0 * t_x * t_y * math.cos(dtheta))


def test_law_of_cosines_on_the_plane(flat):
    rng = np.random.default_rng(20240817)
    for _ in range(25):
        t_x = rng.uniform(0.5, 3.0)
        t_y = rng.uniform(0.5, 3.0)
        dtheta = rng.uniform(0.05, math.pi - 0.05)
        side = _planar_side(t_x, t_y, dtheta)
        tri = build_comparison_triangle(flat, t_x, t_y, side)
        assert tri.delta_theta == pytest.approx(dtheta, abs=1e-8)
        assert tri.realized_side == pytest.approx(side, abs=1e-8)
        # interior angles against the planar law at both base vertices
        cos_x = (t_x * t_x + side * side - t_y * t_y) / (2.0 * t_x * side)
        cos_y = (t_y * t_y + side * side - t_x * t_x) / (2.0 * t_y * side)
        assert tri.angle_x == pytest.approx(math.acos(np.clip(cos_x, -1, 1)), abs=1e-8)
        assert tri.angle_y == pytest.approx(math.acos(np.clip(cos_y, -1, 1)), abs=1e-8)
        assert tri.angle_p == pytest.approx(dtheta, abs=1e-12)


def test_right_triangle_three_four_five(flat):
    tri = build_comparison_triangle(flat, 3.0, 5.0, 4.0)
    assert tri.angle_x == pytest.approx(math.pi / 2, abs=1e-7)
    assert tri.angle_y == pytest.approx(math.asin(3.0 / 5.0), abs=1e-7)
    assert tri.realized_side == pytest.approx(4.0, abs=1e-9)


def test_realized_side_self_consistency(gauss):
    rng = np.random.default_rng(7)
    for _ in range(8):
        t_x = rng.uniform(1.0, 2.2)
        t_y = rng.uniform(1.0, 2.2)
        lo = abs(t_y - t_x)
        side = lo + rng.uniform(0.05, 0.3)
        try:
            tri = build_comparison_triangle(gauss, t_x, t_y, side)
        except NotAdmissible:
            continue  # side beyond the reach at separation pi
        assert abs(tri.realized_side - side) <= 1e-6
        assert 0.0 <= tri.angle_x <= math.pi
        assert 0.0 <= tri.angle_y <= math.pi


def test_colinear_angle_conventions(flat):
    out = build_comparison_triangle(flat, 1.0, 2.5, 1.5)
    assert out.delta_theta == 0.0
    assert (out.angle_x, out.angle_y) == (math.pi, 0.0)
    inward = build_comparison_triangle(flat, 2.5, 1.0, 1.5)
    assert (inward.angle_x, inward.angle_y) == (0.0, math.pi)


def test_inadmissible_sides(flat, gauss):
    with pytest.raises(NotAdmissible, match="shorter than the radial gap"):
        build_comparison_triangle(flat, 1.0, 3.0, 1.5)
    with pytest.raises(NotAdmissible, match="collapses to a point"):
        build_comparison_triangle(flat, 1.0, 1.0, 0.0)
    # the funnel caps the reach between these radii well below the plane
    with pytest.raises(NotAdmissible, match="exceeds the model's reach"):
        build_comparison_triangle(gauss, 1.5, 2.0, 0.8)


def test_reach_at_full_separation_matches_engine(gauss):
    tri = build_comparison_triangle(gauss, 1.5, 2.0, 0.5113769641152783)
    assert tri.delta_theta == pytest.approx(math.pi, abs=1e-6)
    near = build_comparison_triangle(gauss, 1.5, 2.0, 0.508)
    assert near.delta_theta < math.pi


def test_sweep_pinned_matches_side_pinned(flat):
    side = _planar_side(1.2, 1.9, 0.7)
    by_side = build_comparison_triangle(flat, 1.2, 1.9, side)
    by_sweep = comparison_triangle_from_sweep(flat, 1.2, 1.9, 0.7)
    assert by_sweep.realized_side == pytest.approx(by_side.realized_side, rel=1e-10)
    assert by_sweep.angle_x == pytest.approx(by_side.angle_x, abs=1e-9)
    assert by_sweep.angle_y == pytest.approx(by_side.angle_y, abs=1e-9)
    assert by_sweep.side_xy == pytest.approx(by_sweep.realized_side)


def test_sweep_pinned_validation(flat):
    with pytest.raises(ValueError, match="sweep must lie"):
        comparison_triangle_from_sweep(flat, 1.0, 2.0, -0.3)
    with pytest.raises(ValueError, match="outside the model domain"):
        comparison_triangle_from_sweep(flat, 0.0, 2.0, 0.3)
    with pytest.raises(NotAdmissible, match="collapses to a point"):
        comparison_triangle_from_sweep(flat, 1.5, 1.5, 0.0)


def test_vertex_domain_check(flat):
    with pytest.raises(ValueError, match="outside the model domain"):
        build_comparison_triangle(flat, -1.0, 2.0, 2.5)
