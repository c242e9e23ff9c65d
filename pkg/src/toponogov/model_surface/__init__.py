"""Rotationally symmetric model surfaces: warps, geodesics, distance."""

from .distance import (
    ConnectorCandidate,
    connector_candidates,
    length_lower_bound,
    model_distance,
)
from .geodesics import ModelGeodesic, integrate_geodesic, integrate_geodesic_fan
from .structure import (
    AngleLemmaReport,
    CutLocus,
    check_angle_lemma,
    cut_locus,
    first_conjugate_point,
)
from .surface import (
    ModelPoint,
    ModelSurface,
    clairaut_constant,
    classify_model,
    make_model,
    surface_from_record,
    surface_to_record,
)
from .warps import (
    BUILTIN_WARPS,
    RadialCurvature,
    Warp,
    curvature_from_warp,
    get_warp,
    validate_warp,
    warp_from_callable,
    warp_from_curvature,
)

__all__ = [
    "BUILTIN_WARPS",
    "AngleLemmaReport",
    "ConnectorCandidate",
    "CutLocus",
    "ModelGeodesic",
    "ModelPoint",
    "ModelSurface",
    "RadialCurvature",
    "Warp",
    "check_angle_lemma",
    "clairaut_constant",
    "classify_model",
    "connector_candidates",
    "curvature_from_warp",
    "cut_locus",
    "first_conjugate_point",
    "get_warp",
    "integrate_geodesic",
    "integrate_geodesic_fan",
    "length_lower_bound",
    "make_model",
    "model_distance",
    "surface_from_record",
    "surface_to_record",
    "validate_warp",
    "warp_from_callable",
    "warp_from_curvature",
]
