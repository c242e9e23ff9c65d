"""Chart-based Finsler numerics: tensors, sprays, distances, curvature."""

from .angles import backward_angle, forward_angle, point_distance
from .charts import (
    POLE,
    FinslerChart,
    chart_from_record,
    chart_to_record,
    conformal_chart,
    euclidean,
    minkowski_pnorm,
    randers,
    riemannian_chart,
    sphere_patch,
    validate_chart,
    warped_polar,
)
from .curvature import (
    RadialBoundReport,
    chern_coefficients,
    covariant_derivative,
    flag_curvature,
    radial_bound_check,
    riemann_operator,
    tangent_curvature,
)
from .distance import MinimalConnector, distance, dm, reversed_length
from .spray import (
    ChartGeodesic,
    ReverseCheck,
    integrate_geodesic,
    integrate_geodesic_fan,
    reverse_geodesic_check,
    spray,
)
from .tensor import (
    FundamentalTensorValue,
    direction_samples,
    fundamental_tensor,
    tensor_matrix,
    uniform_convexity_margin,
)

__all__ = [
    "POLE",
    "ChartGeodesic",
    "FinslerChart",
    "FundamentalTensorValue",
    "MinimalConnector",
    "RadialBoundReport",
    "ReverseCheck",
    "backward_angle",
    "chart_from_record",
    "chart_to_record",
    "chern_coefficients",
    "conformal_chart",
    "covariant_derivative",
    "direction_samples",
    "distance",
    "dm",
    "euclidean",
    "flag_curvature",
    "forward_angle",
    "fundamental_tensor",
    "integrate_geodesic",
    "integrate_geodesic_fan",
    "minkowski_pnorm",
    "point_distance",
    "radial_bound_check",
    "randers",
    "reverse_geodesic_check",
    "reversed_length",
    "riemann_operator",
    "riemannian_chart",
    "sphere_patch",
    "spray",
    "tangent_curvature",
    "tensor_matrix",
    "uniform_convexity_margin",
    "validate_chart",
    "warped_polar",
]
