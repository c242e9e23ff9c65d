"""Triangle comparison machinery over charts and model surfaces."""

from .chains import ChainReport, broken_geodesic_chain, chain_from_geodesic
from .critical import (
    CriticalScanReport,
    CriticalVerdict,
    critical_scan,
    is_forward_critical,
)
from .growth import GrowthReport, diameter_growth
from .triangles import (
    ComparisonTriangle,
    ForwardTriangle,
    TCTReport,
    build_comparison_triangle,
    build_forward_triangle,
    comparison_triangle_from_sweep,
    model_connector_velocities,
    verify_tct,
)

__all__ = [
    "ChainReport",
    "ComparisonTriangle",
    "CriticalScanReport",
    "CriticalVerdict",
    "ForwardTriangle",
    "GrowthReport",
    "TCTReport",
    "broken_geodesic_chain",
    "build_comparison_triangle",
    "build_forward_triangle",
    "chain_from_geodesic",
    "comparison_triangle_from_sweep",
    "critical_scan",
    "diameter_growth",
    "is_forward_critical",
    "model_connector_velocities",
    "verify_tct",
]
