"""Numerical workbench for comparison geometry on surfaces of revolution.

Three layers: `model_surface` builds rotationally symmetric reference
surfaces and solves their geodesic problems exactly up to quadrature;
`finsler` provides chart-level Finsler metrics with shooting-based
distances, angles, and curvature probes; `comparison` assembles both
into triangle comparison checks, criticality scans, and broken
geodesic chains.  The `cli` layer runs declarative scenario files.
"""

from . import errors

__version__ = "0.1.0"

__all__ = ["errors", "__version__"]
