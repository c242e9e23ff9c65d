"""Exception types raised by the geometry routines.

Every failure mode that a caller can meaningfully react to gets its own
class; anything else surfaces as ValueError from input validation.
"""


class GeometryError(Exception):
    """Base class for all package-specific errors."""


class WarpVanishes(GeometryError):
    """Warp function hit zero (or went negative) away from the pole."""


class PoleTooClose(GeometryError):
    """Requested operation needs a base point bounded away from the pole."""


class PoleCrossing(GeometryError):
    """A traced geodesic ran into the coordinate pole t = 0."""


class MultipleCriticalRadii(GeometryError):
    """Warp derivative has more than one sign change, so no single waist."""


class ShootingFailed(GeometryError):
    """No connecting geodesic found between the requested endpoints."""


class IntegrandSingular(GeometryError):
    """Quadrature integrand is singular on the requested interval."""


class HypothesisViolated(GeometryError):
    """A comparison-statement hypothesis failed on the given data."""


class DegenerateTensor(GeometryError):
    """Fundamental tensor is not positive definite at the given flag."""


class FlagDegenerate(GeometryError):
    """Flag plane is degenerate: the two vectors are parallel."""


class AngleUnstable(GeometryError):
    """Difference-quotient angle did not converge under step refinement."""


class LeftDomain(GeometryError):
    """Integrated curve left the chart's coordinate box."""


class NotAdmissible(GeometryError):
    """Requested side lengths violate the triangle inequality constraints."""


class HingeViolated(GeometryError):
    """Chain construction produced a hinge angle exceeding pi."""


class ConfigInvalid(GeometryError):
    """Scenario file is malformed or references unknown names."""
