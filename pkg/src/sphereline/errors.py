"""Exception types shared across the package.

Invalid-argument conditions raise the built-in ValueError; the classes here
cover failure modes that carry geometric meaning.
"""


class SphereLineError(Exception):
    """Base class for geometry-specific failures."""


class ImmersionDefectError(SphereLineError):
    """An evaluator left the ambient constraint set beyond tolerance."""


class DegenerateImmersionError(SphereLineError):
    """The induced metric is singular (det g below threshold) at a point."""


class FdInstabilityError(SphereLineError):
    """Finite-difference cancellation detected (step too small for 64-bit)."""


class BoundaryStencilError(SphereLineError):
    """A difference stencil left a non-periodic axis with no way to evaluate."""


class CompactnessRequiredError(SphereLineError):
    """An integral operation was invoked on a non-compact surface."""


class HypothesisViolationError(SphereLineError):
    """A stated hypothesis (stationarity, slice containment) fails numerically."""
