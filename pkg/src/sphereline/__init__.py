"""Numerical verification laboratory for surfaces in the sphere-line product.

The package computes the extrinsic geometry of parametrized surfaces immersed
in the Riemannian product of a round unit sphere and the real line, and
verifies, at quadrature precision, the structure equations, variational
formulas, and integral inequalities that govern stationary points of the
total mean curvature functional.
"""

from .errors import (
    BoundaryStencilError,
    CompactnessRequiredError,
    DegenerateImmersionError,
    FdInstabilityError,
    HypothesisViolationError,
    ImmersionDefectError,
    SphereLineError,
)
from .immersion import Immersion, Jet, catalog, catalog_entries, evaluate, jet
from .quadrature import ParameterDomain, QuadratureGrid, build_grid, integrate

__version__ = "0.1.0"

__all__ = [
    "BoundaryStencilError",
    "CompactnessRequiredError",
    "DegenerateImmersionError",
    "FdInstabilityError",
    "HypothesisViolationError",
    "Immersion",
    "ImmersionDefectError",
    "Jet",
    "ParameterDomain",
    "QuadratureGrid",
    "SphereLineError",
    "build_grid",
    "catalog",
    "catalog_entries",
    "evaluate",
    "integrate",
    "jet",
    "__version__",
]
