"""Immersions into the product of the unit n-sphere and the real line.

The ambient space is embedded in R^(n+2): the first n+1 coordinates carry the
sphere factor (unit norm), the last coordinate is the line factor.  Catalog
surfaces ship closed-form jets to any order through separable trig charts;
generic evaluators fall back to central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    SeparableChart,
    const_expr,
    cos_f,
    lin_f,
    one_f,
    product_expr,
    sin_f,
    sum_expr,
)
from .errors import FdInstabilityError, ImmersionDefectError
from .quadrature import ParameterDomain

CONSTRAINT_TOL = 1e-9

# Central difference steps, as a fraction of the axis extent.  First
# derivatives tolerate the small step; second differences at 1e-4*extent hit
# a roundoff floor above the closed-form agreement target on short axes, so
# orders >= 2 use the larger step (4th-order stencils keep truncation small).
FD_STEP_LOW = 1e-4  # order 1
FD_STEP_HIGH = 1e-3  # orders 2-4 (orders 3-4 add one Richardson level)


def sphere_part(x: np.ndarray) -> np.ndarray:
    return x[..., :-1]


def height_part(x: np.ndarray) -> np.ndarray:
    return x[..., -1]


def check_on_product(x: np.ndarray, tol: float = CONSTRAINT_TOL) -> None:
    norms = np.linalg.norm(sphere_part(x), axis=-1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise ImmersionDefectError(
            f"sphere-part norm deviates from 1 by {worst:.3e} (tol {tol:.1e})"
        )


@dataclass
class Jet:
    """Derivatives of an immersion at one parameter point.

    ``tensors[k]`` has shape (m,)*k + (d,) and is symmetric in its k
    parameter indices.
    """

    point: np.ndarray
    order: int
    tensors: dict[int, np.ndarray]

    @property
    def value(self) -> np.ndarray:
        return self.tensors[0]

    def partial(self, *axes: int) -> np.ndarray:
        arr = self.tensors[len(axes)]
        for ax in axes:
            arr = arr[ax]
        return arr


@dataclass(frozen=True)
class Immersion:
    """A parametrized surface in the sphere-line product.

    ``chart`` provides exact jets when the surface has a closed form;
    otherwise jets come from finite differences of ``evaluate``.
    """

    name: str
    sphere_dim: int  # n
    param_dim: int  # m
    domain: ParameterDomain
    chart: SeparableChart | None
    chi: int | None
    compact: bool
    properties: frozenset = field(default_factory=frozenset)
    params: dict = field(default_factory=dict)
    default_resolution: tuple[int, ...] = (64, 64)
    evaluator: object = None  # callable points -> ambient, when chart is None

    @property
    def ambient_dim(self) -> int:
        return self.sphere_dim + 2

    def has_closed_form_jets(self) -> bool:
        return self.chart is not None or hasattr(self.evaluator, "jet")

    def claims(self, prop: str) -> bool:
        return prop in self.properties

    def raw_evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.chart is not None:
            return self.chart.evaluate(pts)
        return self.evaluator(pts)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate and enforce the ambient constraint."""
        x = self.raw_evaluate(points)
        check_on_product(x)
        return x

    def jet_batch(self, points: np.ndarray, order: int, fd_step: float | None = None) -> dict[int, np.ndarray]:
        """Jets at a batch of points, shape (..., m)* -> {k: (..., (m,)*k, d)}."""
        if not 1 <= order <= 4:
            raise ValueError("jet order must lie in 1..4")
        pts = np.asarray(points, dtype=float)
        if self.chart is not None:
            return self.chart.jet(pts, order)
        if hasattr(self.evaluator, "jet"):
            return self.evaluator.jet(pts, order)
        return _fd_jets(self, pts, order, fd_step)


def evaluate(imm: Immersion, p) -> np.ndarray:
    return imm.evaluate(np.asarray(p, dtype=float))


def jet(imm: Immersion, p, order: int, fd_step: float | None = None) -> Jet:
    p = np.asarray(p, dtype=float)
    tensors = imm.jet_batch(p[None, :], order, fd_step=fd_step)
    squeezed = {k: v[0] for k, v in tensors.items()}
    return Jet(point=p, order=order, tensors=squeezed)


# ---------------------------------------------------------------------------
# Finite-difference jets
# ---------------------------------------------------------------------------

# 4th-order central first and second derivative weights on offsets -2..2.
_D1_O4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_O4 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# 2nd-order central third/fourth derivative weights on offsets -2..2.
_D3_O2 = np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0
_D4_O2 = np.array([1.0, -4.0, 6.0, -4.0, 1.0])

_WEIGHTS = {1: (_D1_O4, 1), 2: (_D2_O4, 2), 3: (_D3_O2, 3), 4: (_D4_O2, 4)}


def _axis_derivative(f, pts, axis, k, h):
    weights, power = _WEIGHTS[k]
    out = None
    for offset, w in zip(range(-2, 3), weights):
        if w == 0.0:
            continue
        shifted = pts.copy()
        shifted[..., axis] += offset * h
        term = w * f(shifted)
        out = term if out is None else out + term
    return out / h**power


def _multi_derivative(f, pts, counts, steps):
    """Apply per-axis central stencils for the multi-order ``counts``."""
    axis = next(i for i, c in enumerate(counts) if c > 0)
    k = counts[axis]
    rest = list(counts)
    rest[axis] = 0
    if any(rest):
        def g(q):
            return _multi_derivative(f, q, tuple(rest), steps)
    else:
        g = f
    return _axis_derivative(g, pts, axis, k, steps[axis])


def _fd_jets(imm: Immersion, pts: np.ndarray, order: int, fd_step: float | None) -> dict[int, np.ndarray]:
    m = imm.param_dim
    d = imm.ambient_dim
    base = pts.shape[:-1]
    extents = imm.domain.extents
    f = imm.raw_evaluate

    jets: dict[int, np.ndarray] = {0: f(pts)}

    def steps_for(total_order: int) -> tuple[float, ...]:
        frac = FD_STEP_LOW if total_order <= 1 else FD_STEP_HIGH
        if fd_step is not None:
            frac = fd_step
            return tuple(frac * e for e in extents)
        if total_order >= 3:
            # Third and fourth differences are roundoff-limited; floor short
            # axes at a full period so the step does not collapse with them.
            return tuple(frac * max(e, 2.0 * math.pi) for e in extents)
        return tuple(frac * e for e in extents)

    cache: dict[tuple[int, ...], np.ndarray] = {}

    def counts_value(counts: tuple[int, ...]) -> np.ndarray:
        if counts in cache:
            return cache[counts]
        total = sum(counts)
        steps = steps_for(total)
        val = _multi_derivative(f, pts, counts, steps)
        if max(counts) >= 3:
            # The third/fourth difference stencils are second order; one
            # Richardson level lifts them to O(h^4).
            half = tuple(s / 2.0 for s in steps)
            val_half = _multi_derivative(f, pts, counts, half)
            val = (4.0 * val_half - val) / 3.0
        cache[counts] = val
        return val

    for k in range(1, order + 1):
        arr = np.empty(base + (m,) * k + (d,))
        for idx in np.ndindex(*([m] * k)):
            counts = tuple(sum(1 for i in idx if i == ax) for ax in range(m))
            arr[(Ellipsis, *idx, slice(None))] = counts_value(counts)
        jets[k] = arr

    if order >= 2 and m >= 2:
        _check_mixed_symmetry(f, pts, steps_for(2), jets, imm)
    return jets


def _check_mixed_symmetry(f, pts, steps, jets, imm):
    """Detect cancellation: the mixed partial must agree across step sizes.

    When the step is too small both probes are roundoff-dominated and
    disagree wildly; at healthy steps they differ only by the truncation
    term, far below 100x the documented agreement tolerance.
    """
    h0, h1 = steps[0], steps[1]

    def mixed(scale):
        out = None
        for du, wu in zip(range(-2, 3), _D1_O4):
            if wu == 0.0:
                continue
            for dv, wv in zip(range(-2, 3), _D1_O4):
                if wv == 0.0:
                    continue
                shifted = pts.copy()
                shifted[..., 0] += du * scale * h0
                shifted[..., 1] += dv * scale * h1
                term = wu * wv * f(shifted)
                out = term if out is None else out + term
        return out / (scale * h0 * scale * h1)

    probe_a = mixed(1.0)
    probe_b = mixed(2.0)
    scale = 1.0 + float(np.max(np.abs(jets[2])))
    asym = float(np.max(np.abs(probe_a - probe_b)))
    if asym > 100 * 1e-8 * scale:
        raise FdInstabilityError(
            f"mixed-partial disagreement {asym:.3e} across stencil scales; "
            "finite-difference step too small"
        )


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)


def _pad(exprs, total):
    return exprs + [const_expr(0.0)] * (total - len(exprs))


def slice_sphere(n: int = 2, t0: float = 0.0) -> Immersion:
    """Totally geodesic 2-sphere inside a slice of the product."""
    n = int(n)
    if n < 2:
        raise ValueError("slice_sphere needs sphere dimension n >= 2")
    comps = [
        product_expr(1.0, sin_f(1.0), cos_f(1.0)),
        product_expr(1.0, sin_f(1.0), sin_f(1.0)),
        product_expr(1.0, cos_f(1.0), one_f()),
    ]
    comps = _pad(comps, n + 1) + [const_expr(float(t0))]
    domain = ParameterDomain(((0.0, math.pi), (0.0, 2 * math.pi)), (False, True))
    return Immersion(
        name="slice_sphere",
        sphere_dim=n,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=2,
        compact=True,
        properties=frozenset(
            {"minimal", "totally_geodesic", "slice", "stationary", "umbilical", "equality_case"}
        ),
        params={"n": n, "t0": float(t0)},
        default_resolution=(96, 192),
    )


def clifford_torus(t0: float = 0.0) -> Immersion:
    """Minimal torus in the 3-sphere slice: both circle radii 1/sqrt(2)."""
    comps = [
        product_expr(1.0 / SQ2, cos_f(1.0), one_f()),
        product_expr(1.0 / SQ2, sin_f(1.0), one_f()),
        product_expr(1.0 / SQ2, one_f(), cos_f(1.0)),
        product_expr(1.0 / SQ2, one_f(), sin_f(1.0)),
        const_expr(float(t0)),
    ]
    domain = ParameterDomain(((0.0, 2 * math.pi), (0.0, 2 * math.pi)), (True, True))
    return Immersion(
        name="clifford_torus",
        sphere_dim=3,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=0,
        compact=True,
        properties=frozenset({"minimal", "slice", "stationary", "equality_case"}),
        params={"t0": float(t0)},
        default_resolution=(128, 128),
    )


def veronese(t0: float = 0.0) -> Immersion:
    """Minimal surface in the 4-sphere slice, parametrized by its double cover.

    The chart composes the classical quadratic map with the radius-sqrt(3)
    round sphere, giving a closed immersion of the 2-sphere (chi = 2) that
    covers the underlying surface twice.  Written out in polar coordinates:

        x1 = (sqrt3/4)(1 - cos 2u) sin 2v      x2 = (sqrt3/2) sin 2u cos v
        x3 = (sqrt3/2) sin 2u sin v            x4 = (sqrt3/4)(1 - cos 2u) cos 2v
        x5 = -1/4 - (3/4) cos 2u

    The normalization constants are pinned by the unit-norm oracle in the
    test suite.
    """
    a = SQ3 / 4.0
    b = SQ3 / 2.0
    comps = [
        sum_expr(
            (a, one_f(), sin_f(2.0)),
            (-a, cos_f(2.0), sin_f(2.0)),
        ),
        product_expr(b, sin_f(2.0), cos_f(1.0)),
        product_expr(b, sin_f(2.0), sin_f(1.0)),
        sum_expr(
            (a, one_f(), cos_f(2.0)),
            (-a, cos_f(2.0), cos_f(2.0)),
        ),
        sum_expr(
            (-0.25, one_f(), one_f()),
            (-0.75, cos_f(2.0), one_f()),
        ),
        const_expr(float(t0)),
    ]
    domain = ParameterDomain(((0.0, math.pi), (0.0, 2 * math.pi)), (False, True))
    return Immersion(
        name="veronese",
        sphere_dim=4,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=2,
        compact=True,
        properties=frozenset({"minimal", "slice", "stationary", "equality_case"}),
        params={"t0": float(t0)},
        default_resolution=(96, 192),
    )


def small_sphere(rho: float, t0: float = 0.0) -> Immersion:
    """Geodesic sphere of radius rho in the 3-sphere slice (umbilical)."""
    rho = float(rho)
    if not 0.0 < rho < math.pi:
        raise ValueError("small_sphere radius must lie in (0, pi)")
    sr, cr = math.sin(rho), math.cos(rho)
    comps = [
        product_expr(sr, sin_f(1.0), cos_f(1.0)),
        product_expr(sr, sin_f(1.0), sin_f(1.0)),
        product_expr(sr, cos_f(1.0), one_f()),
        const_expr(cr),
        const_expr(float(t0)),
    ]
    domain = ParameterDomain(((0.0, math.pi), (0.0, 2 * math.pi)), (False, True))
    props = {"umbilical", "slice"}
    if abs(rho - math.pi / 2) < 1e-15:
        props |= {"minimal", "totally_geodesic", "stationary"}
    return Immersion(
        name="small_sphere",
        sphere_dim=3,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=2,
        compact=True,
        properties=frozenset(props),
        params={"rho": rho, "t0": float(t0)},
        default_resolution=(96, 192),
    )


def graph_torus(eps: float) -> Immersion:
    """Clifford sphere part with height eps*sin(u): compact, tilted in the line."""
    eps = float(eps)
    if eps < 0.0:
        raise ValueError("graph_torus amplitude must be nonnegative")
    comps = [
        product_expr(1.0 / SQ2, cos_f(1.0), one_f()),
        product_expr(1.0 / SQ2, sin_f(1.0), one_f()),
        product_expr(1.0 / SQ2, one_f(), cos_f(1.0)),
        product_expr(1.0 / SQ2, one_f(), sin_f(1.0)),
        product_expr(eps, sin_f(1.0), one_f()),
    ]
    domain = ParameterDomain(((0.0, 2 * math.pi), (0.0, 2 * math.pi)), (True, True))
    return Immersion(
        name="graph_torus",
        sphere_dim=3,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=0,
        compact=True,
        properties=frozenset(),
        params={"eps": eps},
        default_resolution=(128, 128),
    )


def cylinder_patch(r: float) -> Immersion:
    """Local patch of the vertical cylinder over a circle in the 2-sphere.

    Non-compact: integral operations must reject it; local identity checks
    only.
    """
    r = float(r)
    if not 0.0 < r < math.pi:
        raise ValueError("cylinder_patch circle radius must lie in (0, pi)")
    sr, cr = math.sin(r), math.cos(r)
    comps = [
        product_expr(sr, cos_f(1.0), one_f()),
        product_expr(sr, sin_f(1.0), one_f()),
        const_expr(cr),
        product_expr(1.0, one_f(), lin_f()),
    ]
    domain = ParameterDomain(((0.0, 2 * math.pi), (-1.0, 1.0)), (True, False))
    return Immersion(
        name="cylinder_patch",
        sphere_dim=2,
        param_dim=2,
        domain=domain,
        chart=SeparableChart(comps),
        chi=None,
        compact=False,
        properties=frozenset(),
        params={"r": r},
        default_resolution=(64, 16),
    )


CATALOG = {
    "slice_sphere": slice_sphere,
    "clifford_torus": clifford_torus,
    "veronese": veronese,
    "small_sphere": small_sphere,
    "graph_torus": graph_torus,
    "cylinder_patch": cylinder_patch,
}


def catalog(name: str, **params) -> Immersion:
    """Instantiate a catalog surface by name."""
    if name not in CATALOG:
        raise ValueError(f"unknown catalog surface {name!r}; choose from {sorted(CATALOG)}")
    return CATALOG[name](**params)


def catalog_entries() -> list[dict]:
    """Metadata listing for every catalog surface with default parameters."""
    defaults = {
        "slice_sphere": {},
        "clifford_torus": {},
        "veronese": {},
        "small_sphere": {"rho": math.pi / 4},
        "graph_torus": {"eps": 0.3},
        "cylinder_patch": {"r": math.pi / 3},
    }
    entries = []
    for name, params in defaults.items():
        imm = catalog(name, **params)
        entries.append(
            {
                "name": name,
                "params": imm.params,
                "sphere_dim": imm.sphere_dim,
                "chi": imm.chi,
                "compact": imm.compact,
                "properties": sorted(imm.properties),
            }
        )
    return entries
