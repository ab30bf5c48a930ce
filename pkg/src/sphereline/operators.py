"""Differential operators on scalar and normal fields over a quadrature grid.

Fields carry closed-form generators (ambient polynomials composed with the
immersion, or geometry-derived fields like the mean curvature vector), so
first covariant derivatives are exact.  One further derivative layer is
numerical: spectral differentiation along periodic axes and fourth-order
central stencils along Gauss-Legendre axes, both applied to the exact
first-derivative fields.

Sub-noise handling: a field (or spectral mode) whose magnitude sits below
1e-9 times the generating field's scale carries no information beyond the
closed-form layer's roundoff; it is flushed to zero rather than amplified
through inverse-metric factors near chart poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryStencilError, CompactnessRequiredError
from .geometry import SurfaceGeometry, surface_geometry, _project_normal
from .immersion import Immersion
from .quadrature import QuadratureGrid, integrate

NOISE_FLOOR = 1e-8
OUTER_STEP_FRACTION = 1e-3  # of the axis extent, for the stencil layer

_D1_OFFSETS = (-2, -1, 1, 2)
_D1_WEIGHTS = (1.0, -8.0, 8.0, -1.0)  # divide by 12 h


# ---------------------------------------------------------------------------
# Field generators
# ---------------------------------------------------------------------------


class AmbientPolyVector:
    """Quadratic polynomial in ambient coordinates, evaluated along the surface.

    Composing with the immersion makes the field smooth on the closed
    surface regardless of chart degeneracies, and the chain rule with exact
    jets gives exact parameter derivatives.
    """

    def __init__(self, const, lin, quad):
        self.const = np.asarray(const, dtype=float)  # (c,)
        self.lin = np.asarray(lin, dtype=float)  # (c, d)
        quad = np.asarray(quad, dtype=float)  # (c, d, d)
        self.quad = 0.5 * (quad + np.swapaxes(quad, 1, 2))

    @classmethod
    def random(cls, rng: np.random.Generator, out_dim: int, ambient_dim: int, amplitude=0.5):
        shape = (out_dim, ambient_dim)
        return cls(
            amplitude * rng.uniform(-1, 1, out_dim),
            amplitude * rng.uniform(-1, 1, shape),
            amplitude * rng.uniform(-1, 1, shape + (ambient_dim,)),
        )

    def ambient_values(self, jets) -> np.ndarray:
        x = jets[0]
        out = self.const[None, :] + np.einsum("cd,nd->nc", self.lin, x, optimize=True)
        out += np.einsum("cde,nd,ne->nc", self.quad, x, x, optimize=True)
        return out

    def gradient_matrix(self, jets) -> np.ndarray:
        """d w_c / d x_e at the surface points, shape (N, c, e)."""
        x = jets[0]
        return self.lin[None] + 2.0 * np.einsum("cde,nd->nce", self.quad, x, optimize=True)

    def ambient_d1(self, jets) -> np.ndarray:
        """Parameter derivatives, shape (N, m, c)."""
        g = self.gradient_matrix(jets)
        return np.einsum("nce,nme->nmc", g, jets[1], optimize=True)

    def ambient_d2(self, jets) -> np.ndarray:
        """Second parameter derivatives, shape (N, m, m, c)."""
        g = self.gradient_matrix(jets)
        out = np.einsum("nce,nime->nimc", g, jets[2], optimize=True)
        out += 2.0 * np.einsum("cde,nid,nme->nimc", self.quad, jets[1], jets[1], optimize=True)
        return out


class ConstantVector:
    """A constant ambient vector field (for instance the parallel line field)."""

    def __init__(self, vec):
        self.vec = np.asarray(vec, dtype=float)

    def ambient_values(self, jets) -> np.ndarray:
        n = jets[0].shape[0]
        return np.broadcast_to(self.vec, (n, self.vec.shape[0])).copy()

    def ambient_d1(self, jets) -> np.ndarray:
        n, m = jets[1].shape[:2]
        return np.zeros((n, m, self.vec.shape[0]))

    def ambient_d2(self, jets) -> np.ndarray:
        n, m = jets[1].shape[:2]
        return np.zeros((n, m, m, self.vec.shape[0]))


class ProjectedGenerator:
    """Normal field xi = Pi_N(w) for a closed-form ambient field w."""

    def __init__(self, raw):
        self.raw = raw

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        return geo.project_normal(self.raw.ambient_values(geo.jets))

    def first_covariant(self, geo: SurfaceGeometry) -> np.ndarray:
        """nabla^perp_j xi in ambient coordinates, shape (N, m, d)."""
        w = self.raw.ambient_values(geo.jets)
        dw = self.raw.ambient_d1(geo.jets)
        dproj = geo.dprojector_normal()
        eta = np.einsum("nkde,ne->nkd", dproj, w, optimize=True)
        eta += dw
        return _project_normal(eta, geo.tangent_frame, geo.nu)


class MeanCurvatureGenerator:
    """The mean curvature vector as a normal field (optionally scaled).

    ``zero`` marks a field whose grid values sit below the numerical noise
    floor of the curvature scale; its derivatives are then exactly zero,
    which is the only sound estimate (differentiating the residue would
    amplify pure roundoff through inverse-metric factors near chart poles).
    The flag is frozen at construction so stencil evaluations stay
    consistent with the grid decision.
    """

    def __init__(self, factor: float = 1.0, zero: bool = False):
        self.factor = factor
        self.zero = zero

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        if self.zero:
            return np.zeros_like(geo.h)
        return self.factor * geo.h

    def first_covariant(self, geo: SurfaceGeometry) -> np.ndarray:
        if self.zero:
            n, m = geo.jets[1].shape[:2]
            return np.zeros((n, m, geo.h.shape[-1]))
        if geo.nabla_h_coord is None:
            raise ValueError("mean-curvature field derivatives need order-3 geometry")
        return self.factor * geo.nabla_h_coord


class NormalPartGenerator:
    """The normal part of the parallel line field (optionally scaled)."""

    def __init__(self, factor: float = 1.0):
        self.factor = factor

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        return self.factor * geo.N

    def first_covariant(self, geo: SurfaceGeometry) -> np.ndarray:
        return -self.factor * _project_normal(geo.dT_coord, geo.tangent_frame, geo.nu)


class AmbientPolyScalar:
    """Quadratic scalar polynomial in ambient coordinates along the surface."""

    def __init__(self, const, lin, quad):
        quad = np.asarray(quad, dtype=float)
        if quad.ndim == 2:
            quad = quad[None]
        self.vec = AmbientPolyVector(np.atleast_1d(const), np.atleast_2d(lin), quad)

    @classmethod
    def random(cls, rng: np.random.Generator, ambient_dim: int, amplitude=0.5):
        return cls(
            amplitude * rng.uniform(-1, 1),
            amplitude * rng.uniform(-1, 1, ambient_dim),
            amplitude * rng.uniform(-1, 1, (ambient_dim, ambient_dim)),
        )

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        return self.vec.ambient_values(geo.jets)[:, 0]

    def gradient(self, geo: SurfaceGeometry) -> np.ndarray:
        """Parameter derivatives d_j f, shape (N, m)."""
        return self.vec.ambient_d1(geo.jets)[..., 0]


class MeanCurvatureSquared:
    """The scalar H^2 with its exact parameter gradient.

    ``constant`` marks a grid-constant field (range below the noise floor);
    its gradient is then exactly zero, frozen at construction.
    """

    def __init__(self, constant: bool = False):
        self.constant = constant

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        return geo.H**2

    def gradient(self, geo: SurfaceGeometry) -> np.ndarray:
        if self.constant:
            return np.zeros(geo.jets[1].shape[:2])
        return 2.0 * np.einsum("nkd,nd->nk", geo.nabla_h_coord, geo.h, optimize=True)


class SigmaSquared:
    """The scalar |sigma|^2 with its exact parameter gradient.

    Same grid-constant convention as MeanCurvatureSquared.
    """

    def __init__(self, constant: bool = False):
        self.constant = constant

    def values(self, geo: SurfaceGeometry) -> np.ndarray:
        return geo.sigma_sq

    def gradient(self, geo: SurfaceGeometry) -> np.ndarray:
        if self.constant:
            return np.zeros(geo.jets[1].shape[:2])
        ginv = geo.metric_inv
        dginv = -np.einsum(
            "nia,nkab,nbj->nkij", ginv, geo.dmetric, ginv, optimize=True
        )
        s = geo.sigma_coord
        ds = geo.dsigma
        pair = np.einsum("nijd,nkld->nijkl", s, s, optimize=True)
        out = 2.0 * np.einsum("npik,njl,nijkl->np", dginv, ginv, pair, optimize=True)
        out += 2.0 * np.einsum(
            "nik,njl,npijd,nkld->np", ginv, ginv, ds, s, optimize=True
        )
        return out


def grid_constant(values: np.ndarray, rel: float = 1e-10) -> bool:
    """True when a per-node scalar is constant at numerical precision."""
    values = np.asarray(values)
    return float(np.ptp(values)) <= rel * (1.0 + float(np.abs(values).max()))


# ---------------------------------------------------------------------------
# Field containers
# ---------------------------------------------------------------------------


@dataclass
class NormalField:
    """Section of the normal bundle sampled on a grid, in ambient coordinates."""

    grid: QuadratureGrid
    values: np.ndarray  # (N, d)
    generator: object | None = None

    def check_normal(self, geo: SurfaceGeometry, tol: float = 1e-9) -> float:
        tang = np.einsum("nad,nd->na", geo.tangent_frame, self.values, optimize=True)
        con = np.sum(self.values * geo.nu, axis=-1)
        return float(max(np.abs(tang).max(), np.abs(con).max()))


@dataclass
class ScalarField:
    grid: QuadratureGrid
    values: np.ndarray  # (N,)
    generator: object | None = None


# ---------------------------------------------------------------------------
# Workspace: cached geometry at grid nodes and stencil offsets
# ---------------------------------------------------------------------------


@dataclass
class OperatorWorkspace:
    imm: Immersion
    grid: QuadratureGrid
    geo: SurfaceGeometry
    stencil_geos: dict  # axis -> list of (weight/h, SurfaceGeometry at offset)


_WORKSPACE_CACHE: dict = {}


def get_workspace(imm: Immersion, grid: QuadratureGrid) -> OperatorWorkspace:
    key = (id(imm), id(grid))
    ws = _WORKSPACE_CACHE.get(key)
    if ws is not None and ws.imm is imm and ws.grid is grid:
        return ws
    geo = surface_geometry(imm, grid.nodes, order=3)
    stencil_geos = {}
    for axis, periodic in enumerate(grid.domain.periodic):
        if periodic:
            continue
        lo, hi = grid.domain.intervals[axis]
        h = OUTER_STEP_FRACTION * (hi - lo)
        entries = []
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            pts = grid.nodes.copy()
            pts[:, axis] += off * h
            entries.append((w / (12.0 * h), surface_geometry(imm, pts, order=3)))
        stencil_geos[axis] = entries
    ws = OperatorWorkspace(imm=imm, grid=grid, geo=geo, stencil_geos=stencil_geos)
    _WORKSPACE_CACHE[key] = ws
    return ws


def _fft_derivative(grid: QuadratureGrid, samples: np.ndarray, axis: int,
                    floor: float) -> np.ndarray:
    """Spectral derivative along a periodic grid axis with a mode noise floor.

    Modes whose coefficient amplitude sits below ``floor`` are zeroed: they
    are indistinguishable from roundoff of the closed-form layer, and keeping
    them would let the k-multiplication amplify pure noise.
    """
    res = grid.resolution
    tail = samples.shape[1:]
    arr = samples.reshape(res + tail)
    n = res[axis]
    lo, hi = grid.domain.intervals[axis]
    period = hi - lo
    spec = np.fft.rfft(arr, axis=axis)
    amp = 2.0 * np.abs(spec) / n
    spec = np.where(amp < floor, 0.0, spec)
    k = np.fft.rfftfreq(n, d=period / (2.0 * math.pi * n))
    shape = [1] * spec.ndim
    shape[axis] = spec.shape[axis]
    dspec = spec * (1j * k.reshape(shape))
    if n % 2 == 0:
        # Nyquist mode of the derivative is not representable; drop it.
        idx = [slice(None)] * spec.ndim
        idx[axis] = -1
        dspec[tuple(idx)] = 0.0
    out = np.fft.irfft(dspec, n=n, axis=axis)
    return out.reshape((-1,) + tail)


def field_coordinate_derivatives(ws: OperatorWorkspace, sampler, scale: float) -> np.ndarray:
    """d_i of a per-node bundle over every axis, shape (N, m, ...).

    ``sampler(geo)`` evaluates the closed-form bundle on an arbitrary point
    batch.  Periodic axes differentiate spectrally; Gauss-Legendre axes use
    the fourth-order stencil over off-grid evaluations.
    """
    center = np.asarray(sampler(ws.geo))
    floor = NOISE_FLOOR * scale
    n = center.shape[0]
    m = ws.grid.domain.dim
    out = np.zeros((n, m) + center.shape[1:])
    if float(np.max(np.abs(center))) <= floor:
        return out
    for axis, periodic in enumerate(ws.grid.domain.periodic):
        if periodic:
            out[:, axis] = _fft_derivative(ws.grid, center, axis, floor)
        else:
            acc = None
            for coef, geo_off in ws.stencil_geos[axis]:
                term = coef * np.asarray(sampler(geo_off))
                acc = term if acc is None else acc + term
            out[:, axis] = acc
    return out


# ---------------------------------------------------------------------------
# Covariant second derivatives
# ---------------------------------------------------------------------------


def second_covariant_normal(ws: OperatorWorkspace, xi: NormalField, scale=None):
    """(nabla^2 xi)_ij (ambient-valued) and the rough Laplacian, at grid nodes.

    nabla^2 xi(d_i, d_j) = Pi_N d_i (nabla^perp_j xi) - Gamma^k_ij nabla^perp_k xi
    """
    if xi.generator is None:
        raise BoundaryStencilError(
            "second derivatives need a closed-form generator; sample-only fields "
            "cannot be evaluated off the grid"
        )
    geo = ws.geo
    if scale is None:
        scale = 1.0 + float(np.max(np.linalg.norm(xi.values, axis=-1)))
    eta = xi.generator.first_covariant(geo)  # (N, m, d)
    floor = NOISE_FLOOR * scale
    if float(np.max(np.abs(eta))) <= floor:
        eta = np.zeros_like(eta)
        deta = np.zeros(eta.shape[:1] + (eta.shape[1],) + eta.shape[1:])
    else:
        deta = field_coordinate_derivatives(
            ws, lambda g: xi.generator.first_covariant(g), scale
        )  # (N, i, j, d)
    hess = _project_normal(deta, geo.tangent_frame, geo.nu)
    hess -= np.einsum("nkij,nkd->nijd", np.einsum("nkij->nkij", geo.christoffel), eta, optimize=True)
    lap = np.einsum("nij,nijd->nd", geo.metric_inv, hess, optimize=True)
    lap = _project_normal(lap, geo.tangent_frame, geo.nu)
    return hess, lap, eta


def scalar_hessian(ws: OperatorWorkspace, f: ScalarField, scale=None):
    """Coordinate Hessian, frame Hessian, Laplace-Beltrami, gradient of f."""
    if f.generator is None:
        raise BoundaryStencilError(
            "second derivatives need a closed-form generator; sample-only fields "
            "cannot be evaluated off the grid"
        )
    geo = ws.geo
    if scale is None:
        scale = 1.0 + float(np.max(np.abs(f.values)))
    grad = f.generator.gradient(geo)  # (N, m)
    floor = NOISE_FLOOR * scale
    if float(np.max(np.abs(grad))) <= floor:
        grad = np.zeros_like(grad)
        dgrad = np.zeros(grad.shape[:1] + (grad.shape[1], grad.shape[1]))
    else:
        dgrad = field_coordinate_derivatives(ws, lambda g: f.generator.gradient(g), scale)
    hess_coord = dgrad - np.einsum("nkij,nk->nij", geo.christoffel, grad, optimize=True)
    hess_coord = 0.5 * (hess_coord + np.swapaxes(hess_coord, 1, 2))
    c = geo.coord_to_frame
    hess_frame = np.einsum("nai,nbj,nij->nab", c, c, hess_coord, optimize=True)
    lap = np.einsum("nij,nij->n", geo.metric_inv, hess_coord, optimize=True)
    return hess_coord, hess_frame, lap, grad


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def normal_derivative(imm: Immersion, p, xi: NormalField, x_vec) -> np.ndarray:
    """nabla^perp of the field along a tangent vector at one parameter point."""
    p = np.asarray(p, dtype=float)
    if xi.generator is None:
        raise BoundaryStencilError("sample-only fields support no off-grid stencils")
    geo = surface_geometry(imm, p[None, :], order=3)
    eta = xi.generator.first_covariant(geo)[0]  # (m, d)
    x_vec = np.asarray(x_vec, dtype=float)
    j1 = geo.jets[1][0]
    coeff = geo.metric_inv[0] @ (j1 @ x_vec)
    return np.einsum("k,kd->d", coeff, eta)


def rough_laplacian(imm: Immersion, grid: QuadratureGrid, xi: NormalField) -> NormalField:
    """Trace of the second normal-connection derivative of the field."""
    ws = get_workspace(imm, grid)
    _, lap, _ = second_covariant_normal(ws, xi)
    return NormalField(grid=grid, values=lap, generator=None)


def hessian_and_laplacian(imm: Immersion, grid: QuadratureGrid, f: ScalarField):
    """Per-node tangent-frame Hessian and Laplace-Beltrami values."""
    ws = get_workspace(imm, grid)
    _, hess_frame, lap, _ = scalar_hessian(ws, f)
    return hess_frame, lap


def p_tensor(pg) -> tuple[np.ndarray, np.ndarray]:
    """The curvature-adjusted bilinear form and its per-direction matrices.

    P(X, Y) = m <X, Y> h - sigma(X, Y); P_alpha = m H^alpha I - A_alpha.
    """
    sigma = np.asarray(pg.sigma_frame)
    h = np.asarray(pg.h)
    wein = np.asarray(pg.weingarten)
    H_alpha = np.asarray(pg.H_alpha)
    m = sigma.shape[0]
    eye = np.eye(m)
    p_ambient = m * eye[:, :, None] * h[None, None, :] - sigma
    p_alpha = m * H_alpha[:, None, None] * eye[None, :, :] - wein
    return p_ambient, p_alpha


def _p_frame(geo: SurfaceGeometry) -> np.ndarray:
    m = geo.sigma_frame.shape[1]
    eye = np.eye(m)
    return m * eye[None, :, :, None] * geo.h[:, None, None, :] - geo.sigma_frame


def box_star(imm: Immersion, grid: QuadratureGrid, xi: NormalField) -> ScalarField:
    """<P, nabla^2 xi>, evaluated through the trace form.

    At m = 2 this is 2 <h, rough_laplacian xi> minus the sigma-contracted
    Hessian; box_star_direct pairs the same second-derivative tensor against
    P by Hilbert-Schmidt contraction, giving the cross-check route.
    """
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    hess, lap, _ = second_covariant_normal(ws, xi)
    c = geo.coord_to_frame
    hess_frame = np.einsum("nai,nbj,nijd->nabd", c, c, hess, optimize=True)
    hess_frame = 0.5 * (hess_frame + np.swapaxes(hess_frame, 1, 2))
    sig_pair = np.einsum("nabd,nabd->n", geo.sigma_frame, hess_frame, optimize=True)
    vals = m * np.sum(geo.h * lap, axis=-1) - sig_pair
    return ScalarField(grid=grid, values=vals, generator=None)


def box_star_direct(imm: Immersion, grid: QuadratureGrid, xi: NormalField) -> ScalarField:
    """Hilbert-Schmidt pairing of P with the second covariant derivative."""
    ws = get_workspace(imm, grid)
    geo = ws.geo
    hess, _, _ = second_covariant_normal(ws, xi)
    c = geo.coord_to_frame
    hess_frame = np.einsum("nai,nbj,nijd->nabd", c, c, hess, optimize=True)
    hess_frame = 0.5 * (hess_frame + np.swapaxes(hess_frame, 1, 2))
    vals = np.einsum("nabd,nabd->n", _p_frame(geo), hess_frame, optimize=True)
    return ScalarField(grid=grid, values=vals, generator=None)


def box_operator(imm: Immersion, grid: QuadratureGrid, f: ScalarField) -> NormalField:
    """The normal-valued second-order operator on scalars.

    box(f) = sum_alpha tr(P_alpha Hess f) e_alpha
           = m (Lap f) h - sum_ab (Hess f)_ab sigma_ab,
    the second form being frame-free.
    """
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    _, hess_frame, lap, _ = scalar_hessian(ws, f)
    vals = m * lap[:, None] * geo.h
    vals -= np.einsum("nab,nabd->nd", hess_frame, geo.sigma_frame, optimize=True)
    return NormalField(grid=grid, values=vals, generator=None)


def _require_compact(imm: Immersion):
    if not imm.compact:
        raise CompactnessRequiredError(
            f"{imm.name} is not compact; integral identities need a closed surface"
        )


def lemma1_residual(imm: Immersion, grid: QuadratureGrid, f: ScalarField,
                    xi: NormalField) -> float:
    """Normalized defect of the integral identity pairing the two operators.

    int f box*(xi) = int <box(f), xi>
                     + (m-1) int (f <nabla^perp_T xi, N> - <N, xi> <grad f, T>)
    """
    _require_compact(imm)
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    dens = geo.sqrt_det_g

    lhs = integrate(grid, f.values * box_star(imm, grid, xi).values, dens)

    box_f = box_operator(imm, grid, f).values
    term1 = integrate(grid, np.sum(box_f * xi.values, axis=-1), dens)

    eta = xi.generator.first_covariant(geo)
    t_coeff = np.einsum("nkj,nj->nk", geo.metric_inv, geo.jets[1][..., -1], optimize=True)
    nabla_T_xi = np.einsum("nk,nkd->nd", t_coeff, eta, optimize=True)
    grad_f = f.generator.gradient(geo)
    grad_f_T = np.einsum("nk,nk->n", t_coeff, grad_f, optimize=True)
    n_dot_xi = np.sum(geo.N * xi.values, axis=-1)
    term2 = integrate(
        grid,
        f.values * np.sum(nabla_T_xi * geo.N, axis=-1) - n_dot_xi * grad_f_T,
        dens,
    )
    rhs = term1 + (m - 1) * term2
    return abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


def cor1_residual(imm: Immersion, grid: QuadratureGrid, xi: NormalField) -> float:
    """Normalized defect of the f == 1 specialization of the identity."""
    _require_compact(imm)
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    dens = geo.sqrt_det_g
    lhs = integrate(grid, box_star(imm, grid, xi).values, dens)
    eta = xi.generator.first_covariant(geo)
    t_coeff = np.einsum("nkj,nj->nk", geo.metric_inv, geo.jets[1][..., -1], optimize=True)
    nabla_T_xi = np.einsum("nk,nkd->nd", t_coeff, eta, optimize=True)
    rhs = (m - 1) * integrate(grid, np.sum(nabla_T_xi * geo.N, axis=-1), dens)
    return abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


# ---------------------------------------------------------------------------
# Seeded random smooth test fields
# ---------------------------------------------------------------------------


def random_normal_field(imm: Immersion, grid: QuadratureGrid,
                        rng: np.random.Generator) -> NormalField:
    """Low-order ambient polynomial projected to the normal bundle."""
    ws = get_workspace(imm, grid)
    raw = AmbientPolyVector.random(rng, imm.ambient_dim, imm.ambient_dim)
    gen = ProjectedGenerator(raw)
    return NormalField(grid=grid, values=gen.values(ws.geo), generator=gen)


def random_scalar_field(imm: Immersion, grid: QuadratureGrid,
                        rng: np.random.Generator) -> ScalarField:
    gen = AmbientPolyScalar.random(rng, imm.ambient_dim)
    ws = get_workspace(imm, grid)
    return ScalarField(grid=grid, values=gen.values(ws.geo), generator=gen)


def mean_curvature_field(imm: Immersion, grid: QuadratureGrid, factor=1.0) -> NormalField:
    ws = get_workspace(imm, grid)
    h_max = float(ws.geo.H.max())
    sigma_scale = 1.0 + math.sqrt(float(ws.geo.sigma_sq.max()))
    gen = MeanCurvatureGenerator(factor, zero=h_max <= 1e-8 * sigma_scale)
    return NormalField(grid=grid, values=gen.values(ws.geo), generator=gen)


def normal_part_field(imm: Immersion, grid: QuadratureGrid, factor=1.0) -> NormalField:
    ws = get_workspace(imm, grid)
    gen = NormalPartGenerator(factor)
    return NormalField(grid=grid, values=gen.values(ws.geo), generator=gen)
