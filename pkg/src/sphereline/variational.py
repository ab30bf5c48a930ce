"""Total mean curvature functional: stationarity, variations, and identities.

The first-variation oracle deforms the immersion by renormalizing the sphere
part, which satisfies the ambient constraint exactly and has velocity equal
to the tangential-to-product projection of the raw variation field.  The
functional derivative is then checked against the quadrature pairing of the
stationarity field with the variation's normal part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CompactnessRequiredError, FdInstabilityError
from .geometry import SurfaceGeometry, surface_geometry, _project_normal
from .immersion import Immersion
from .operators import (
    AmbientPolyVector,
    MeanCurvatureSquared,
    ScalarField,
    SigmaSquared,
    get_workspace,
    grid_constant,
    mean_curvature_field,
    scalar_hessian,
    second_covariant_normal,
)
from .quadrature import QuadratureGrid, integrate

FD_DELTA_RANGE = (1e-4, 1e-2)


def _require_compact(imm: Immersion):
    if not imm.compact:
        raise CompactnessRequiredError(
            f"{imm.name} is not compact; the functional needs a closed surface"
        )


def total_mean_curvature(imm: Immersion, grid: QuadratureGrid,
                         geo: SurfaceGeometry | None = None) -> float:
    """The functional: integral of H^m over the surface."""
    _require_compact(imm)
    if geo is None:
        geo = surface_geometry(imm, grid.nodes, order=2)
    return integrate(grid, geo.H**imm.param_dim, geo.sqrt_det_g)


# ---------------------------------------------------------------------------
# Stationarity field (Euler-Lagrange residual)
# ---------------------------------------------------------------------------


def el_residual(imm: Immersion, grid: QuadratureGrid) -> tuple[np.ndarray, float]:
    """The normal field whose vanishing characterizes stationary surfaces.

    For surfaces (m = 2):
        E = Lap_perp h + (2 - |T|^2 - 2 H^2) h - 2 <N,h> N
            + sum_ab <sigma_ab, h> sigma_ab,
    the last term being the frame-free form of the Weingarten trace sum.
    For m > 2 the whole expression is multiplied by H^(m-2), as the
    functional's variation demands.
    """
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    h_field = mean_curvature_field(imm, grid)
    _, lap_h, _ = second_covariant_normal(ws, h_field)
    coeff = m - geo.T_sq - m * geo.H**2
    e = lap_h + coeff[:, None] * geo.h
    e -= m * geo.N_dot_h[:, None] * geo.N
    sig_h = np.einsum("nabd,nd->nab", geo.sigma_frame, geo.h, optimize=True)
    e += np.einsum("nab,nabd->nd", sig_h, geo.sigma_frame, optimize=True)
    if m > 2:
        e = (geo.H ** (m - 2))[:, None] * e
    norms = np.linalg.norm(e, axis=-1)
    return e, float(norms.max())


def certify_stationary(imm: Immersion, grid: QuadratureGrid) -> tuple[bool, float, float]:
    """Stationarity certificate: max |E| against 1e-6 (1 + max |sigma|^2)."""
    ws = get_workspace(imm, grid)
    _, max_e = el_residual(imm, grid)
    threshold = 1e-6 * (1.0 + float(ws.geo.sigma_sq.max()))
    return max_e <= threshold, max_e, threshold


# ---------------------------------------------------------------------------
# Variations
# ---------------------------------------------------------------------------


class _DeformedEvaluator:
    """Jets of the renormalized deformation at a fixed amplitude.

    Sphere part (p + s w_s) / |p + s w_s|, line part translated; produces
    order <= 2 jets from the base chart's exact jets and the variation
    generator's chain-rule derivatives.
    """

    def __init__(self, base: Immersion, raw: AmbientPolyVector, s: float):
        self.base = base
        self.raw = raw
        self.s = s

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.jet(points, 0)[0]

    def jet(self, points: np.ndarray, order: int) -> dict[int, np.ndarray]:
        if order > 2:
            raise ValueError("deformed immersions provide jets up to order 2")
        base_jets = self.base.jet_batch(points, 2 if order >= 1 else 1)
        s = self.s
        w0 = self.raw.ambient_values(base_jets)
        S = base_jets[0][..., :-1] + s * w0[..., :-1]
        t = base_jets[0][..., -1] + s * w0[..., -1]
        r = np.linalg.norm(S, axis=-1)
        out0 = np.concatenate([S / r[..., None], t[..., None]], axis=-1)
        jets = {0: out0}
        if order == 0:
            return jets

        w1 = self.raw.ambient_d1(base_jets)
        S1 = base_jets[1][..., :-1] + s * w1[..., :-1]
        t1 = base_jets[1][..., -1] + s * w1[..., -1]
        # r_i = <S, S_i> / r
        r1 = np.einsum("ne,nie->ni", S, S1) / r[:, None]
        y1 = S1 / r[:, None, None] - S[:, None, :] * (r1 / r[:, None] ** 2)[:, :, None]
        jets[1] = np.concatenate([y1, t1[..., None]], axis=-1)
        if order == 1:
            return jets

        w2 = self.raw.ambient_d2(base_jets)
        S2 = base_jets[2][..., :-1] + s * w2[..., :-1]
        t2 = base_jets[2][..., -1] + s * w2[..., -1]
        r2 = (
            np.einsum("nie,nje->nij", S1, S1)
            + np.einsum("ne,nije->nij", S, S2)
            - r1[:, :, None] * r1[:, None, :]
        ) / r[:, None, None]
        y2 = S2 / r[:, None, None, None]
        y2 -= S1[:, :, None, :] * (r1 / r[:, None] ** 2)[:, None, :, None]
        y2 -= S1[:, None, :, :] * (r1 / r[:, None] ** 2)[:, :, None, None]
        y2 -= S[:, None, None, :] * (r2 / r[:, None, None] ** 2)[..., None]
        y2 += 2.0 * S[:, None, None, :] * (
            r1[:, :, None] * r1[:, None, :] / r[:, None, None] ** 3
        )[..., None]
        jets[2] = np.concatenate([y2, t2[..., None]], axis=-1)
        return jets


@dataclass
class VariationField:
    """A compactly-generated variation: raw field, velocity, and deformations."""

    imm: Immersion
    grid: QuadratureGrid
    raw: AmbientPolyVector
    velocity: np.ndarray  # (N, d): d/ds of the deformation at s = 0

    def deformed(self, s: float) -> Immersion:
        ev = _DeformedEvaluator(self.imm, self.raw, s)
        return Immersion(
            name=f"{self.imm.name}+variation",
            sphere_dim=self.imm.sphere_dim,
            param_dim=self.imm.param_dim,
            domain=self.imm.domain,
            chart=None,
            chi=self.imm.chi,
            compact=self.imm.compact,
            properties=frozenset(),
            params=dict(self.imm.params),
            default_resolution=self.imm.default_resolution,
            evaluator=ev,
        )


def make_variation(imm: Immersion, grid: QuadratureGrid,
                   raw: AmbientPolyVector) -> VariationField:
    """Package a raw ambient field as a variation with its true velocity."""
    jets = imm.jet_batch(grid.nodes, 1)
    w = raw.ambient_values(jets)
    x = jets[0]
    sphere_dot = np.sum(w[..., :-1] * x[..., :-1], axis=-1)
    velocity = w.copy()
    velocity[..., :-1] -= sphere_dot[:, None] * x[..., :-1]
    return VariationField(imm=imm, grid=grid, raw=raw, velocity=velocity)


def random_variation(imm: Immersion, grid: QuadratureGrid,
                     rng: np.random.Generator) -> VariationField:
    raw = AmbientPolyVector.random(rng, imm.ambient_dim, imm.ambient_dim)
    return make_variation(imm, grid, raw)


def first_variation_check(imm: Immersion, grid: QuadratureGrid,
                          variation: VariationField, delta: float = 1e-3):
    """Four-point difference of the functional against the analytic pairing.

    Returns (fd, analytic, normalized residual).
    """
    _require_compact(imm)
    if imm.param_dim != 2:
        raise ValueError("the variation oracle is wired for surfaces (m = 2)")
    lo, hi = FD_DELTA_RANGE
    if not lo <= delta <= hi:
        raise ValueError(f"variation step {delta} outside [{lo}, {hi}]")

    def functional(s: float) -> float:
        geo_s = surface_geometry(variation.deformed(s), grid.nodes, order=2)
        return integrate(grid, geo_s.H**2, geo_s.sqrt_det_g)

    fd = (
        -functional(2 * delta)
        + 8.0 * functional(delta)
        - 8.0 * functional(-delta)
        + functional(-2 * delta)
    ) / (12.0 * delta)

    ws = get_workspace(imm, grid)
    geo = ws.geo
    e_field, _ = el_residual(imm, grid)
    v_perp = geo.project_normal(variation.velocity)
    analytic = integrate(grid, np.sum(e_field * v_perp, axis=-1), geo.sqrt_det_g)
    residual = abs(fd - analytic) / (1.0 + abs(fd) + abs(analytic))
    return fd, analytic, residual


# ---------------------------------------------------------------------------
# Curvature identities
# ---------------------------------------------------------------------------


def simons_residual(imm: Immersion, grid: QuadratureGrid) -> tuple[np.ndarray, float]:
    """Pointwise defect of the Laplacian identity for |sigma|^2.

    1/2 Lap |sigma|^2 = |nabla_perp sigma|^2 + m sum tr(A o Hess H^alpha)
        + m |phi_N|^2 - 2m sum_alpha |phi_alpha(T)|^2 + (m - |T|^2)|phi|^2
        - m <phi_h(T), T> + sum tr(A_beta) tr(A_alpha^2 A_beta)
        - sum (N(A_alpha A_beta - A_beta A_alpha) + [tr(A_alpha A_beta)]^2).
    """
    if not imm.has_closed_form_jets():
        raise FdInstabilityError(
            "the identity needs fourth-order information; finite-difference "
            "jets at that depth are unstable in 64-bit arithmetic"
        )
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim

    gen = SigmaSquared(constant=grid_constant(geo.sigma_sq))
    sigma_sq_field = ScalarField(grid, geo.sigma_sq, gen)
    _, _, lap_sigma_sq, _ = scalar_hessian(ws, sigma_sq_field)
    lhs = 0.5 * lap_sigma_sq

    h_field = mean_curvature_field(imm, grid)
    hess_h, _, _ = second_covariant_normal(ws, h_field)
    c = geo.coord_to_frame
    hess_h_frame = np.einsum("nai,nbj,nijd->nabd", c, c, hess_h, optimize=True)
    hess_h_frame = 0.5 * (hess_h_frame + np.swapaxes(hess_h_frame, 1, 2))
    tr_a_hess = np.einsum("nabd,nabd->n", geo.sigma_frame, hess_h_frame, optimize=True)

    a_n = np.einsum("nabd,nd->nab", geo.sigma_frame, geo.N, optimize=True)
    eye = np.eye(m)
    phi_n = a_n - geo.N_dot_h[:, None, None] * eye[None]
    phi_n_sq = np.einsum("nab,nab->n", phi_n, phi_n, optimize=True)

    phi_t = np.einsum("nb,nbad->nad", geo.T_frame, geo.phi_frame, optimize=True)
    phi_t_sq = np.einsum("nad,nad->n", phi_t, phi_t, optimize=True)

    sigma_tt = np.einsum("na,nb,nabd->nd", geo.T_frame, geo.T_frame, geo.sigma_frame, optimize=True)
    phi_h_tt = np.sum(sigma_tt * geo.h, axis=-1) - geo.H**2 * geo.T_sq

    wein = geo.weingarten
    a_sq = np.einsum("npab,npbc->nac", wein, wein, optimize=True)
    a_h = geo.A_h
    term_cubic = m * np.einsum("nab,nab->n", a_sq, a_h, optimize=True)

    ab = np.einsum("npac,nqcb->npqab", wein, wein, optimize=True)
    comm = ab - np.einsum("npqab->nqpab", ab)
    comm_sq = np.einsum("npqab,npqab->n", comm, comm, optimize=True)
    tr_ab = np.einsum("npqaa->npq", ab)
    tr_ab_sq = np.einsum("npq,npq->n", tr_ab, tr_ab, optimize=True)

    rhs = (
        geo.nabla_sigma_sq
        + m * tr_a_hess
        + m * phi_n_sq
        - 2 * m * phi_t_sq
        + (m - geo.T_sq) * geo.phi_sq
        - m * phi_h_tt
        + term_cubic
        - (comm_sq + tr_ab_sq)
    )
    res = lhs - rhs
    return res, float(np.abs(res).max())


def huisken_check(imm: Immersion, grid: QuadratureGrid) -> tuple[np.ndarray, float]:
    """Pointwise slack of the derivative-norm inequality.

    slack = |nabla_perp sigma|^2
            - m/(m+2) (3m |nabla_perp h|^2 + 4(m-1) <nabla_perp_T h, N>),
    nonnegative for every submanifold.
    """
    ws = get_workspace(imm, grid)
    geo = ws.geo
    m = imm.param_dim
    eta = geo.nabla_h_coord
    grad_h_sq = np.einsum("nij,nid,njd->n", geo.metric_inv, eta, eta, optimize=True)
    t_coeff = np.einsum("nkj,nj->nk", geo.metric_inv, geo.jets[1][..., -1], optimize=True)
    nabla_T_h = np.einsum("nk,nkd->nd", t_coeff, eta, optimize=True)
    pairing = np.sum(nabla_T_h * geo.N, axis=-1)
    slack = geo.nabla_sigma_sq - (m / (m + 2)) * (
        3 * m * grad_h_sq + 4 * (m - 1) * pairing
    )
    return slack, float(slack.min())


def eq57_residual(imm: Immersion, grid: QuadratureGrid) -> float:
    """Pointwise defect of 1/2 Lap H^2 = <Lap_perp h, h> + |nabla_perp h|^2."""
    ws = get_workspace(imm, grid)
    geo = ws.geo
    h_field = mean_curvature_field(imm, grid)
    _, lap_h, eta = second_covariant_normal(ws, h_field)
    if h_field.generator.zero:
        eta = np.zeros_like(eta)
    h2 = ScalarField(grid, geo.H**2, MeanCurvatureSquared(constant=grid_constant(geo.H**2)))
    _, _, lap_h2, _ = scalar_hessian(ws, h2)
    grad_h_sq = np.einsum("nij,nid,njd->n", geo.metric_inv, eta, eta, optimize=True)
    res = 0.5 * lap_h2 - np.sum(lap_h * geo.h, axis=-1) - grad_h_sq
    return float(np.abs(res).max())


# ---------------------------------------------------------------------------
# Matrix inequality and two-dimensional trace identities
# ---------------------------------------------------------------------------


def matrix_lemma_check(family) -> tuple[float, float, float]:
    """Commutator/trace bound for families of symmetric matrices.

    lhs = sum_{a,b} N(B_a B_b - B_b B_a) + [tr(B_a B_b)]^2
    rhs = 3/2 (sum_a N(B_a))^2, slack = rhs - lhs >= 0.
    """
    mats = np.asarray(family, dtype=float)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("family must be a stack of square matrices")
    if mats.shape[0] < 2:
        raise ValueError("the bound needs at least two matrices")
    if not np.array_equal(mats, np.swapaxes(mats, 1, 2)):
        raise ValueError("matrices must be exactly symmetric")
    prod = np.einsum("pac,qcb->pqab", mats, mats, optimize=True)
    comm = prod - np.einsum("pqab->qpab", prod)
    lhs = float(np.einsum("pqab,pqab->", comm, comm, optimize=True))
    tr_prod = np.einsum("pqaa->pq", prod)
    lhs += float(np.einsum("pq,pq->", tr_prod, tr_prod, optimize=True))
    norms = np.einsum("pab,pab->p", mats, mats, optimize=True)
    rhs = 1.5 * float(np.sum(norms)) ** 2
    return lhs, rhs, rhs - lhs


def matrix_lemma_sweep(trials: int, max_p: int, max_m: int, seed: int):
    """Seeded random sweep; returns (min slack, argmin descriptor)."""
    if trials < 1:
        raise ValueError("at least one trial required")
    if max_p < 2 or max_m < 1:
        raise ValueError("the bound needs p >= 2 and m >= 1")
    rng = np.random.default_rng(seed)
    min_slack = math.inf
    worst = None
    for trial in range(trials):
        p = int(rng.integers(2, max_p + 1))
        m = int(rng.integers(1, max_m + 1))
        raw = rng.uniform(-1.0, 1.0, (p, m, m))
        mats = 0.5 * (raw + np.swapaxes(raw, 1, 2))
        _, _, slack = matrix_lemma_check(mats)
        if slack < min_slack:
            min_slack = slack
            worst = {"trial": trial, "p": p, "m": m}
    return min_slack, worst


def identity_66_68_check(pg) -> float:
    """Max residual of the two-dimensional trace identities at one point.

    (a) commutators of A agree with commutators of phi;
    (b) tr(phi_a^2 phi_b) = 0;
    (c) sum tr(A_b) tr(A_a^2 A_b) = 2 H^2 |phi|^2 + 4 H^4
        + 4 sum H^a H^b tr(phi_a phi_b);
    (d) sum [tr(A_a A_b)]^2 = sum [tr(phi_a phi_b)]^2 + 4 H^4
        + 4 sum H^a H^b tr(phi_a phi_b).
    """
    wein = np.asarray(pg.weingarten)
    phi = np.asarray(pg.phi_alpha)
    h_alpha = np.asarray(pg.H_alpha)
    h_sq = float(np.asarray(pg.H)) ** 2
    phi_sq = float(np.asarray(pg.phi_sq))
    if wein.shape[-1] != 2:
        raise ValueError("these identities are specific to surfaces")

    ab = np.einsum("pac,qcb->pqab", wein, wein, optimize=True)
    fg = np.einsum("pac,qcb->pqab", phi, phi, optimize=True)
    comm_a = ab - np.einsum("pqab->qpab", ab)
    comm_f = fg - np.einsum("pqab->qpab", fg)
    res_a = float(np.abs(comm_a - comm_f).max())

    phi2phi = np.einsum("pab,pbc,qcd->pqad", phi, phi, phi, optimize=True)
    res_b = float(np.abs(np.einsum("pqaa->pq", phi2phi)).max())

    tr_phiphi = np.einsum("pqaa->pq", fg)
    cross = 4.0 * float(np.einsum("p,q,pq->", h_alpha, h_alpha, tr_phiphi, optimize=True))
    a_sq_a = np.einsum("pab,pbc,qcd->pqad", wein, wein, wein, optimize=True)
    lhs_c = float(
        np.einsum("q,pq->", 2.0 * h_alpha, np.einsum("pqaa->pq", a_sq_a), optimize=True)
    )
    rhs_c = 2.0 * h_sq * phi_sq + 4.0 * h_sq**2 + cross
    res_c = abs(lhs_c - rhs_c)

    tr_ab = np.einsum("pqaa->pq", ab)
    lhs_d = float(np.einsum("pq,pq->", tr_ab, tr_ab, optimize=True))
    rhs_d = float(np.einsum("pq,pq->", tr_phiphi, tr_phiphi, optimize=True)) + 4.0 * h_sq**2 + cross
    res_d = abs(lhs_d - rhs_d)
    return max(res_a, res_b, res_c, res_d)
