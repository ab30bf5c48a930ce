"""Pointwise extrinsic geometry of an immersed surface.

All tensors are carried in ambient coordinates or in orthonormal frames; the
orthonormal frames make contractions well conditioned even where a chart
degenerates (polar axes of sphere charts), because coordinate jets are
contracted against the frame-change matrix before any projection.

The ambient connection is realized through the flat embedding: the Euclidean
derivative plus the sphere-factor correction, equivalently the orthogonal
projection of the Euclidean derivative onto the tangent space of the
product.  The curvature convention follows the source convention
R(X,Y)Z = nabla_{[X,Y]}Z - [nabla_X, nabla_Y]Z, so the expanded form of the
ambient curvature below is taken as ground truth and the Gauss-equation
self-consistency check guards the sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImmersionError
from .immersion import Immersion, Jet, jet as make_jet

DET_G_FLOOR = 1e-12
TANGENCY_TOL = 1e-8


# ---------------------------------------------------------------------------
# Ambient operations
# ---------------------------------------------------------------------------


def constraint_normal(point: np.ndarray) -> np.ndarray:
    """Unit normal of the product inside flat space: sphere part, zero height."""
    nu = np.array(point, dtype=float)
    nu[..., -1] = 0.0
    return nu


def _check_tangent(point, vec, label):
    sp = np.asarray(point, dtype=float)[..., :-1]
    vs = np.asarray(vec, dtype=float)[..., :-1]
    dev = float(np.max(np.abs(np.sum(sp * vs, axis=-1))))
    if dev > TANGENCY_TOL:
        raise ValueError(f"{label} is not tangent to the product (deviation {dev:.3e})")


def ambient_connection(base, x_vec, dy, y=None) -> np.ndarray:
    """Covariant derivative of the product metric through the embedding.

    ``dy`` is the Euclidean directional derivative of the field Y along
    ``x_vec``.  When the field value ``y`` is supplied the sphere-factor
    correction <X_s, Y_s> * (p_s, 0) is added explicitly; otherwise the
    equivalent tangential projection of ``dy`` is returned.
    """
    base = np.asarray(base, dtype=float)
    x_vec = np.asarray(x_vec, dtype=float)
    dy = np.asarray(dy, dtype=float)
    _check_tangent(base, x_vec, "direction")
    nu = constraint_normal(base)
    if y is not None:
        y = np.asarray(y, dtype=float)
        corr = np.sum(x_vec[..., :-1] * y[..., :-1], axis=-1)
        return dy + corr[..., None] * nu
    return dy - np.sum(dy * nu, axis=-1)[..., None] * nu


def ambient_curvature(point, x, y, z) -> np.ndarray:
    """Curvature tensor of the product space, written out explicitly.

    R(X,Y)Z = <X,Z>Y - <Y,Z>X + <Z,dt>(<Y,dt>X - <X,dt>Y)
              + (<Y,Z><X,dt> - <X,Z><Y,dt>) dt
    """
    point = np.asarray(point, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    for vec, label in ((x, "X"), (y, "Y"), (z, "Z")):
        _check_tangent(point, vec, label)
    xz = np.sum(x * z, axis=-1)[..., None]
    yz = np.sum(y * z, axis=-1)[..., None]
    xt = x[..., -1:]
    yt = y[..., -1:]
    zt = z[..., -1:]
    out = xz * y - yz * x + zt * (yt * x - xt * y)
    out[..., -1] += (yz * xt - xz * yt)[..., 0]
    return out


# ---------------------------------------------------------------------------
# Surface geometry (batched over points)
# ---------------------------------------------------------------------------


@dataclass
class SurfaceGeometry:
    """All pointwise tensors over a batch of parameter points.

    Index conventions: n = point, i/j/k/l = coordinate, a/b/c = tangent
    frame, greek (axis named ``p``) = normal frame, d = ambient coordinate.
    christoffel[n, k, i, j] stores Gamma^k_ij; dsigma[n, k, i, j] stores the
    parameter derivative of the ambient-valued sigma_ij along axis k;
    nabla_sigma_frame[n, c, a, b] stores (nabla_perp sigma)(E_a, E_b; E_c).
    """

    imm: Immersion
    points: np.ndarray
    order: int
    jets: dict
    metric: np.ndarray
    metric_inv: np.ndarray
    sqrt_det_g: np.ndarray
    dmetric: np.ndarray
    christoffel: np.ndarray
    tangent_frame: np.ndarray
    coord_to_frame: np.ndarray
    normal_frame: np.ndarray
    nu: np.ndarray
    sigma_coord: np.ndarray
    sigma_frame: np.ndarray
    weingarten: np.ndarray
    h: np.ndarray
    H: np.ndarray
    H_alpha: np.ndarray
    T: np.ndarray
    N: np.ndarray
    T_frame: np.ndarray
    phi_frame: np.ndarray
    phi_alpha: np.ndarray
    A_h: np.ndarray
    phi_h: np.ndarray
    sigma_sq: np.ndarray
    phi_sq: np.ndarray
    phi_h_norm: np.ndarray
    T_sq: np.ndarray
    N_sq: np.ndarray
    N_dot_h: np.ndarray
    K: np.ndarray | None
    dT_coord: np.ndarray | None = None
    dsigma: np.ndarray | None = None
    nabla_sigma_frame: np.ndarray | None = None
    nabla_sigma_sq: np.ndarray | None = None
    nabla_h_coord: np.ndarray | None = None
    K_brioschi: np.ndarray | None = None
    intrinsic_R_frame: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return self.points.shape[0]

    @property
    def normal_count(self) -> int:
        return self.normal_frame.shape[1]

    def project_normal(self, w: np.ndarray) -> np.ndarray:
        """Project ambient vectors onto the normal space of the surface."""
        out = w - np.einsum("nad,nd,nae->ne", self.tangent_frame, w, self.tangent_frame, optimize=True)
        out -= np.sum(out * self.nu, axis=-1)[..., None] * self.nu
        return out

    def project_tangent(self, w: np.ndarray) -> np.ndarray:
        return np.einsum("nad,nd,nae->ne", self.tangent_frame, w, self.tangent_frame, optimize=True)

    def frame_components(self, w: np.ndarray) -> np.ndarray:
        """Normal-frame coefficients of ambient normal vectors, shape (N, p)."""
        return np.einsum("npd,nd->np", self.normal_frame, w, optimize=True)

    def dprojector_normal(self) -> np.ndarray:
        """Parameter derivative of the normal projector, shape (N, m, d, d).

        Pi_N = I - Pi_tan - nu nu^T with Pi_tan = g^ij x_i x_j^T, so the
        derivative follows from the product rule on exact jets.
        """
        j1 = self.jets[1]
        j2 = self.jets[2]
        ginv = self.metric_inv
        dg = self.dmetric
        dginv = -np.einsum("nia,nkab,nbj->nkij", ginv, dg, ginv, optimize=True)
        dtan = np.einsum("nkij,nid,nje->nkde", dginv, j1, j1, optimize=True)
        dtan += np.einsum("nij,nikd,nje->nkde", ginv, j2, j1, optimize=True)
        dtan += np.einsum("nij,nid,njke->nkde", ginv, j1, j2, optimize=True)
        dnu = j1.copy()
        dnu[..., -1] = 0.0
        douter = np.einsum("nkd,ne->nkde", dnu, self.nu) + np.einsum(
            "nd,nke->nkde", self.nu, dnu
        )
        return -dtan - douter


def _orthonormal_tangent(j1: np.ndarray):
    """Deterministic orthonormal tangent frame via batched QR.

    Returns frame rows E_a (N, m, d) and the change matrix C with
    E_a = C[a, i] x_i.
    """
    x = np.swapaxes(j1, 1, 2)  # (N, d, m) columns x_i
    q, r = np.linalg.qr(x)
    sign = np.sign(np.einsum("nii->ni", r))
    sign = np.where(sign == 0.0, 1.0, sign)
    q = q * sign[:, None, :]
    r = r * sign[:, :, None]
    frame = np.swapaxes(q, 1, 2)  # (N, m, d)
    m = r.shape[1]
    rinv = np.linalg.inv(r)
    c = np.swapaxes(rinv, 1, 2)  # C[a, i] = (R^-1)[i, a]
    return frame, c


def _normal_frame(tangent: np.ndarray, nu: np.ndarray, p: int) -> np.ndarray:
    """Greedy pivoted Gram-Schmidt complement of span(tangent, nu).

    Seeded by the standard ambient basis in fixed index order with largest
    residual chosen first; ties resolve to the lowest index, so the gauge is
    reproducible (and otherwise arbitrary).
    """
    n, m, d = tangent.shape
    basis = np.concatenate([tangent, nu[:, None, :]], axis=1)
    frames = np.empty((n, p, d))
    for slot in range(p):
        residual_sq = 1.0 - np.sum(basis**2, axis=1)  # <e_k, B_q> = B_q[k]
        pick = np.argmax(residual_sq, axis=1)
        vec = np.zeros((n, d))
        vec[np.arange(n), pick] = 1.0
        for _ in range(2):  # re-orthogonalize once for stability
            vec -= np.einsum("nqd,nd,nqe->ne", basis, vec, basis, optimize=True)
        norms = np.linalg.norm(vec, axis=1)
        if np.any(norms < 1e-8):
            raise DegenerateImmersionError("normal frame construction collapsed")
        vec /= norms[:, None]
        frames[:, slot, :] = vec
        basis = np.concatenate([basis, vec[:, None, :]], axis=1)
    return frames


def _brioschi_from_values(E, F, G, Eu, Ev, Gu, Gv, Fu, Fv, Evv, Guu, Fuv):
    def det3(a00, a01, a02, a10, a11, a12, a20, a21, a22):
        return (
            a00 * (a11 * a22 - a12 * a21)
            - a01 * (a10 * a22 - a12 * a20)
            + a02 * (a10 * a21 - a11 * a20)
        )

    d1 = det3(
        -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
        Fv - 0.5 * Gu, E, F,
        0.5 * Gv, F, G,
    )
    d2 = det3(
        np.zeros_like(E), 0.5 * Ev, 0.5 * Gu,
        0.5 * Ev, E, F,
        0.5 * Gu, F, G,
    )
    det_g = E * G - F * F
    return np.asarray((d1 - d2) / det_g**2, dtype=float)


def brioschi_curvature(imm: Immersion, points: np.ndarray,
                       metric=None, dmetric=None, ddmetric=None) -> np.ndarray:
    """Intrinsic Gaussian curvature from the first fundamental form alone.

    Metric values and first derivatives come from jet contractions (sums of
    products, well conditioned everywhere).  The three second-derivative
    entries cancel catastrophically near chart degeneracies when assembled
    numerically, so charts with closed-form components evaluate them from
    consolidated symbolic metric entries instead.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if imm.chart is not None:
        # The formula amplifies relative input noise by 1/det(g), which near
        # chart poles exceeds what generic float64 entries allow.  Metric
        # values come from jet contractions (sums of squares: relatively
        # accurate); every derivative entry is evaluated from the
        # consolidated symbolic metric in extended precision, where the
        # quarter-turn phase bookkeeping keeps small values relatively exact.
        if metric is None:
            j1 = imm.jet_batch(pts, 1)[1]
            metric = np.einsum("nid,njd->nij", j1, j1, optimize=True)
        ch = imm.chart
        u = pts[..., 0].astype(np.longdouble)
        v = pts[..., 1].astype(np.longdouble)
        gE = ch.metric_expr(0, 0)
        gF = ch.metric_expr(0, 1)
        gG = ch.metric_expr(1, 1)
        return _brioschi_from_values(
            metric[:, 0, 0].astype(np.longdouble),
            metric[:, 0, 1].astype(np.longdouble),
            metric[:, 1, 1].astype(np.longdouble),
            gE.derivative(0).eval(u, v), gE.derivative(1).eval(u, v),
            gG.derivative(0).eval(u, v), gG.derivative(1).eval(u, v),
            gF.derivative(0).eval(u, v), gF.derivative(1).eval(u, v),
            gE.derivative(1).derivative(1).eval(u, v),
            gG.derivative(0).derivative(0).eval(u, v),
            gF.derivative(0).derivative(1).eval(u, v),
        )
    if metric is None or dmetric is None or ddmetric is None:
        raise ValueError("order-3 metric jets required without a closed-form chart")
    return _brioschi_from_values(
        metric[:, 0, 0], metric[:, 0, 1], metric[:, 1, 1],
        dmetric[:, 0, 0, 0], dmetric[:, 1, 0, 0],
        dmetric[:, 0, 1, 1], dmetric[:, 1, 1, 1],
        dmetric[:, 0, 0, 1], dmetric[:, 1, 0, 1],
        ddmetric[:, 1, 1, 0, 0], ddmetric[:, 0, 0, 1, 1], ddmetric[:, 0, 1, 0, 1],
    )


def surface_geometry(imm: Immersion, points: np.ndarray, order: int = 2,
                     jets: dict | None = None) -> SurfaceGeometry:
    """Compute the full pointwise geometry over a batch of parameter points.

    ``order`` = 2 yields the algebraic tensors; ``order`` >= 3 adds covariant
    derivatives of sigma, the mean curvature derivative, the Brioschi
    curvature, and the intrinsic curvature tensor.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if jets is None:
        jets = imm.jet_batch(pts, order)
    m = imm.param_dim
    j1 = jets[1]
    j2 = jets[2]

    metric = np.einsum("nid,njd->nij", j1, j1, optimize=True)
    det_g = np.linalg.det(metric)
    if np.any(det_g <= DET_G_FLOOR):
        raise DegenerateImmersionError(
            f"metric determinant fell to {float(det_g.min()):.3e} (floor {DET_G_FLOOR:.0e})"
        )
    metric_inv = np.linalg.inv(metric)
    sqrt_det_g = np.sqrt(det_g)

    # dmetric[k, i, j] = d_k g_ij = <x_ik, x_j> + <x_i, x_jk>
    dmetric = np.einsum("nkid,njd->nkij", j2, j1, optimize=True)
    dmetric = dmetric + np.swapaxes(dmetric, 2, 3)
    # Gamma^l_ij = 1/2 g^lm (d_i g_jm + d_j g_im - d_m g_ij)
    bmat = (
        np.einsum("nijm->nijm", dmetric)
        + np.einsum("njim->nijm", dmetric)
        - np.einsum("nmij->nijm", dmetric)
    )
    christoffel = 0.5 * np.einsum("nlm,nijm->nlij", metric_inv, bmat, optimize=True)

    tangent_frame, coord_to_frame = _orthonormal_tangent(j1)
    nu = jets[0].copy()
    nu[..., -1] = 0.0
    d = j1.shape[-1]
    p = d - m - 1
    normal_frame = _normal_frame(tangent_frame, nu, p)

    # sigma(E_a, E_b): contract jets with the frame change before projecting,
    # which keeps the computation conditioned at near-degenerate chart points.
    x_frame2 = np.einsum("nai,nbj,nijd->nabd", coord_to_frame, coord_to_frame, j2, optimize=True)
    proj_n = lambda w: _project_normal(w, tangent_frame, nu)
    sigma_frame = proj_n(x_frame2)
    sigma_coord = proj_n(j2)

    weingarten = np.einsum("npd,nabd->npab", normal_frame, sigma_frame, optimize=True)
    h = np.einsum("naad->nd", sigma_frame) / m
    H = np.linalg.norm(h, axis=-1)
    H_alpha = np.einsum("npd,nd->np", normal_frame, h, optimize=True)

    T_frame = tangent_frame[..., -1]  # <E_a, dt> = last component
    T = np.einsum("na,nad->nd", T_frame, tangent_frame, optimize=True)
    dt = np.zeros_like(h)
    dt[..., -1] = 1.0
    Nvec = dt - T
    T_sq = np.sum(T * T, axis=-1)
    N_sq = np.sum(Nvec * Nvec, axis=-1)
    N_dot_h = np.sum(Nvec * h, axis=-1)

    eye = np.eye(m)
    phi_frame = sigma_frame - eye[None, :, :, None] * h[:, None, None, :]
    phi_alpha = weingarten - H_alpha[:, :, None, None] * eye[None, None, :, :]
    A_h = np.einsum("nabd,nd->nab", sigma_frame, h, optimize=True)
    tr_Ah = np.einsum("naa->n", A_h)
    phi_h = A_h - (tr_Ah / m)[:, None, None] * eye[None, :, :]
    sigma_sq = np.einsum("nabd,nabd->n", sigma_frame, sigma_frame, optimize=True)
    phi_sq = np.einsum("nabd,nabd->n", phi_frame, phi_frame, optimize=True)
    phi_h_norm = np.sqrt(np.einsum("nab,nab->n", phi_h, phi_h, optimize=True))

    K = None
    if m == 2:
        K = H**2 - 0.5 * phi_sq + (1.0 - T_sq)

    geo = SurfaceGeometry(
        imm=imm,
        points=pts,
        order=order,
        jets=jets,
        metric=metric,
        metric_inv=metric_inv,
        sqrt_det_g=sqrt_det_g,
        dmetric=dmetric,
        christoffel=christoffel,
        tangent_frame=tangent_frame,
        coord_to_frame=coord_to_frame,
        normal_frame=normal_frame,
        nu=nu,
        sigma_coord=sigma_coord,
        sigma_frame=sigma_frame,
        weingarten=weingarten,
        h=h,
        H=H,
        H_alpha=H_alpha,
        T=T,
        N=Nvec,
        T_frame=T_frame,
        phi_frame=phi_frame,
        phi_alpha=phi_alpha,
        A_h=A_h,
        phi_h=phi_h,
        sigma_sq=sigma_sq,
        phi_sq=phi_sq,
        phi_h_norm=phi_h_norm,
        T_sq=T_sq,
        N_sq=N_sq,
        N_dot_h=N_dot_h,
        K=K,
    )

    geo.dT_coord = _dT_coord(geo)
    if order >= 3:
        _attach_third_order(geo)
    return geo


def _project_normal(w, tangent_frame, nu):
    out = w - np.einsum(
        "nad,n...d,nae->n...e", tangent_frame, w, tangent_frame, optimize=True
    )
    out -= np.einsum("nd,n...d,ne->n...e", nu, out, nu, optimize=True)
    return out


def _dT_coord(geo: SurfaceGeometry) -> np.ndarray:
    """Parameter derivative of the tangential part of dt, shape (N, m, d)."""
    j1, j2 = geo.jets[1], geo.jets[2]
    ginv = geo.metric_inv
    dg = geo.dmetric
    t = j1[..., -1]  # t_i = <x_i, dt>
    dt_i = j2[..., -1]  # [k, i] after index roles below: j2[n,i,k,-1]
    dginv = -np.einsum("nia,nkab,nbj->nkij", ginv, dg, ginv, optimize=True)
    out = np.einsum("nkij,ni,njd->nkd", dginv, t, j1, optimize=True)
    out += np.einsum("nij,nik,njd->nkd", ginv, dt_i, j1, optimize=True)
    out += np.einsum("nij,ni,njkd->nkd", ginv, t, j2, optimize=True)
    return out


def _attach_third_order(geo: SurfaceGeometry) -> None:
    imm = geo.imm
    jets = geo.jets
    if 3 not in jets:
        jets.update(imm.jet_batch(geo.points, 3))
    j1, j2, j3 = jets[1], jets[2], jets[3]
    ginv = geo.metric_inv
    dg = geo.dmetric
    m = imm.param_dim

    ddmetric = (
        np.einsum("nikld,njd->nklij", j3, j1, optimize=True)
        + np.einsum("nikd,njld->nklij", j2, j2, optimize=True)
        + np.einsum("nild,njkd->nklij", j2, j2, optimize=True)
        + np.einsum("nid,njkld->nklij", j1, j3, optimize=True)
    )

    # d_k sigma_ij in ambient coordinates.
    dginv = -np.einsum("nia,nkab,nbj->nkij", ginv, dg, ginv, optimize=True)
    s_ij_l = np.einsum("nijd,nld->nijl", j2, j1, optimize=True)  # <x_ij, x_l>
    ds_ij_l = np.einsum("nijkd,nld->nkijl", j3, j1, optimize=True) + np.einsum(
        "nijd,nlkd->nkijl", j2, j2, optimize=True
    )
    dnu = j1.copy()
    dnu[..., -1] = 0.0
    nu = geo.nu
    s_nu = np.einsum("nijd,nd->nij", j2, nu, optimize=True)
    ds_nu = np.einsum("nijkd,nd->nkij", j3, nu, optimize=True)
    ds_nu += np.einsum("nijd,nkd->nkij", j2, dnu, optimize=True)

    dsigma = np.einsum("nijkd->nkijd", j3).copy()
    dsigma -= np.einsum("nklm,nijl,nmd->nkijd", dginv, s_ij_l, j1, optimize=True)
    dsigma -= np.einsum("nlm,nkijl,nmd->nkijd", ginv, ds_ij_l, j1, optimize=True)
    dsigma -= np.einsum("nlm,nijl,nmkd->nkijd", ginv, s_ij_l, j2, optimize=True)
    dsigma -= np.einsum("nkij,nd->nkijd", ds_nu, nu, optimize=True)
    dsigma -= np.einsum("nij,nkd->nkijd", s_nu, dnu, optimize=True)
    geo.dsigma = dsigma

    # (nabla_perp sigma)_k(i,j) = Pi_N(d_k sigma_ij) - Gamma^l_ki sigma_lj
    #                                               - Gamma^l_kj sigma_il
    nabla_coord = _project_normal(dsigma, geo.tangent_frame, nu)
    nabla_coord -= np.einsum("nlki,nljd->nkijd", geo.christoffel, geo.sigma_coord, optimize=True)
    nabla_coord -= np.einsum("nlkj,nild->nkijd", geo.christoffel, geo.sigma_coord, optimize=True)
    c = geo.coord_to_frame
    geo.nabla_sigma_frame = np.einsum(
        "nck,nai,nbj,nkijd->ncabd", c, c, c, nabla_coord, optimize=True
    )
    geo.nabla_sigma_sq = np.einsum(
        "ncabd,ncabd->n", geo.nabla_sigma_frame, geo.nabla_sigma_frame, optimize=True
    )
    # nabla_perp h commutes with the metric trace of sigma.
    geo.nabla_h_coord = np.einsum("nij,nkijd->nkd", ginv, nabla_coord, optimize=True) / m

    if m == 2:
        geo.K_brioschi = brioschi_curvature(
            imm, geo.points, metric=geo.metric, dmetric=dg, ddmetric=ddmetric
        )

    # Intrinsic curvature via Christoffel derivatives (source sign convention).
    # dB[p, i, j, m] = d_p (d_i g_jm + d_j g_im - d_m g_ij); ddmetric[p,k,i,j]
    # stores d_p d_k g_ij.
    dB = (
        np.einsum("npijm->npijm", ddmetric)
        + np.einsum("npjim->npijm", ddmetric)
        - np.einsum("npmij->npijm", ddmetric)
    )
    bmat = (
        np.einsum("nijm->nijm", dg)
        + np.einsum("njim->nijm", dg)
        - np.einsum("nmij->nijm", dg)
    )
    dchristoffel = 0.5 * np.einsum("nplm,nijm->nplij", dginv, bmat, optimize=True)
    dchristoffel += 0.5 * np.einsum("nlm,npijm->nplij", ginv, dB, optimize=True)

    gam = geo.christoffel
    # R_std(d_i, d_j) d_k = [d_i Gam^l_jk - d_j Gam^l_ik
    #                        + Gam^l_im Gam^m_jk - Gam^l_jm Gam^m_ik] d_l
    r_up = (
        np.einsum("niljk->nijkl", dchristoffel)
        - np.einsum("njlik->nijkl", dchristoffel)
        + np.einsum("nlim,nmjk->nijkl", gam, gam, optimize=True)
        - np.einsum("nljm,nmik->nijkl", gam, gam, optimize=True)
    )
    r_low_std = np.einsum("nijkl,nlm->nijkm", r_up, geo.metric, optimize=True)
    r_low = -r_low_std  # source convention flips the standard sign
    geo.intrinsic_R_frame = np.einsum(
        "nai,nbj,nck,nel,nijkl->nabce", c, c, c, c, r_low, optimize=True
    )


# ---------------------------------------------------------------------------
# Pointwise view and residual operations
# ---------------------------------------------------------------------------


@dataclass
class PointGeometry:
    """Single-point view of SurfaceGeometry (arrays without the batch axis)."""

    geo: SurfaceGeometry
    index: int

    def __getattr__(self, name):
        value = getattr(self.geo, name)
        if isinstance(value, np.ndarray) and value.shape[:1] == (self.geo.node_count,):
            return value[self.index]
        return value


def pointwise_geometry(imm: Immersion, p, jets: Jet | None = None, order: int = 2) -> PointGeometry:
    """All pointwise tensors at one parameter point."""
    p = np.asarray(p, dtype=float)
    if jets is not None:
        order = max(order, jets.order)
        batch = {k: v[None, ...] for k, v in jets.tensors.items()}
        geo = surface_geometry(imm, p[None, :], order=order, jets=batch)
    else:
        geo = surface_geometry(imm, p[None, :], order=order)
    return PointGeometry(geo=geo, index=0)


def gauss_residual_batch(geo: SurfaceGeometry) -> np.ndarray:
    """Max |LHS - RHS| of the Gauss equation over frame index tuples, per node."""
    if geo.intrinsic_R_frame is None:
        raise ValueError("gauss residual needs order-3 geometry")
    m = geo.tangent_frame.shape[1]
    eye = np.eye(m)
    Tf = geo.T_frame
    sig = geo.sigma_frame
    lhs = geo.intrinsic_R_frame
    rhs = np.einsum("ac,bd->abcd", eye, eye)[None] - np.einsum("bc,ad->abcd", eye, eye)[None]
    rhs = rhs + np.einsum("nc,nb,ad->nabcd", Tf, Tf, eye) - np.einsum(
        "nc,na,bd->nabcd", Tf, Tf, eye
    )
    rhs = rhs + np.einsum("bc,na,nd->nabcd", eye, Tf, Tf) - np.einsum(
        "ac,nb,nd->nabcd", eye, Tf, Tf
    )
    rhs = rhs + np.einsum("nace,nbde->nabcd", sig, sig, optimize=True) - np.einsum(
        "nbce,nade->nabcd", sig, sig, optimize=True
    )
    return np.max(np.abs(lhs - rhs), axis=(1, 2, 3, 4))


def gauss_residual(pg: PointGeometry, a: int, b: int, c: int, d: int) -> float:
    """|LHS - RHS| of the Gauss equation for one frame index tuple."""
    geo = pg.geo
    n = pg.index
    if geo.intrinsic_R_frame is None:
        raise ValueError("gauss residual needs order-3 geometry")
    eye = np.eye(geo.tangent_frame.shape[1])
    Tf = geo.T_frame[n]
    sig = geo.sigma_frame[n]
    lhs = geo.intrinsic_R_frame[n][a, b, c, d]
    rhs = (
        eye[a, c] * eye[b, d]
        - eye[b, c] * eye[a, d]
        + Tf[c] * (Tf[b] * eye[a, d] - Tf[a] * eye[b, d])
        + (eye[b, c] * Tf[a] - eye[a, c] * Tf[b]) * Tf[d]
        + float(np.dot(sig[a, c], sig[b, d]) - np.dot(sig[b, c], sig[a, d]))
    )
    return abs(lhs - rhs)


def codazzi_residual_batch(geo: SurfaceGeometry) -> np.ndarray:
    """Max norm of the Codazzi defect over frame triples, per node."""
    if geo.nabla_sigma_frame is None:
        raise ValueError("codazzi residual needs order-3 geometry")
    nsf = geo.nabla_sigma_frame  # [c, a, b] = (nabla_{E_c} sigma)(E_a, E_b)
    m = nsf.shape[1]
    eye = np.eye(m)
    Tf = geo.T_frame
    # (nabla_{E_b} sigma)(E_a, E_c) - (nabla_{E_a} sigma)(E_b, E_c)
    lhs = np.einsum("nbacd->nabcd", nsf) - nsf
    coeff = np.einsum("bc,na->nabc", eye, Tf) - np.einsum("ac,nb->nabc", eye, Tf)
    defect = lhs - coeff[..., None] * geo.N[:, None, None, None, :]
    return np.max(np.linalg.norm(defect, axis=-1), axis=(1, 2, 3))


def codazzi_residual(imm: Immersion, p, jets: Jet | None = None) -> float:
    """Codazzi defect at one point (order-3 jets)."""
    pg = pointwise_geometry(imm, p, jets=jets, order=3)
    return float(codazzi_residual_batch(pg.geo)[0])


def dt_compatibility_residual_batch(geo: SurfaceGeometry) -> np.ndarray:
    """Defect of the structure equations for the splitting of dt, per node.

    nabla_X T = A_N(X) and nabla^perp_X N = -sigma(T, X) over frame X.
    """
    c = geo.coord_to_frame
    dT_frame_dir = np.einsum("nak,nkd->nad", c, geo.dT_coord, optimize=True)
    grad_T = np.einsum(
        "nbd,nad,nbe->nae", geo.tangent_frame, dT_frame_dir, geo.tangent_frame, optimize=True
    )
    A_N_mat = np.einsum("nabd,nd->nab", geo.sigma_frame, geo.N, optimize=True)
    A_N_vec = np.einsum("nab,nbd->nad", A_N_mat, geo.tangent_frame, optimize=True)
    res1 = np.linalg.norm(grad_T - A_N_vec, axis=-1)

    dN_perp = -_project_normal(dT_frame_dir, geo.tangent_frame, geo.nu)
    sigma_T = np.einsum("nb,nbad->nad", geo.T_frame, geo.sigma_frame, optimize=True)
    res2 = np.linalg.norm(dN_perp + sigma_T, axis=-1)
    return np.max(res1 + res2, axis=1)


def dt_compatibility_residual(pg: PointGeometry) -> float:
    return float(dt_compatibility_residual_batch(pg.geo)[pg.index])


def gaussian_curvature(pg: PointGeometry) -> float:
    """Gaussian curvature from the extrinsic data (two-dimensional surfaces)."""
    if pg.geo.K is None:
        raise ValueError("gaussian curvature is defined for surfaces only")
    return float(pg.geo.K[pg.index])


def rotated_normal_gauge(geo: SurfaceGeometry, rotation: np.ndarray) -> SurfaceGeometry:
    """Recompute frame-coefficient data under a rotated normal frame.

    Used by gauge-invariance checks: scalar outputs must not change.
    """
    new_frame = np.einsum("pq,nqd->npd", rotation, geo.normal_frame, optimize=True)
    out = SurfaceGeometry(**{**geo.__dict__})
    out.normal_frame = new_frame
    out.weingarten = np.einsum("npd,nabd->npab", new_frame, geo.sigma_frame, optimize=True)
    out.H_alpha = np.einsum("npd,nd->np", new_frame, geo.h, optimize=True)
    eye = np.eye(geo.tangent_frame.shape[1])
    out.phi_alpha = out.weingarten - out.H_alpha[:, :, None, None] * eye[None, None, :, :]
    return out
