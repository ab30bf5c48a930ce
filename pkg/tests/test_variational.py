import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphereline import operators as O
from sphereline import variational as V
from sphereline.errors import CompactnessRequiredError, FdInstabilityError
from sphereline.geometry import pointwise_geometry, surface_geometry, PointGeometry
from sphereline.quadrature import integrate


# ---------------------------------------------------------------------------
# Total mean curvature
# ---------------------------------------------------------------------------


def test_total_mean_curvature_values(surfaces, test_grids):
    assert V.total_mean_curvature(surfaces["clifford_torus"], test_grids["clifford_torus"]) <= 1e-12
    assert V.total_mean_curvature(surfaces["slice_sphere"], test_grids["slice_sphere"]) <= 1e-12
    got = V.total_mean_curvature(surfaces["small_sphere"], test_grids["small_sphere"])
    # cot^2(pi/4) * area of the geodesic sphere = 4 pi sin^2(pi/4) = 2 pi
    assert abs(got - 2 * math.pi) <= 1e-6


def test_total_mean_curvature_needs_compact(surfaces, test_grids):
    with pytest.raises(CompactnessRequiredError):
        V.total_mean_curvature(surfaces["cylinder_patch"], test_grids["cylinder_patch"])


# ---------------------------------------------------------------------------
# Stationarity field
# ---------------------------------------------------------------------------


def test_el_residual_on_stationary_surfaces(surfaces, test_grids):
    for name in ("clifford_torus", "slice_sphere", "veronese"):
        _, mx = V.el_residual(surfaces[name], test_grids[name])
        assert mx <= 1e-8, (name, mx)


def test_el_residual_on_small_sphere(surfaces, test_grids):
    imm, grid = surfaces["small_sphere"], test_grids["small_sphere"]
    e_field, mx = V.el_residual(imm, grid)
    rho = imm.params["rho"]
    expected = 2.0 * math.cos(rho) / math.sin(rho)
    norms = np.linalg.norm(e_field, axis=-1)
    assert np.abs(norms - expected).max() <= 1e-6
    assert mx >= 0.1
    # the field is the closed-form multiple of h
    geo = O.get_workspace(imm, grid).geo
    direction = geo.h / geo.H[:, None]
    assert np.abs(e_field - expected * direction).max() <= 1e-6


def test_certification_separates_surfaces(surfaces, test_grids):
    ok, _, _ = V.certify_stationary(surfaces["veronese"], test_grids["veronese"])
    assert ok
    bad, max_e, _ = V.certify_stationary(surfaces["small_sphere"], test_grids["small_sphere"])
    assert not bad and max_e > 0.1


# ---------------------------------------------------------------------------
# First variation
# ---------------------------------------------------------------------------


def test_deformed_immersion_constraint_and_velocity(surfaces, test_grids):
    imm, grid = surfaces["graph_torus"], test_grids["graph_torus"]
    rng = np.random.default_rng(17)
    var = V.random_variation(imm, grid, rng)
    for s in (0.01, -0.02):
        deformed = var.deformed(s)
        x = deformed.raw_evaluate(grid.nodes)
        assert np.abs(np.linalg.norm(x[:, :-1], axis=1) - 1.0).max() <= 1e-14
    # velocity: centered difference of the deformation matches var.velocity
    eps = 1e-5
    xp = var.deformed(eps).raw_evaluate(grid.nodes)
    xm = var.deformed(-eps).raw_evaluate(grid.nodes)
    fd_vel = (xp - xm) / (2 * eps)
    assert np.abs(fd_vel - var.velocity).max() <= 1e-9


def test_first_variation_minimal_torus(surfaces, test_grids):
    imm, grid = surfaces["clifford_torus"], test_grids["clifford_torus"]
    rng = np.random.default_rng(5)
    var = V.random_variation(imm, grid, rng)
    fd, analytic, res = V.first_variation_check(imm, grid, var, delta=1e-3)
    assert abs(fd) <= 1e-8
    assert abs(analytic) <= 1e-8
    assert res <= 1e-8


def test_first_variation_random_fields(surfaces, test_grids):
    rng = np.random.default_rng(99)
    for name in ("graph_torus", "small_sphere"):
        imm, grid = surfaces[name], test_grids[name]
        for _ in range(2):
            var = V.random_variation(imm, grid, rng)
            _, _, res = V.first_variation_check(imm, grid, var, delta=1e-3)
            assert res <= 1e-4, name


def test_first_variation_normal_deformation_of_small_sphere(surfaces, test_grids):
    # v = f nu with nu the slice normal oriented along h: analytic side
    # collapses to the integral of 2 H f.
    imm, grid = surfaces["small_sphere"], test_grids["small_sphere"]
    rho = imm.params["rho"]
    ct = math.cos(rho) / math.sin(rho)
    d = imm.ambient_dim
    nu_lin = np.zeros((d, d))
    for c in range(3):
        nu_lin[c, c] = ct
    nu_const = np.array([0.0, 0.0, 0.0, -math.sin(rho), 0.0])
    f_const, f_lin = 0.3, np.array([0.0, 0.0, 1.0, 0.0, 0.0])
    quad = np.array([np.outer(f_lin, nu_lin[c]) for c in range(d)])
    raw = O.AmbientPolyVector(
        f_const * nu_const,
        f_const * nu_lin + np.outer(nu_const, f_lin),
        quad,
    )
    var = V.make_variation(imm, grid, raw)
    fd, analytic, res = V.first_variation_check(imm, grid, var, delta=1e-3)
    assert res <= 1e-4
    geo = O.get_workspace(imm, grid).geo
    f_vals = f_const + geo.jets[0][:, 2]
    signed = integrate(grid, 2.0 * geo.H * f_vals * np.sign(np.sum(geo.h * (geo.jets[0] @ nu_lin.T + nu_const), axis=-1)), geo.sqrt_det_g)
    assert abs(abs(analytic) - abs(signed)) <= 1e-6


def test_first_variation_validates_step(surfaces, test_grids):
    imm, grid = surfaces["clifford_torus"], test_grids["clifford_torus"]
    var = V.random_variation(imm, grid, np.random.default_rng(1))
    with pytest.raises(ValueError):
        V.first_variation_check(imm, grid, var, delta=1.0)
    with pytest.raises(ValueError):
        V.first_variation_check(imm, grid, var, delta=1e-6)


# ---------------------------------------------------------------------------
# Simons-type identity
# ---------------------------------------------------------------------------


def test_simons_residual_catalog(surfaces, test_grids):
    for name, tol in (
        ("slice_sphere", 1e-8),
        ("clifford_torus", 1e-6),
        ("veronese", 1e-4),
        ("small_sphere", 1e-4),
        ("graph_torus_02", 1e-4),
    ):
        _, mx = V.simons_residual(surfaces[name], test_grids[name])
        assert mx <= tol, (name, mx)


def test_simons_requires_closed_form_jets(surfaces, test_grids):
    from sphereline import immersion as im

    base = surfaces["graph_torus"]
    stripped = im.Immersion(
        name=base.name, sphere_dim=base.sphere_dim, param_dim=base.param_dim,
        domain=base.domain, chart=None, chi=base.chi, compact=base.compact,
        evaluator=base.chart.evaluate,
    )
    with pytest.raises(FdInstabilityError):
        V.simons_residual(stripped, test_grids["graph_torus"])


# ---------------------------------------------------------------------------
# Derivative-norm inequality
# ---------------------------------------------------------------------------


def test_huisken_slack(surfaces, test_grids):
    for name in ("slice_sphere", "clifford_torus", "veronese", "small_sphere", "graph_torus"):
        slack, mn = V.huisken_check(surfaces[name], test_grids[name])
        assert mn >= -1e-6, name
    for name in ("clifford_torus", "slice_sphere"):
        slack, _ = V.huisken_check(surfaces[name], test_grids[name])
        assert np.abs(slack).max() <= 1e-7, name


# ---------------------------------------------------------------------------
# Matrix inequality
# ---------------------------------------------------------------------------


def test_matrix_lemma_zero_family():
    lhs, rhs, slack = V.matrix_lemma_check(np.zeros((2, 3, 3)))
    assert lhs == 0.0 and rhs == 0.0 and slack == 0.0


def test_matrix_lemma_extremal_pair():
    b1 = np.diag([1.0, -1.0])
    b2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    lhs, rhs, slack = V.matrix_lemma_check([b1, b2])
    assert abs(lhs - 24.0) <= 1e-12
    assert abs(rhs - 24.0) <= 1e-12
    assert abs(slack) <= 1e-12


def test_matrix_lemma_validation():
    with pytest.raises(ValueError):
        V.matrix_lemma_check([np.diag([1.0, 2.0])])  # p = 1
    bad = np.zeros((2, 2, 2))
    bad[0, 0, 1] = 1.0  # not symmetric
    with pytest.raises(ValueError):
        V.matrix_lemma_check(bad)
    with pytest.raises(ValueError):
        V.matrix_lemma_sweep(0, 4, 3, 1)
    with pytest.raises(ValueError):
        V.matrix_lemma_sweep(10, 1, 3, 1)


def test_matrix_lemma_seeded_sweep_small():
    min_slack, _ = V.matrix_lemma_sweep(3000, 6, 5, seed=7)
    assert min_slack >= -1e-12


@settings(max_examples=200, deadline=None)
@given(
    p=st.integers(min_value=2, max_value=5),
    m=st.integers(min_value=1, max_value=4),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_matrix_lemma_property(p, m, seed):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1.0, 1.0, (p, m, m))
    mats = 0.5 * (raw + np.swapaxes(raw, 1, 2))
    _, _, slack = V.matrix_lemma_check(mats)
    assert slack >= -1e-12


# ---------------------------------------------------------------------------
# Two-dimensional trace identities
# ---------------------------------------------------------------------------


def test_identity_66_68(surfaces):
    pg = pointwise_geometry(surfaces["slice_sphere"], [0.9, 1.0], order=2)
    assert V.identity_66_68_check(pg) <= 1e-15

    pg = pointwise_geometry(surfaces["small_sphere"], [1.2, 0.7], order=2)
    assert V.identity_66_68_check(pg) <= 1e-10

    imm = surfaces["graph_torus"]
    rng = np.random.default_rng(12)
    pts = np.stack([rng.uniform(0, 2 * math.pi, 100), rng.uniform(0, 2 * math.pi, 100)], axis=-1)
    geo = surface_geometry(imm, pts, order=2)
    worst = max(V.identity_66_68_check(PointGeometry(geo, i)) for i in range(100))
    assert worst <= 1e-9


def test_eq57_pointwise(surfaces, test_grids):
    assert V.eq57_residual(surfaces["small_sphere"], test_grids["small_sphere"]) <= 1e-5
    assert V.eq57_residual(surfaces["graph_torus"], test_grids["graph_torus"]) <= 1e-5
