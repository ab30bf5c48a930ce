import dataclasses
import math

import numpy as np
import pytest

from sphereline import inequalities as Q
from sphereline import operators as O
from sphereline.errors import CompactnessRequiredError, HypothesisViolationError
from sphereline.quadrature import build_grid

EIGHT_PI = 8 * math.pi


def test_main_inequality_equality_cases(surfaces, test_grids):
    for name in ("slice_sphere", "veronese"):
        rep = Q.main_inequality(surfaces[name], test_grids[name])
        assert abs(rep.lhs - EIGHT_PI) <= 1e-5 * (1 + EIGHT_PI), name
        assert rep.rhs == pytest.approx(EIGHT_PI, abs=1e-12)
        assert rep.equality and rep.holds
        assert rep.stationarity_certified


def test_main_inequality_strict_on_flat_torus(surfaces, test_grids):
    rep = Q.main_inequality(surfaces["clifford_torus"], test_grids["clifford_torus"])
    assert abs(rep.lhs + 4 * math.pi**2) <= 1e-5 * (1 + 4 * math.pi**2)
    assert rep.rhs == 0.0
    assert rep.holds and not rep.equality
    assert "strict" in rep.notes  # discrepancy record for the classified case
    # pointwise: the integrand is the constant -2
    assert abs(rep.integrand_min + 2.0) <= 1e-12
    assert abs(rep.integrand_max + 2.0) <= 1e-12


def test_main_inequality_on_non_stationary_surface(surfaces, test_grids):
    rep = Q.main_inequality(surfaces["graph_torus"], test_grids["graph_torus"])
    assert rep.stationarity_certified is False
    assert "not certified" in rep.notes


def test_guo_yin_flat_torus_equality_at_three(surfaces, test_grids):
    rep = Q.guo_yin_inequality(surfaces["clifford_torus"], test_grids["clifford_torus"], 3)
    assert max(abs(rep.integrand_min), abs(rep.integrand_max)) <= 1e-9
    assert abs(rep.lhs) <= 1e-7 and rep.rhs == 0.0
    assert rep.equality


def test_guo_yin_round_spheres(surfaces, test_grids):
    for n_eff in (3, 4, 7):
        rep = Q.guo_yin_inequality(surfaces["slice_sphere"], test_grids["slice_sphere"], n_eff)
        assert abs(rep.lhs - EIGHT_PI) <= 1e-5 * (1 + EIGHT_PI)
        assert rep.equality
    rep = Q.guo_yin_inequality(surfaces["veronese"], test_grids["veronese"], 4)
    assert abs(rep.lhs - EIGHT_PI) <= 1e-5 * (1 + EIGHT_PI)
    assert rep.equality


def test_guo_yin_reduced_form_coincides_at_four(surfaces, test_grids):
    geo = O.get_workspace(surfaces["veronese"], test_grids["veronese"]).geo
    dev = np.abs(Q.guo_yin_integrand(geo, 4) - Q.reduced_integrand(geo)).max()
    assert dev <= 1e-12


def test_guo_yin_hypothesis_checks(surfaces, test_grids):
    with pytest.raises(HypothesisViolationError):
        Q.guo_yin_inequality(surfaces["graph_torus"], test_grids["graph_torus"], 3)
    with pytest.raises(ValueError):
        Q.guo_yin_inequality(surfaces["clifford_torus"], test_grids["clifford_torus"], 2)


def test_prop3_on_certified_surfaces(surfaces, test_grids):
    for name in ("clifford_torus", "slice_sphere", "veronese"):
        rep = Q.prop3_inequality(surfaces[name], test_grids[name])
        assert rep.holds, name
        assert abs(rep.lhs) <= 1e-6 and abs(rep.rhs) <= 1e-6, name


def test_prop3_rejects_uncertified(surfaces, test_grids):
    with pytest.raises(HypothesisViolationError):
        Q.prop3_inequality(surfaces["small_sphere"], test_grids["small_sphere"])


def test_gauss_bonnet_catalog(surfaces, test_grids):
    expected = {
        "slice_sphere": 4 * math.pi,
        "clifford_torus": 0.0,
        "veronese": 4 * math.pi,
        "small_sphere": 4 * math.pi,
        "graph_torus": 0.0,
    }
    for name, total in expected.items():
        rep = Q.gauss_bonnet(surfaces[name], test_grids[name])
        assert abs(rep.lhs - total) <= 1e-5 * (1.0 + abs(total)), name
        assert abs(rep.slack) <= rep.tolerance * (1.0 + abs(rep.rhs)), name


def test_gauss_bonnet_rejects_non_compact(surfaces, test_grids):
    with pytest.raises(CompactnessRequiredError):
        Q.gauss_bonnet(surfaces["cylinder_patch"], test_grids["cylinder_patch"])


def test_missing_chi_rejected(surfaces, test_grids):
    anonymous = dataclasses.replace(surfaces["clifford_torus"], chi=None)
    with pytest.raises(ValueError):
        Q.gauss_bonnet(anonymous, test_grids["clifford_torus"])


def test_equality_case_audit(surfaces, test_grids):
    audit = Q.equality_case_audit(surfaces["veronese"], test_grids["veronese"])
    assert audit.max_phi_n <= 1e-10
    assert audit.max_n_dot_h <= 1e-10
    assert audit.max_t_norm <= 1e-10
    assert audit.max_h <= 1e-8
    assert abs(audit.gap_integral) <= 1e-5

    audit = Q.equality_case_audit(surfaces["clifford_torus"], test_grids["clifford_torus"])
    assert abs(audit.gap_integral - 4 * math.pi**2) <= 1e-6
    assert "discrepancy" in audit.notes

    audit = Q.equality_case_audit(surfaces["slice_sphere"], test_grids["slice_sphere"])
    assert audit.max_phi_norm <= 1e-10
    assert abs(audit.gap_integral) <= 1e-10


def test_refinement_stability(surfaces):
    imm = surfaces["veronese"]
    coarse = build_grid(imm.domain, (32, 64))
    fine = build_grid(imm.domain, (64, 128))
    a = Q.main_inequality(imm, coarse, assume_stationary=True).lhs
    b = Q.main_inequality(imm, fine, assume_stationary=True).lhs
    assert abs(a - b) <= 1e-6 * (1.0 + abs(b))


def test_integrand_gauge_invariance(surfaces, test_grids):
    from sphereline.geometry import rotated_normal_gauge

    geo = O.get_workspace(surfaces["graph_torus"], test_grids["graph_torus"]).geo
    p = geo.normal_frame.shape[1]
    rot, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((p, p)))
    rotated = rotated_normal_gauge(geo, rot)
    assert np.abs(Q.main_integrand(geo) - Q.main_integrand(rotated)).max() <= 1e-8
