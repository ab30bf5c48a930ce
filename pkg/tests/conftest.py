"""Shared fixtures: catalog surfaces and grids built once per session.

Operator workspaces cache per (immersion, grid) object identity, so sharing
these fixtures keeps the suite fast.
"""

import math

import numpy as np
import pytest

from sphereline import immersion as imm_mod
from sphereline.quadrature import build_grid


@pytest.fixture(scope="session")
def surfaces():
    return {
        "slice_sphere": imm_mod.slice_sphere(),
        "clifford_torus": imm_mod.clifford_torus(),
        "veronese": imm_mod.veronese(),
        "small_sphere": imm_mod.small_sphere(math.pi / 4),
        "graph_torus": imm_mod.graph_torus(0.3),
        "graph_torus_02": imm_mod.graph_torus(0.2),
        "cylinder_patch": imm_mod.cylinder_patch(math.pi / 3),
    }


@pytest.fixture(scope="session")
def default_grids(surfaces):
    return {
        name: build_grid(s.domain, s.default_resolution)
        for name, s in surfaces.items()
    }


@pytest.fixture(scope="session")
def test_grids(surfaces):
    """Smaller grids for unit tests; spectral quadrature keeps them accurate."""
    resolutions = {
        "slice_sphere": (48, 96),
        "clifford_torus": (64, 64),
        "veronese": (48, 96),
        "small_sphere": (48, 96),
        "graph_torus": (96, 96),
        "graph_torus_02": (96, 96),
        "cylinder_patch": (32, 8),
    }
    return {
        name: build_grid(s.domain, resolutions[name])
        for name, s in surfaces.items()
    }


def interior_points(imm, count, rng, margin=0.02):
    lo = np.array([iv[0] for iv in imm.domain.intervals])
    hi = np.array([iv[1] for iv in imm.domain.intervals])
    return lo + (hi - lo) * (margin + (1 - 2 * margin) * rng.random((count, 2)))
