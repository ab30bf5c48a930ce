"""Parameter-domain discretization and integration against the area element.

Periodic axes use the trapezoidal rule on equispaced half-open nodes, which is
spectrally accurate for the analytic integrands in the catalog.  Non-periodic
axes use Gauss-Legendre nodes, which stay strictly inside the interval so
chart degeneracies on the boundary (polar axes) are never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImmersionError

MIN_RESOLUTION = 4


@dataclass(frozen=True)
class ParameterDomain:
    """Rectangular parameter domain with per-axis periodicity."""

    intervals: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        if len(self.intervals) != len(self.periodic):
            raise ValueError("intervals and periodicity flags must align")
        for lo, hi in self.intervals:
            if not hi > lo:
                raise ValueError(f"interval ({lo}, {hi}) has non-positive length")

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def extents(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.intervals)

    def volume(self) -> float:
        out = 1.0
        for e in self.extents:
            out *= e
        return out

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """Map periodic coordinates back into their base interval."""
        pts = np.array(points, dtype=float)
        for ax, ((lo, hi), per) in enumerate(zip(self.intervals, self.periodic)):
            if per:
                pts[..., ax] = lo + np.mod(pts[..., ax] - lo, hi - lo)
        return pts


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product quadrature nodes and weights in canonical order.

    Node (i0, i1, ...) maps to flat index with the first axis slowest
    (C order); all reductions over nodes use this fixed order.
    """

    domain: ParameterDomain
    resolution: tuple[int, ...]
    axis_nodes: tuple[np.ndarray, ...]
    axis_weights: tuple[np.ndarray, ...]
    nodes: np.ndarray  # (N, m)
    weights: np.ndarray  # (N,)

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    def reshape(self, samples: np.ndarray) -> np.ndarray:
        """View flat per-node samples as the (n0, n1, ..., extra) tensor."""
        samples = np.asarray(samples)
        return samples.reshape(self.resolution + samples.shape[1:])


def _axis_rule(lo: float, hi: float, periodic: bool, n: int):
    if periodic:
        step = (hi - lo) / n
        nodes = lo + step * np.arange(n)
        weights = np.full(n, step)
    else:
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = 0.5 * (hi - lo) * (x + 1.0) + lo
        weights = 0.5 * (hi - lo) * w
    return nodes, weights


def build_grid(domain: ParameterDomain, resolution) -> QuadratureGrid:
    """Build a tensor-product grid with the per-axis rules described above."""
    if isinstance(resolution, int):
        resolution = (resolution,) * domain.dim
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != domain.dim:
        raise ValueError("resolution must give one entry per axis")
    for r in resolution:
        if r < MIN_RESOLUTION:
            raise ValueError(f"resolution {r} below minimum {MIN_RESOLUTION}")

    axis_nodes = []
    axis_weights = []
    for (lo, hi), per, n in zip(domain.intervals, domain.periodic, resolution):
        nodes, weights = _axis_rule(lo, hi, per, n)
        axis_nodes.append(nodes)
        axis_weights.append(weights)

    mesh = np.meshgrid(*axis_nodes, indexing="ij")
    nodes = np.stack([mm.reshape(-1) for mm in mesh], axis=-1)
    wmesh = np.meshgrid(*axis_weights, indexing="ij")
    weights = np.ones(nodes.shape[0])
    for wm in wmesh:
        weights = weights * wm.reshape(-1)

    return QuadratureGrid(
        domain=domain,
        resolution=resolution,
        axis_nodes=tuple(axis_nodes),
        axis_weights=tuple(axis_weights),
        nodes=nodes,
        weights=weights,
    )


def integrate(grid: QuadratureGrid, samples: np.ndarray, density: np.ndarray) -> float:
    """Integrate per-node samples against the area density sqrt(det g).

    The reduction is a pairwise sum over the grid's canonical node order,
    which makes results independent of how samples were produced.
    """
    samples = np.asarray(samples, dtype=float)
    density = np.asarray(density, dtype=float)
    if samples.shape != (grid.node_count,):
        raise ValueError("sample array length does not match node count")
    if density.shape != (grid.node_count,):
        raise ValueError("density array length does not match node count")
    if not np.all(density > 0.0):
        raise DegenerateImmersionError("area density must be positive at every node")
    return float(np.sum(grid.weights * samples * density))
