"""Closed-form chart components with exact derivatives of any order.

Every catalog surface is built from coordinate functions of the separable form

    sum_k  c_k * f_k(u) * g_k(v)

where each univariate factor is either cos(a*s + q*pi/2 + r) or s**d.  The
quarter-turn count q is an exact integer, so differentiation (which shifts
the phase by pi/2) and product-to-sum expansion never introduce floating
phase constants; this keeps evaluated values relatively accurate even where
they are small, which downstream curvature formulas rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

COS = "cos"
POW = "pow"


@dataclass(frozen=True)
class Factor:
    """cos(a*s + quarter*pi/2 + rest) for kind "cos", s**a for kind "pow"."""

    kind: str
    a: float
    quarter: int = 0
    rest: float = 0.0

    def eval(self, s: np.ndarray) -> np.ndarray:
        if self.kind == POW:
            d = int(self.a)
            if d == 0:
                return np.ones_like(s)
            return s**d
        base = self.a * s if self.rest == 0.0 else self.a * s + self.rest
        q = self.quarter % 4
        if q == 0:
            return np.cos(base)
        if q == 1:
            return -np.sin(base)
        if q == 2:
            return -np.cos(base)
        return np.sin(base)

    def derivative(self) -> tuple[float, "Factor"]:
        """Return (scale, factor) with d/ds self = scale * factor."""
        if self.kind == COS:
            return self.a, Factor(COS, self.a, self.quarter + 1, self.rest)
        d = int(self.a)
        if d == 0:
            return 0.0, Factor(POW, 0)
        return float(d), Factor(POW, d - 1)


def cos_f(a: float) -> Factor:
    return Factor(COS, a, 0)


def sin_f(a: float) -> Factor:
    return Factor(COS, a, -1)  # sin(x) = cos(x - pi/2)


def one_f() -> Factor:
    return Factor(POW, 0)


def lin_f() -> Factor:
    return Factor(POW, 1)


@dataclass(frozen=True)
class SeparableExpr:
    """Finite sum of separable terms c * f(u) * g(v)."""

    terms: tuple[tuple[float, Factor, Factor], ...]

    def eval(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        dtype = np.result_type(np.asarray(u).dtype, np.asarray(v).dtype, np.float64)
        out = np.zeros(np.broadcast(u, v).shape, dtype=dtype)
        for c, fu, fv in self.terms:
            if c != 0.0:
                out += c * fu.eval(u) * fv.eval(v)
        return out

    def derivative(self, axis: int) -> "SeparableExpr":
        new_terms = []
        for c, fu, fv in self.terms:
            if axis == 0:
                s, fu2 = fu.derivative()
                term = (c * s, fu2, fv)
            else:
                s, fv2 = fv.derivative()
                term = (c * s, fu, fv2)
            if term[0] != 0.0:
                new_terms.append(term)
        return SeparableExpr(tuple(new_terms))


def const_expr(c: float) -> SeparableExpr:
    return SeparableExpr(((c, one_f(), one_f()),))


def product_expr(c: float, fu: Factor, fv: Factor) -> SeparableExpr:
    return SeparableExpr(((c, fu, fv),))


def sum_expr(*terms: tuple[float, Factor, Factor]) -> SeparableExpr:
    return SeparableExpr(tuple((float(c), fu, fv) for c, fu, fv in terms))


def add_exprs(*exprs: SeparableExpr) -> SeparableExpr:
    terms: list = []
    for e in exprs:
        terms.extend(e.terms)
    return SeparableExpr(tuple(terms))


# ---------------------------------------------------------------------------
# Symbolic products
# ---------------------------------------------------------------------------


def _factor_products(f: Factor, g: Factor) -> list[tuple[float, Factor]]:
    """Expand f*g back into the family (product-to-sum for cosines)."""
    if f.kind == POW and g.kind == POW:
        return [(1.0, Factor(POW, int(f.a) + int(g.a)))]
    if f.kind == POW and g.kind == COS:
        f, g = g, f
    if f.kind == COS and g.kind == POW:
        if int(g.a) == 0:
            return [(1.0, f)]
        raise ValueError("mixed cos*poly factors are not closed under product")
    # cos(A1) cos(A2) = 1/2 cos(A1+A2) + 1/2 cos(A1-A2)
    return [
        (0.5, Factor(COS, f.a + g.a, f.quarter + g.quarter, f.rest + g.rest)),
        (0.5, Factor(COS, f.a - g.a, f.quarter - g.quarter, f.rest - g.rest)),
    ]


def _canonical(factor: Factor) -> tuple[float, Factor]:
    """Normalize so equal factors merge exactly.

    Frequency is made nonnegative, the quarter count folds modulo 4 with a
    sign, and a zero-frequency cosine folds into the coefficient.
    """
    if factor.kind == POW:
        return 1.0, Factor(POW, int(factor.a))
    a, q, r = factor.a, factor.quarter, factor.rest
    if a < 0.0:
        a, q, r = -a, -q, -r
    if a == 0.0:
        if r == 0.0:
            return (1.0, 0.0, -1.0, 0.0)[q % 4], Factor(POW, 0)
        return math.cos(q % 4 * math.pi / 2 + r), Factor(POW, 0)
    q = q % 4
    sign = 1.0
    if q >= 2:
        q -= 2
        sign = -1.0
    return sign, Factor(COS, a, q, r)


def multiply_exprs(e1: SeparableExpr, e2: SeparableExpr) -> SeparableExpr:
    """Product of two separable expressions, consolidated term-by-term."""
    bucket: dict[tuple, list] = {}
    for c1, fu1, fv1 in e1.terms:
        for c2, fu2, fv2 in e2.terms:
            for su, fu in _factor_products(fu1, fu2):
                for sv, fv in _factor_products(fv1, fv2):
                    cu, fu_c = _canonical(fu)
                    cv, fv_c = _canonical(fv)
                    coef = c1 * c2 * su * sv * cu * cv
                    key = (
                        fu_c.kind, round(fu_c.a, 12), fu_c.quarter, round(fu_c.rest, 12),
                        fv_c.kind, round(fv_c.a, 12), fv_c.quarter, round(fv_c.rest, 12),
                    )
                    if key in bucket:
                        bucket[key][0] += coef
                    else:
                        bucket[key] = [coef, fu_c, fv_c]
    terms = []
    for key in sorted(bucket):
        coef, fu_c, fv_c = bucket[key]
        if coef != 0.0:
            terms.append((coef, fu_c, fv_c))
    return SeparableExpr(tuple(terms))


class SeparableChart:
    """Vector-valued map with components given by SeparableExpr.

    Provides exact jets: ``jet(points, order)`` returns arrays indexed by
    derivative order, each symmetric in its parameter indices by construction.
    """

    def __init__(self, components: list[SeparableExpr]):
        self.components = list(components)
        self.ambient_dim = len(components)

    @lru_cache(maxsize=None)
    def _derived(self, ku: int, kv: int) -> tuple[SeparableExpr, ...]:
        if ku == 0 and kv == 0:
            return tuple(self.components)
        if ku > 0:
            prev = self._derived(ku - 1, kv)
            return tuple(e.derivative(0) for e in prev)
        prev = self._derived(ku, kv - 1)
        return tuple(e.derivative(1) for e in prev)

    def _eval_multi(self, points: np.ndarray, ku: int, kv: int) -> np.ndarray:
        u = points[..., 0]
        v = points[..., 1]
        comps = self._derived(ku, kv)
        out = np.empty(points.shape[:-1] + (self.ambient_dim,))
        for c, expr in enumerate(comps):
            out[..., c] = expr.eval(u, v)
        return out

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._eval_multi(points, 0, 0)

    def jet(self, points: np.ndarray, order: int) -> dict[int, np.ndarray]:
        """Exact derivative tensors up to ``order``.

        jets[k] has shape points.shape[:-1] + (2,)*k + (d,), symmetric in the
        k parameter indices.
        """
        pts = np.asarray(points, dtype=float)
        base = pts.shape[:-1]
        d = self.ambient_dim
        jets: dict[int, np.ndarray] = {0: self._eval_multi(pts, 0, 0)}
        for k in range(1, order + 1):
            arr = np.empty(base + (2,) * k + (d,))
            for idx in np.ndindex(*([2] * k)):
                ku = k - sum(idx)
                kv = sum(idx)
                arr[(Ellipsis, *idx, slice(None))] = self._eval_multi(pts, ku, kv)
            jets[k] = arr
        return jets

    @lru_cache(maxsize=None)
    def metric_expr(self, i: int, j: int) -> SeparableExpr:
        """Symbolic first-fundamental-form entry g_ij, consolidated.

        The product-to-sum consolidation means chart identities (such as a
        round metric's constant entries) hold at the coefficient level, so
        metric derivatives evaluate without cancellation noise.
        """
        di = (1, 0) if i == 0 else (0, 1)
        dj = (1, 0) if j == 0 else (0, 1)
        xi = self._derived(*di)
        xj = self._derived(*dj)
        products = [multiply_exprs(a, b) for a, b in zip(xi, xj)]
        return multiply_exprs(add_exprs(*products), const_expr(1.0))
