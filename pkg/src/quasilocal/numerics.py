"""Quadrature, convergence-order fits and derivative checks.

Everything here is stateless.  Integrals use composite Gauss-Legendre rules
whose nodes never touch the interval endpoints, which is what the pole
handling elsewhere in the package relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

__all__ = [
    "QuadSpec",
    "QuadResult",
    "OrderFit",
    "gauss_legendre",
    "composite_nodes",
    "integrate",
    "fit_order",
    "check_derivatives",
    "even_pole_extrapolation",
    "CumulativeIntegral",
]

MAX_DOUBLINGS = 8


@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre settings.

    ``tol`` is applied to the panel-doubling difference relative to
    ``max(1, |value|)``, so that large areas do not fail on roundoff alone.
    ``pole_margin`` is the fraction of the parameter interval next to each
    pole in which raw curvature formulas are replaced by their even
    extrapolation.
    """

    scheme: str = "gauss_legendre_composite"
    panels: int = 16
    nodes_per_panel: int = 16
    tol: float = 1e-10
    pole_margin: float = 1e-4

    def __post_init__(self):
        if self.scheme != "gauss_legendre_composite":
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.panels < 1:
            raise ValueError("panels must be positive")
        if not 4 <= self.nodes_per_panel <= 64:
            raise ValueError("nodes_per_panel must lie in [4, 64]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 <= self.pole_margin < 0.25:
            raise ValueError("pole_margin must lie in [0, 0.25)")

    def doubled(self) -> "QuadSpec":
        return replace(self, panels=2 * self.panels)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    converged: bool
    panels: int


@dataclass(frozen=True)
class OrderFit:
    """Least-squares power law ``error ~ constant * a**order``."""

    pairs: tuple[tuple[float, float], ...]
    fitted_order: float
    fitted_constant: float
    r_squared: float
    residuals: tuple[float, ...] = field(default=(), repr=False)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(lo: float, hi: float, panels: int, n: int):
    """Flattened nodes and weights of the composite rule on ``[lo, hi]``."""
    x, w = gauss_legendre(n)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _apply_rule(f, lo, hi, panels, n):
    nodes, weights = composite_nodes(lo, hi, panels, n)
    values = np.asarray(f(nodes), dtype=float)
    if values.shape != nodes.shape:
        values = np.broadcast_to(values, nodes.shape)
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values)]
        raise QuadratureError(f"non-finite integrand at {bad[:3]}")
    # fsum: correctly rounded, independent of evaluation order
    return math.fsum(weights * values)


def integrate(f: Callable[[np.ndarray], np.ndarray],
              interval: tuple[float, float],
              spec: QuadSpec | None = None) -> QuadResult:
    """Integrate a vectorised ``f`` over ``interval``.

    The panel count is doubled until two successive values agree to
    ``spec.tol`` (relative to ``max(1, |value|)``), at most
    ``MAX_DOUBLINGS`` times.
    """
    spec = spec or QuadSpec()
    lo, hi = map(float, interval)
    n = spec.nodes_per_panel
    panels = spec.panels
    previous = _apply_rule(f, lo, hi, panels, n)
    for _ in range(MAX_DOUBLINGS):
        panels *= 2
        current = _apply_rule(f, lo, hi, panels, n)
        err = abs(current - previous)
        if err <= spec.tol * max(1.0, abs(current)):
            return QuadResult(current, err, True, panels)
        previous = current
    raise QuadratureError(
        f"no convergence after {MAX_DOUBLINGS} doublings "
        f"(last difference {err:.3e}, value {current:.6e})")


def fit_order(pairs: Sequence[tuple[float, float]]) -> OrderFit:
    """Fit ``log(error) = order * log(a) + log(constant)``."""
    pairs = tuple((float(a), float(e)) for a, e in pairs)
    if len(pairs) < 3:
        raise ValueError("fit_order needs at least 3 (a, error) pairs")
    a = np.array([p[0] for p in pairs])
    e = np.array([p[1] for p in pairs])
    if np.any(a <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("scales and errors must be positive and finite")
    la, le = np.log(a), np.log(e)
    slope, intercept = np.polyfit(la, le, 1)
    resid = le - (slope * la + intercept)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return OrderFit(pairs, float(slope), float(np.exp(intercept)), r2,
                    tuple(float(r) for r in resid))


def check_derivatives(f, fprime, domain: tuple[float, float],
                      samples: Sequence[float] | np.ndarray) -> float:
    """Largest relative gap between ``fprime`` and a central difference of ``f``."""
    lo, hi = domain
    step = 1e-6 * (hi - lo)
    x = np.asarray(samples, dtype=float)
    fd = (np.asarray(f(x + step)) - np.asarray(f(x - step))) / (2 * step)
    exact = np.asarray(fprime(x))
    return float(np.max(np.abs(exact - fd) / (np.abs(exact) + 1e-14)))


def even_pole_extrapolation(func, phi: np.ndarray, length: float,
                            margin: float) -> np.ndarray:
    """Evaluate ``func`` with its even Taylor extension near both poles.

    Inside ``margin * length`` of a pole the value is ``f0 + c * d**2``
    (``d`` the distance to the pole), fitted through ``func`` at distances
    ``eps`` and ``2 eps``.  Quantities such as mean and Gauss curvature are
    even about the poles, so this is accurate to ``O(eps**4)``.
    """
    phi = np.asarray(phi, dtype=float)
    eps = margin * length
    out = np.empty_like(phi)
    near0 = phi < eps
    nearl = phi > length - eps
    mid = ~(near0 | nearl)
    if np.any(mid):
        out[mid] = func(phi[mid])
    for mask, pole, sign in ((near0, 0.0, 1.0), (nearl, length, -1.0)):
        if not np.any(mask):
            continue
        f1, f2 = func(np.array([pole + sign * eps, pole + 2 * sign * eps]))
        f0 = (4.0 * f1 - f2) / 3.0
        d = np.abs(phi[mask] - pole)
        out[mask] = f0 + (f1 - f0) * (d / eps) ** 2
    return out


class CumulativeIntegral:
    """``F(x) = integral of f from lo to x``, exact to roundoff for smooth ``f``.

    A table of panel integrals is built once; each evaluation adds one
    Gauss-Legendre rule over the partial panel.
    """

    def __init__(self, f, lo: float, hi: float, panels: int = 1024, nodes: int = 16):
        self.f = f
        self.lo, self.hi = float(lo), float(hi)
        self.nodes = nodes
        self.edges = np.linspace(self.lo, self.hi, panels + 1)
        x, w = composite_nodes(self.lo, self.hi, panels, nodes)
        pieces = (w * np.asarray(f(x), dtype=float)).reshape(panels, nodes).sum(axis=1)
        self.table = np.concatenate([[0.0], np.cumsum(pieces)])
        self.total = float(self.table[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        panels = len(self.edges) - 1
        j = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, panels - 1)
        start = self.edges[j]
        gx, gw = gauss_legendre(self.nodes)
        half = 0.5 * (x - start)
        pts = start[..., None] + half[..., None] * (gx + 1.0)
        return self.table[j] + half * np.sum(gw * np.asarray(self.f(pts)), axis=-1)
