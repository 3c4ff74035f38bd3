"""Isometric embedding of rotationally symmetric 2-metrics as revolution surfaces.

For ``ds^2 = E dphi^2 + G dtheta^2`` the surface
``(a u cos(theta), a u sin(theta), a v)`` is isometric when
``u = sqrt(G)/a`` and ``v' = -sqrt(E/a^2 - u'^2)``.  The embedded curve is
then used for the reference mean curvature ``H0``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import EmbeddingError, GeometryError
from .geometry import (POLE_MARGIN, InducedMetric, induced_gauss_curvature,
                       induced_metric)
from .numerics import CumulativeIntegral, composite_nodes, even_pole_extrapolation

__all__ = [
    "EmbeddedCurve",
    "embed_revolution",
    "reference_mean_curvature",
    "embedded_principal_curvatures",
    "embedding_perturbation_gap",
    "radicand_ratio",
]

RADICAND_CLAMP = 1e-10


class EmbeddedCurve:
    """Generating curve ``(u, v)`` of the Euclidean image of an induced metric."""

    def __init__(self, im: InducedMetric, a: float, v0: float = 0.0):
        self.im = im
        self.a = float(a)
        self.l = im.l
        self.v0 = float(v0)

    @cached_property
    def _v(self):
        return CumulativeIntegral(lambda t: self.jet(t)[3], 0.0, self.l, panels=256)

    def _raw(self, t):
        a = self.a
        E, E1, _, G, G1, G2 = self.im.jet(t)
        sg = np.sqrt(G)
        u = sg / a
        u1 = G1 / (2 * a * sg)
        u2 = (2 * G * G2 - G1 ** 2) / (4 * a * G * sg)
        rad = E / a ** 2 - u1 ** 2
        if np.any(rad < -RADICAND_CLAMP):
            raise EmbeddingError(
                f"negative radicand {rad.min():.3e}: scale a={a:g} too small to embed")
        v1 = -np.sqrt(np.maximum(rad, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            v2 = (E1 / a ** 2 - 2 * u1 * u2) / (2 * v1)
        return np.array([u, u1, u2, v1, v2])

    def jet(self, phi) -> np.ndarray:
        """``u, u', u'', v', v''`` stacked on axis 0.

        At the poles ``u`` and ``v'`` vanish, ``u'`` is the limit
        ``+-sqrt(G''/2)/a`` and ``v''`` comes from the even extrapolation.
        """
        t = np.atleast_1d(np.asarray(phi, dtype=float))
        at_pole = (t <= 0) | (t >= self.l)
        out = np.empty((5,) + t.shape)
        if np.any(~at_pole):
            out[:, ~at_pole] = self._raw(t[~at_pole])
        if np.any(at_pole):
            tp = np.where(t[at_pole] <= 0, 0.0, self.l)
            G2 = self.im.jet(tp)[5]
            sign = np.where(tp == 0, 1.0, -1.0)
            out[0, at_pole] = 0.0
            out[1, at_pole] = sign * np.sqrt(G2 / 2) / self.a
            out[2, at_pole] = 0.0
            out[3, at_pole] = 0.0
            out[4, at_pole] = even_pole_extrapolation(
                lambda s: self._raw(s)[4], tp, self.l, POLE_MARGIN)
        return out

    def u(self, phi):
        return self.jet(phi)[0]

    def v(self, phi):
        return self.v0 + self._v(np.asarray(phi, dtype=float))

    def T(self, phi):
        return np.sqrt(self.im.jet(phi)[0]) / self.a

    @property
    def height_gap(self) -> float:
        """``v(l) - v(0)``, the total vertical extent."""
        return float(self._v.total)

    def reinduced(self, phi):
        """``(E, G)`` induced on the image by the flat metric."""
        u, u1, _, v1, _ = self.jet(phi)
        return self.a ** 2 * (u1 ** 2 + v1 ** 2), self.a ** 2 * u ** 2


def embed_revolution(im: InducedMetric, a: float | None = None, v0: float = 0.0,
                     check_nodes: int = 512) -> EmbeddedCurve:
    """Embed ``im`` in flat space as a surface of revolution.

    Checks positivity of the Gauss curvature and of the radicand on a
    Gauss-Legendre grid before returning.
    """
    a = im.a if a is None else float(a)
    t, _ = composite_nodes(0.0, im.l, check_nodes // 16, 16)
    try:
        K = induced_gauss_curvature(im, t)
    except GeometryError as exc:
        raise EmbeddingError(str(exc)) from exc
    if np.any(K <= 0):
        raise EmbeddingError("induced metric has K <= 0 somewhere; no convex embedding")
    ec = EmbeddedCurve(im, a, v0)
    ec._raw(t)  # radicand check
    return ec


def embedded_principal_curvatures(ec: EmbeddedCurve, phi):
    """Meridian and parallel curvatures of the embedded image (interior nodes)."""
    u, u1, u2, v1, v2 = ec.jet(phi)
    T = ec.T(phi)
    k_mer = (u2 * v1 - u1 * v2) / (ec.a * T ** 3)
    k_par = -v1 / (ec.a * T * u)
    return k_mer, k_par


def _raw_h0(ec: EmbeddedCurve, t):
    u, u1, u2, v1, v2 = ec._raw(t)
    if np.any(v1 == 0):
        raise EmbeddingError("v' vanishes at an interior node")
    T = np.sqrt(ec.im.jet(t)[0]) / ec.a
    a = ec.a
    return (v1 * u2 - u1 * v2) / (a * T ** 3) - v1 / (a * T * u)


def reference_mean_curvature(ec: EmbeddedCurve, a: float | None, phi,
                             margin: float = POLE_MARGIN):
    """Mean curvature ``H0`` of the embedded image in flat space."""
    if a is not None and abs(a - ec.a) > 1e-12 * ec.a:
        raise ValueError("scale does not match the embedded curve")
    t = np.atleast_1d(np.asarray(phi, dtype=float))
    H0 = even_pole_extrapolation(lambda s: _raw_h0(ec, s), t, ec.l, margin)
    return float(H0[0]) if np.ndim(phi) == 0 else H0


def embedding_perturbation_gap(im1: InducedMetric, im2: InducedMetric, a: float,
                               panels: int = 16, nodes: int = 16) -> float:
    """``sup |H0(im2) - H0(im1)|`` over interior Gauss-Legendre nodes."""
    t, _ = composite_nodes(0.0, im1.l, panels, nodes)
    h1 = reference_mean_curvature(embed_revolution(im1, a), a, t)
    h2 = reference_mean_curvature(embed_revolution(im2, a), a, t)
    return float(np.max(np.abs(h2 - h1)))


def radicand_ratio(profile, a, metric, phi):
    """``v'^2 / (phi^4 h'^2)`` for the conformal embedding; tends to 1 as ``a`` grows."""
    im = induced_metric(profile, a, metric)
    ec = EmbeddedCurve(im, a)
    v1 = ec.jet(phi)[3]
    j = profile.jet(phi)
    X = a * np.stack([j[0, 0], np.zeros_like(j[0, 0]), j[1, 0]], axis=-1)
    f = metric.conformal_factor(X)
    return v1 ** 2 / (f ** 4 * j[1, 1] ** 2)
