"""Fundamental forms and curvatures of revolution surfaces.

Conventions: the surface at scale ``a`` is ``X = a (w cos t, w sin t, h)``
with ``h' < 0`` in the interior, the normal points outward, and the mean
curvature is the sum of principal curvatures, so a round sphere of radius
``a`` has ``H = 2/a``.  Axisymmetry lets every pointwise quantity be
evaluated on the meridian ``theta = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import AmbientMetric, normal_derivative_phi
from .errors import GeometryError
from .numerics import even_pole_extrapolation
from .profiles import Profile

__all__ = [
    "InducedMetric",
    "CurvatureSample",
    "euclid_principal_curvatures",
    "euclid_mean_curvature",
    "euclid_gauss_curvature",
    "pole_limits",
    "conformal_factor_along",
    "conformal_mean_curvature",
    "conformal_principal_curvatures",
    "induced_metric",
    "generic_induced_metric",
    "induced_gauss_curvature",
    "general_mean_curvature",
    "sample_curvatures",
    "meridian_frame",
    "POLE_MARGIN",
    "POLE_THRESHOLD",
]

POLE_MARGIN = 1e-4
POLE_THRESHOLD = 1e-8


def _phi_array(phi):
    return np.atleast_1d(np.asarray(phi, dtype=float))


def _scalar_like(value, phi):
    return float(value[0]) if np.ndim(phi) == 0 else value


# --- Euclidean ------------------------------------------------------------

def euclid_principal_curvatures(p: Profile, a: float, phi):
    """Meridian and parallel curvatures in flat space.

    At the poles the parallel curvature ``-h'/(a w T)`` is replaced by its
    limit ``-h''/(a w' T)``.
    """
    t = _phi_array(phi)
    j = p.jet(t)
    w, w1, w2 = j[0, 0], j[0, 1], j[0, 2]
    h1, h2 = j[1, 1], j[1, 2]
    T = np.hypot(w1, h1)
    if np.any(T == 0):
        raise GeometryError("zero tangent speed")
    k_mer = (w2 * h1 - w1 * h2) / (a * T ** 3)
    pole = (t <= 0) | (t >= p.l)
    if np.any((w == 0) & ~pole):
        raise GeometryError("w vanishes away from the poles")
    with np.errstate(divide="ignore", invalid="ignore"):
        k_par = np.where(pole, -h2 / (a * w1 * T), -h1 / (a * w * T))
    if np.ndim(phi) == 0:
        return float(k_mer[0]), float(k_par[0])
    return k_mer, k_par


def euclid_mean_curvature(p: Profile, a: float, phi):
    k1, k2 = euclid_principal_curvatures(p, a, phi)
    return k1 + k2


def euclid_gauss_curvature(p: Profile, a: float, phi):
    k1, k2 = euclid_principal_curvatures(p, a, phi)
    return k1 * k2


def pole_limits(p: Profile) -> dict[str, float]:
    """Limits of ``w/h'`` at both poles, ``w'(pole)/h''(pole)`` by L'Hospital."""
    j = p.jet(np.array([0.0, p.l]))
    w1, h2 = j[0, 1], j[1, 2]
    if np.any(np.abs(h2) < POLE_THRESHOLD):
        raise GeometryError("h'' vanishes at a pole: Gauss curvature condition violated")
    return {"w_over_hprime_at_0": float(w1[0] / h2[0]),
            "w_over_hprime_at_l": float(w1[1] / h2[1])}


def meridian_frame(p: Profile, a: float, phi):
    """Point ``X``, Euclidean unit outward normal ``n`` and speed ``T`` at theta = 0."""
    t = _phi_array(phi)
    j = p.jet(t)
    w, h, w1, h1 = j[0, 0], j[1, 0], j[0, 1], j[1, 1]
    T = np.hypot(w1, h1)
    zeros = np.zeros_like(t)
    X = a * np.stack([w, zeros, h], axis=-1)
    n = np.stack([-h1, zeros, w1], axis=-1) / T[:, None]
    return X, n, T


# --- Schwarzschild (conformal) ----------------------------------------------

def conformal_factor_along(p: Profile, a: float, m: float, phi):
    """``phi_a = 1 + m/(2 a rho)`` on the surface and its first two phi-derivatives."""
    t = _phi_array(phi)
    j = p.jet(t)
    w, w1, w2 = j[0, 0], j[0, 1], j[0, 2]
    h, h1, h2 = j[1, 0], j[1, 1], j[1, 2]
    rho = np.hypot(w, h)
    rho1 = (w * w1 + h * h1) / rho
    rho2 = (w1 ** 2 + h1 ** 2 + w * w2 + h * h2) / rho - rho1 ** 2 / rho
    c = m / (2.0 * a)
    f = 1.0 + c / rho
    f1 = -c * rho1 / rho ** 2
    f2 = -c * (rho2 / rho ** 2 - 2.0 * rho1 ** 2 / rho ** 3)
    if np.ndim(phi) == 0:
        return float(f[0]), float(f1[0]), float(f2[0])
    return f, f1, f2


def _n_phi(p, a, metric, t):
    X, n, _ = meridian_frame(p, a, t)
    return normal_derivative_phi(metric, X, n), metric.conformal_factor(X)


def conformal_mean_curvature(p: Profile, a: float, phi, metric: AmbientMetric):
    """``H = phi^-2 (Hbar + 4 phi^-1 n(phi))`` for a conformally flat metric."""
    if metric.kind == "perturbed":
        raise GeometryError("conformal formula needs an unperturbed metric")
    t = _phi_array(phi)
    nphi, f = _n_phi(p, a, metric, t)
    H = f ** -2 * (euclid_mean_curvature(p, a, t) + 4.0 * nphi / f)
    return _scalar_like(H, phi)


def conformal_principal_curvatures(p: Profile, a: float, phi, metric: AmbientMetric):
    """``lambda_i = phi^-2 lambdabar_i + 2 phi^-3 n(phi)``."""
    t = _phi_array(phi)
    nphi, f = _n_phi(p, a, metric, t)
    k1, k2 = euclid_principal_curvatures(p, a, t)
    shift = 2.0 * nphi / f ** 3
    return k1 / f ** 2 + shift, k2 / f ** 2 + shift


# --- induced metrics ----------------------------------------------------------

@dataclass(frozen=True)
class InducedMetric:
    """Rotationally symmetric 2-metric ``E dphi^2 + G dtheta^2`` on ``[0, l]``.

    ``jet_fn(phi)`` returns ``(E, E', E'', G, G', G'')`` stacked on axis 0.
    """

    jet_fn: Callable[[np.ndarray], np.ndarray]
    l: float
    a: float
    source: str

    def jet(self, phi) -> np.ndarray:
        return np.asarray(self.jet_fn(_phi_array(phi)), dtype=float)

    def E(self, phi):
        return _scalar_like(self.jet(phi)[0], phi)

    def G(self, phi):
        return _scalar_like(self.jet(phi)[3], phi)

    def area_density(self, phi):
        """``sqrt(E G)``; the area element is ``area_density dphi dtheta``."""
        j = self.jet(phi)
        return _scalar_like(np.sqrt(j[0] * j[3]), phi)


def _scaled_product(f, f1, f2, s, s1, s2, scale):
    """Value and two derivatives of ``scale * f^4 * s``."""
    f4 = f ** 4
    return (scale * f4 * s,
            scale * (4 * f ** 3 * f1 * s + f4 * s1),
            scale * (12 * f ** 2 * f1 ** 2 * s + 4 * f ** 3 * f2 * s
                     + 8 * f ** 3 * f1 * s1 + f4 * s2))


def _conformal_induced(p: Profile, a: float, m: float, source: str) -> InducedMetric:
    def jet(t):
        j = p.jet(t)
        w, w1, w2, w3 = j[0]
        _, h1, h2, h3 = j[1]
        T2 = w1 ** 2 + h1 ** 2
        T2_1 = 2 * (w1 * w2 + h1 * h2)
        T2_2 = 2 * (w2 ** 2 + h2 ** 2 + w1 * w3 + h1 * h3)
        W2 = w ** 2
        W2_1 = 2 * w * w1
        W2_2 = 2 * (w1 ** 2 + w * w2)
        if m == 0:
            f, f1, f2 = np.ones_like(t), np.zeros_like(t), np.zeros_like(t)
        else:
            f, f1, f2 = conformal_factor_along(p, a, m, t)
        E = _scaled_product(f, f1, f2, T2, T2_1, T2_2, a * a)
        G = _scaled_product(f, f1, f2, W2, W2_1, W2_2, a * a)
        return np.array(E + G)

    return InducedMetric(jet, p.l, a, source)


def _bilinear_jet(g, dg, d2g, X1, X2, V, V1, V2, W, W1, W2):
    """``Q = g(V, W)`` along a curve with velocity X1, acceleration X2."""
    Q = np.einsum("nij,ni,nj->n", g, V, W)
    dgX = np.einsum("nkij,nk->nij", dg, X1)
    Q1 = (np.einsum("nij,ni,nj->n", dgX, V, W)
          + np.einsum("nij,ni,nj->n", g, V1, W)
          + np.einsum("nij,ni,nj->n", g, V, W1))
    Q2 = (np.einsum("nlkij,nl,nk,ni,nj->n", d2g, X1, X1, V, W)
          + np.einsum("nkij,nk,ni,nj->n", dg, X2, V, W)
          + 2 * np.einsum("nij,ni,nj->n", dgX, V1, W)
          + 2 * np.einsum("nij,ni,nj->n", dgX, V, W1)
          + np.einsum("nij,ni,nj->n", g, V2, W)
          + 2 * np.einsum("nij,ni,nj->n", g, V1, W1)
          + np.einsum("nij,ni,nj->n", g, V, W2))
    return Q, Q1, Q2


def _meridian_derivatives(p: Profile, a: float, t):
    j = p.jet(t)
    z = np.zeros_like(t)
    w = j[0]
    h = j[1]
    Xd = [a * np.stack([w[k], z, h[k]], axis=-1) for k in range(4)]
    Td = [a * np.stack([z, w[k], z], axis=-1) for k in range(3)]
    return Xd, Td


def generic_induced_metric(p: Profile, a: float, metric: AmbientMetric,
                           check_orthogonal: bool = True) -> InducedMetric:
    """Induced metric from the full ambient tensor and its derivatives.

    ``E = g(X_phi, X_phi)`` and ``G = g(X_theta, X_theta)`` differentiated
    along the meridian.  Raises if ``g(X_phi, X_theta)`` does not vanish,
    since the embedding step only handles diagonal metrics.
    """
    def jet(t):
        Xd, Td = _meridian_derivatives(p, a, t)
        X = Xd[0]
        g = metric.metric_at(X)
        dg = metric.dmetric_at(X)
        d2g = metric.d2metric_at(X)
        if check_orthogonal:
            F = np.einsum("nij,ni,nj->n", g, Xd[1], Td[0])
            scale = np.sqrt(np.abs(np.einsum("nij,ni,nj->n", g, Xd[1], Xd[1])
                                   * np.einsum("nij,ni,nj->n", g, Td[0], Td[0])))
            if np.any(np.abs(F) > 1e-10 * scale + 1e-300):
                raise GeometryError("induced metric is not diagonal in (phi, theta)")
        E = _bilinear_jet(g, dg, d2g, Xd[1], Xd[2], Xd[1], Xd[2], Xd[3], Xd[1], Xd[2], Xd[3])
        G = _bilinear_jet(g, dg, d2g, Xd[1], Xd[2], Td[0], Td[1], Td[2], Td[0], Td[1], Td[2])
        return np.array(E + G)

    return InducedMetric(jet, p.l, a, metric.kind)


def induced_metric(p: Profile, a: float, metric: AmbientMetric | None = None) -> InducedMetric:
    """Induced metric of ``S_a``; closed form for flat and Schwarzschild ambients."""
    if metric is None or metric.kind == "euclidean":
        return _conformal_induced(p, a, 0.0, "euclidean")
    if metric.kind == "schwarzschild":
        return _conformal_induced(p, a, metric.m, "conformal")
    return generic_induced_metric(p, a, metric)


def _raw_gauss(im: InducedMetric, t):
    E, E1, _, G, G1, G2 = im.jet(t)
    EG = E * G
    if np.any(EG <= 0):
        raise GeometryError("induced metric degenerate (EG <= 0)")
    return -G2 / (2 * EG) + G1 * (E1 * G + E * G1) / (4 * EG ** 2)


def induced_gauss_curvature(im: InducedMetric, phi, margin: float = POLE_MARGIN):
    """Gauss curvature ``-(1/(2 sqrt(EG))) (G'/sqrt(EG))'`` of a diagonal metric.

    The formula is 0/0 at the poles; within ``margin * l`` of a pole the
    even extrapolation is used instead.
    """
    t = _phi_array(phi)
    K = even_pole_extrapolation(lambda s: _raw_gauss(im, s), t, im.l, margin)
    return _scalar_like(K, phi)


# --- general ambient metric -----------------------------------------------------

def _raw_general_mean_curvature(p: Profile, a: float, metric: AmbientMetric, t):
    Xd, Td = _meridian_derivatives(p, a, t)
    X, Xp, Xpp = Xd[0], Xd[1], Xd[2]
    Xt, Xpt = Td[0], Td[1]
    # X_theta,theta at theta = 0
    Xtt = -np.stack([X[:, 0], np.zeros_like(t), np.zeros_like(t)], axis=-1)
    g = metric.metric_at(X)
    gam = metric.christoffel_at(X)
    ginv = np.linalg.inv(g)
    # Euclidean outward normal covector (-h', 0, w')
    N = np.stack([-Xp[:, 2], np.zeros_like(t), Xp[:, 0]], axis=-1) / a
    norm = np.sqrt(np.einsum("nij,ni,nj->n", ginv, N, N))
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise GeometryError("normal construction failed")

    def second_form(U, V, UV):
        acc = UV + np.einsum("nkij,ni,nj->nk", gam, U, V)
        return -np.einsum("nk,nk->n", N, acc) / norm

    A11 = second_form(Xp, Xp, Xpp)
    A12 = second_form(Xp, Xt, Xpt)
    A22 = second_form(Xt, Xt, Xtt)
    g11 = np.einsum("nij,ni,nj->n", g, Xp, Xp)
    g12 = np.einsum("nij,ni,nj->n", g, Xp, Xt)
    g22 = np.einsum("nij,ni,nj->n", g, Xt, Xt)
    det = g11 * g22 - g12 ** 2
    if np.any(det <= 0):
        raise GeometryError("degenerate induced metric")
    return (g22 * A11 - 2 * g12 * A12 + g11 * A22) / det


def general_mean_curvature(p: Profile, a: float, phi, metric: AmbientMetric,
                           margin: float = POLE_MARGIN):
    """Mean curvature of ``S_a`` in an arbitrary ambient metric.

    Builds the metric-unit outward normal from the Euclidean normal
    covector, the second fundamental form
    ``A_ab = -g(D_a X_b, nu)`` with ``D_a X_b = X_ab + Gamma(X_a, X_b)``,
    and traces it with the inverse induced metric.
    """
    t = _phi_array(phi)
    H = even_pole_extrapolation(
        lambda s: _raw_general_mean_curvature(p, a, metric, s), t, p.l, margin)
    return _scalar_like(H, phi)


# --- samples -----------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureSample:
    phi: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    H: np.ndarray
    K: np.ndarray


def sample_curvatures(p: Profile, a: float, phi, metric: AmbientMetric | None = None):
    """Principal, mean and (intrinsic) Gauss curvatures at the given nodes.

    Principal curvatures are available for flat and conformally flat
    ambients; ``K`` is always the intrinsic curvature of the induced metric.
    """
    t = _phi_array(phi)
    if metric is None or metric.kind == "euclidean":
        k1, k2 = euclid_principal_curvatures(p, a, t)
        return CurvatureSample(t, k1, k2, k1 + k2, k1 * k2)
    if metric.kind != "schwarzschild":
        raise GeometryError("principal curvatures need a conformally flat metric")
    k1, k2 = conformal_principal_curvatures(p, a, t, metric)
    K = induced_gauss_curvature(induced_metric(p, a, metric), t)
    return CurvatureSample(t, k1, k2, k1 + k2, K)
