"""Brown-York, Hawking and ADM masses of revolution surfaces.

All theta-integrals are done analytically (factor 2 pi); the remaining
phi-integrals use the composite Gauss-Legendre rule of :mod:`.numerics`.
Units: G = c = 1, masses in units of length.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .ambient import AmbientMetric
from .embedding import embed_revolution, reference_mean_curvature
from .geometry import (conformal_factor_along, conformal_mean_curvature,
                       euclid_mean_curvature, general_mean_curvature,
                       induced_metric, meridian_frame)
from .numerics import QuadResult, QuadSpec, composite_nodes, integrate
from .profiles import Profile, reparametrize_arclength

__all__ = [
    "MassReport",
    "CSV_FIELDS",
    "mean_curvature",
    "brown_york",
    "brown_york_integral",
    "hawking",
    "adm_flux",
    "area",
    "cancellation_diagnostic",
    "mass_report",
]

CSV_FIELDS = ("a", "metric", "profile", "m_by", "m_hawking", "m_adm_flux", "area",
              "sup_H0_minus_H", "diag_cancellation", "quad_err")


def mean_curvature(p: Profile, a: float, phi, metric: AmbientMetric | None,
                   margin: float = 1e-4):
    """Mean curvature of ``S_a`` in the given ambient metric."""
    if metric is None or metric.kind == "euclidean":
        return euclid_mean_curvature(p, a, phi)
    if metric.kind == "schwarzschild":
        return conformal_mean_curvature(p, a, phi, metric)
    return general_mean_curvature(p, a, phi, metric, margin)


def brown_york_integral(p: Profile, a: float, metric: AmbientMetric,
                        quad: QuadSpec | None = None,
                        area_element: str = "induced") -> QuadResult:
    """``(1/8 pi) int (H0 - H) dsigma`` with its quadrature error estimate.

    ``area_element="euclidean"`` swaps ``dsigma`` for the flat area element,
    which only changes the result at order ``1/a``.
    """
    quad = quad or QuadSpec()
    p = p.oriented()
    im = induced_metric(p, a, metric)
    ec = embed_revolution(im, a)
    flat = induced_metric(p, a, None) if area_element == "euclidean" else im
    if area_element not in ("induced", "euclidean"):
        raise ValueError("area_element must be 'induced' or 'euclidean'")

    def integrand(t):
        H0 = reference_mean_curvature(ec, a, t, quad.pole_margin)
        H = mean_curvature(p, a, t, metric, quad.pole_margin)
        return 0.25 * (H0 - H) * flat.area_density(t)

    return integrate(integrand, (0.0, p.l), quad)


def brown_york(p: Profile, a: float, metric: AmbientMetric,
               quad: QuadSpec | None = None) -> float:
    return brown_york_integral(p, a, metric, quad).value


def area(p: Profile, a: float, metric: AmbientMetric | None,
         quad: QuadSpec | None = None) -> QuadResult:
    im = induced_metric(p.oriented(), a, metric)
    return integrate(lambda t: 2 * math.pi * im.area_density(t), (0.0, p.l), quad)


def _hawking_parts(p, a, metric, quad):
    p = p.oriented()
    im = induced_metric(p, a, metric)
    margin = (quad or QuadSpec()).pole_margin
    A = integrate(lambda t: 2 * math.pi * im.area_density(t), (0.0, p.l), quad)
    W = integrate(lambda t: 2 * math.pi * mean_curvature(p, a, t, metric, margin) ** 2
                  * im.area_density(t), (0.0, p.l), quad)
    return A, W


def hawking(p: Profile, a: float, metric: AmbientMetric | None,
            quad: QuadSpec | None = None) -> float:
    """``sqrt(A/16 pi) (1 - (1/16 pi) int H^2 dsigma)``."""
    A, W = _hawking_parts(p, a, metric, quad)
    return math.sqrt(A.value / (16 * math.pi)) * (1.0 - W.value / (16 * math.pi))


def _adm_integral(p, a, metric, quad):
    p = p.oriented()

    def integrand(t):
        X, n, T = meridian_frame(p, a, t)
        w = p.jet(t)[0, 0]
        if metric is None or metric.kind == "euclidean":
            return np.zeros_like(t)
        dg = metric.dmetric_at(X)
        flux = np.einsum("niij,nj->n", dg, n) - np.einsum("njii,nj->n", dg, n)
        # (1/16 pi) * 2 pi * flux * a^2 w T
        return flux * a * a * w * T / 8.0

    return integrate(integrand, (0.0, p.l), quad)


def adm_flux(p: Profile, a: float, metric: AmbientMetric | None,
             quad: QuadSpec | None = None) -> float:
    """``(1/16 pi) int (g_ij,i - g_ii,j) nu^j dSigma0`` over ``S_a``.

    ``nu`` and ``dSigma0`` are the flat normal and area element.
    """
    return _adm_integral(p, a, metric, quad).value


def _cancellation_integral(p, a, m, quad):
    if not p.arclength_flag:
        p = reparametrize_arclength(p)
    p = p.oriented()

    def integrand(t):
        j = p.jet(t)
        w, w1 = j[0, 0], j[0, 1]
        h1, h2 = j[1, 1], j[1, 2]
        _, f1, f2 = conformal_factor_along(p, a, m, t)
        return 2 * math.pi * a * (4 * f1 * w * w1 / h1 + 2 * f2 * w ** 2 / h1
                                  - 2 * f1 * w ** 2 * h2 / h1 ** 2)

    return integrate(integrand, (0.0, p.l), quad)


def cancellation_diagnostic(p: Profile, a: float, metric: AmbientMetric,
                            quad: QuadSpec | None = None) -> float:
    """Integral of an exact phi-derivative that must vanish.

    ``2 pi a int (4 phi' w w'/h' + 2 phi'' w^2/h' - 2 phi' w^2 h''/h'^2)``
    equals ``2 pi a [2 phi' w^2/h']`` between the poles, which is zero.
    Non-arclength profiles are reparametrised first.
    """
    if metric is None or metric.kind == "euclidean":
        return 0.0
    return _cancellation_integral(p, a, metric.m, quad).value


@dataclass
class MassReport:
    a: float
    metric: str
    profile: str
    m_by: float
    m_hawking: float
    m_adm_flux: float
    area: float
    sup_H0_minus_H: float
    diag_cancellation: float
    quad_err: float
    diagnostics: dict = field(default_factory=dict)

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_FIELDS}


def mass_report(p: Profile, a: float, metric: AmbientMetric,
                quad: QuadSpec | None = None, by_euclidean_area: bool = False) -> MassReport:
    """All three masses and the diagnostics for one surface."""
    quad = quad or QuadSpec()
    p = p.oriented()
    by = brown_york_integral(p, a, metric, quad)
    A, W = _hawking_parts(p, a, metric, quad)
    m_h = math.sqrt(A.value / (16 * math.pi)) * (1.0 - W.value / (16 * math.pi))
    adm = _adm_integral(p, a, metric, quad)
    if metric.kind == "euclidean":
        diag = QuadResult(0.0, 0.0, True, 0)
    else:
        diag = _cancellation_integral(p, a, metric.m, quad)

    t, _ = composite_nodes(0.0, p.l, quad.panels, quad.nodes_per_panel)
    ec = embed_revolution(induced_metric(p, a, metric), a)
    gap = np.abs(reference_mean_curvature(ec, a, t, quad.pole_margin)
                 - mean_curvature(p, a, t, metric, quad.pole_margin))
    diagnostics = {
        "by_quad_err": by.error_estimate,
        "area_quad_err": A.error_estimate,
        "willmore": W.value,
        "adm_quad_err": adm.error_estimate,
        "cancellation_quad_err": diag.error_estimate,
    }
    if by_euclidean_area:
        diagnostics["m_by_flat_area"] = brown_york_integral(
            p, a, metric, quad, area_element="euclidean").value
    quad_err = max(by.error_estimate, A.error_estimate, W.error_estimate,
                   adm.error_estimate, diag.error_estimate)
    return MassReport(float(a), metric.label, p.name, by.value, m_h, adm.value,
                      A.value, float(gap.max()), diag.value, quad_err, diagnostics)
