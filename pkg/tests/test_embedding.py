import math

import numpy as np
import pytest

from quasilocal import (EmbeddingError, PRESETS, build_metric, composite_nodes,
                        conformal_mean_curvature, embed_revolution,
                        embedding_perturbation_gap, euclid_mean_curvature, fit_order,
                        induced_gauss_curvature, induced_metric, make_builtin,
                        perturbation_preset, reference_mean_curvature,
                        reparametrize_arclength)
from quasilocal.embedding import embedded_principal_curvatures, radicand_ratio
from quasilocal.geometry import InducedMetric, conformal_factor_along


def _suite():
    """Every embeddable induced metric exercised by the round-trip checks."""
    sphere, ell = make_builtin("sphere"), make_builtin("ellipsoid_112")
    flat, schw = build_metric("euclidean"), build_metric("schwarzschild", 1.0)
    cases = []
    for p in (sphere, ell, reparametrize_arclength(ell), make_builtin("custom", [2.0, 0.7])):
        for a in (10.0, 100.0, 1000.0):
            cases.append((f"{p.name}-flat-{a:g}", induced_metric(p, a, flat)))
            cases.append((f"{p.name}-schw-{a:g}", induced_metric(p, a, schw)))
    for name in PRESETS:
        g = build_metric("perturbed", 1.0, perturbation_preset(name, 1.0))
        for a in (25.0, 100.0):
            cases.append((f"ellipsoid-{name}-{a:g}", induced_metric(ell, a, g)))
    return cases


SUITE = _suite()


@pytest.mark.parametrize("label,im", SUITE, ids=[c[0] for c in SUITE])
def test_round_trip_isometry(label, im):
    t, _ = composite_nodes(0.0, im.l, 16, 16)
    ec = embed_revolution(im, im.a)
    E2, G2 = ec.reinduced(t)
    assert np.max(np.abs(E2 / im.E(t) - 1)) < 1e-8
    assert np.max(np.abs(G2 / im.G(t) - 1)) < 1e-8


@pytest.mark.parametrize("label,im", SUITE, ids=[c[0] for c in SUITE])
def test_theorema_egregium(label, im):
    t, _ = composite_nodes(0.0, im.l, 8, 16)
    ec = embed_revolution(im, im.a)
    k1, k2 = embedded_principal_curvatures(ec, t)
    K = induced_gauss_curvature(im, t)
    assert np.max(np.abs(k1 * k2 / K - 1)) < 1e-6


@pytest.mark.parametrize("label,im", SUITE[:8], ids=[c[0] for c in SUITE[:8]])
def test_curve_invariants(label, im):
    ec = embed_revolution(im, im.a)
    ends = ec.jet(np.array([0.0, im.l]))
    assert np.all(ends[0] == 0) and np.all(ends[3] == 0)
    v = ec.v(np.linspace(0, im.l, 200))
    assert np.all(np.diff(v) < 0)


def test_identity_embedding_recovers_profile(ellipsoid):
    a = 4.0
    ec = embed_revolution(induced_metric(ellipsoid, a, None), a)
    t = np.linspace(0, math.pi, 41)
    assert np.allclose(ec.u(t), ellipsoid.w(t), atol=1e-13)
    assert np.allclose(ec.v(t), ellipsoid.h(t) - ellipsoid.h(0.0), atol=1e-12)
    nodes, _ = composite_nodes(0.0, math.pi, 4, 16)
    assert np.allclose(reference_mean_curvature(ec, a, nodes),
                       euclid_mean_curvature(ellipsoid, a, nodes), rtol=1e-10)


@pytest.mark.parametrize("a", [10.0, 100.0, 1000.0])
def test_conformal_sphere_embeds_as_round_sphere(sphere, schw, a):
    f2 = (1 + 1 / (2 * a)) ** 2
    ec = embed_revolution(induced_metric(sphere, a, schw), a)
    t = np.linspace(0, math.pi, 33)
    assert np.allclose(ec.u(t), f2 * np.sin(t), atol=1e-13)
    assert ec.height_gap == pytest.approx(-2 * f2, rel=1e-12)
    H0 = reference_mean_curvature(ec, a, t)
    assert np.allclose(H0, 2 / (a * f2), rtol=1e-9)


def test_v0_is_a_pure_translation(ellipsoid, schw):
    im = induced_metric(ellipsoid, 50.0, schw)
    t = np.linspace(0, math.pi, 17)
    e0 = embed_revolution(im, 50.0, v0=0.0)
    e1 = embed_revolution(im, 50.0, v0=3.25)
    assert np.array_equal(e1.v(t), 3.25 + e0.v(t))
    assert np.array_equal(e0.jet(t), e1.jet(t))


def test_negative_radicand_is_rejected():
    # E = c^2 a^2 constant, G = a^2 sin^2: K = 1/c^2 > 0 but u'^2 > E/a^2 near the poles
    a, c = 1.0, 0.5

    def jet(t):
        s, co = np.sin(t), np.cos(t)
        z = np.zeros_like(t)
        return np.array([c * c + z, z, z, s * s, 2 * s * co, 2 * np.cos(2 * t)])

    im = InducedMetric(jet, math.pi, a, "custom")
    assert np.all(induced_gauss_curvature(im, np.linspace(0.1, 3.0, 10)) > 0)
    with pytest.raises(EmbeddingError, match="radicand"):
        embed_revolution(im, a)


def test_non_convex_metric_is_rejected(ellipsoid):
    g = build_metric("schwarzschild", 5.0)
    with pytest.raises(EmbeddingError):
        embed_revolution(induced_metric(ellipsoid, 0.3, g), 0.3)


def test_scale_mismatch(sphere):
    ec = embed_revolution(induced_metric(sphere, 2.0, None), 2.0)
    with pytest.raises(ValueError):
        reference_mean_curvature(ec, 3.0, 1.0)


def test_radicand_ratio_tends_to_one(ellipsoid, schw):
    t = np.linspace(0.1, math.pi - 0.1, 50)
    dev = [np.max(np.abs(radicand_ratio(ellipsoid, a, schw, t) - 1)) for a in (10.0, 100.0, 1000.0)]
    assert dev[0] > dev[1] > dev[2] and dev[2] < 1e-2


def test_radicand_margin_grows_with_scale(ellipsoid, schw):
    t, _ = composite_nodes(0.0, math.pi, 8, 16)
    margins = []
    for a in (2.0, 10.0, 100.0):
        im = induced_metric(ellipsoid, a, schw)
        u1 = embed_revolution(im, a).jet(t)[1]
        margins.append(np.min((im.E(t) / a ** 2 - u1 ** 2) / (im.E(t) / a ** 2)))
    assert margins[0] < margins[1] < margins[2]


def test_slope_expansion_error_is_second_order(ellipsoid, schw):
    q = reparametrize_arclength(ellipsoid)
    s = np.linspace(0.05, q.l - 0.05, 80)
    j = q.jet(s)
    w, w1, h1 = j[0, 0], j[0, 1], j[1, 1]
    pairs = []
    for a in (100.0, 200.0, 400.0, 800.0):
        f, f1, _ = conformal_factor_along(q, a, 1.0, s)
        v1 = embed_revolution(induced_metric(q, a, schw), a).jet(s)[3]
        approx = f ** 2 * h1 * (1 - 2 * f1 * w * w1 / h1 ** 2)
        pairs.append((a, np.max(np.abs(v1 - approx))))
    assert fit_order(pairs).fitted_order == pytest.approx(-2.0, abs=0.3)


def test_h0_minus_h_is_second_order(ellipsoid, schw):
    t, _ = composite_nodes(0.0, math.pi, 8, 16)
    pairs = []
    for a in (50.0, 100.0, 200.0):
        ec = embed_revolution(induced_metric(ellipsoid, a, schw), a)
        gap = reference_mean_curvature(ec, a, t) - conformal_mean_curvature(ellipsoid, a, t, schw)
        pairs.append((a, np.max(np.abs(gap))))
    assert fit_order(pairs).fitted_order == pytest.approx(-2.0, abs=0.3)


def test_h0_positive_and_pole_safe(ellipsoid, schw):
    ec = embed_revolution(induced_metric(ellipsoid, 30.0, schw), 30.0)
    t = np.array([0.0, 1e-9, 1e-5, 1.0, math.pi - 1e-5, math.pi])
    H0 = reference_mean_curvature(ec, 30.0, t)
    assert np.all(H0 > 0)
    assert abs(H0[0] - H0[2]) < 1e-9 * H0[0]


def test_perturbation_gap_zero_for_identical(ellipsoid, schw):
    im = induced_metric(ellipsoid, 40.0, schw)
    assert embedding_perturbation_gap(im, im, 40.0) == 0.0


def test_perturbation_gap_ratio(ellipsoid, schw, perturbed):
    gaps = [embedding_perturbation_gap(induced_metric(ellipsoid, a, schw),
                                       induced_metric(ellipsoid, a, perturbed), a)
            for a in (100.0, 200.0)]
    assert 8 * 0.8 < gaps[0] / gaps[1] < 8 * 1.25
