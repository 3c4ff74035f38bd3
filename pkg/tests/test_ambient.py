import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from quasilocal import (PRESETS, MetricError, build_metric, normal_derivative_phi,
                        perturbation_from_sympy, perturbation_preset, scalar_curvature,
                        validate_decay)
from quasilocal.ambient import christoffel_from_derivatives, sphere_directions


def random_points(n=100, seed=0, rmin=2.0, rmax=50.0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(rmin, rmax, size=(n, 1))


def all_metrics():
    return [build_metric("euclidean"), build_metric("schwarzschild", 1.0)] + [
        build_metric("perturbed", 1.0, perturbation_preset(name, 1.0)) for name in PRESETS]


def test_euclidean_is_flat():
    g = build_metric("euclidean")
    x = random_points(10)
    assert np.array_equal(g.metric_at(x), np.broadcast_to(np.eye(3), (10, 3, 3)))
    assert not np.any(g.christoffel_at(x))


def test_schwarzschild_value_at_r2():
    g = build_metric("schwarzschild", 1.0)
    x = np.array([[2.0, 0.0, 0.0]])
    assert g.conformal_factor(x)[0] == 1.25
    assert np.allclose(g.metric_at(x)[0], 2.44140625 * np.eye(3), rtol=0, atol=1e-15)


def test_conformal_factor_normalisation():
    # phi = 1 + m/(2r), not 1 + 2m/r
    g = build_metric("schwarzschild", 2.0)
    assert g.conformal_factor(np.array([4.0, 0, 0])) == pytest.approx(1.25)


@pytest.mark.parametrize("kind,m", [("schwarzschild", 0.0), ("schwarzschild", -1.0),
                                    ("perturbed", 1.0), ("nope", 1.0)])
def test_build_metric_errors(kind, m):
    with pytest.raises(MetricError):
        build_metric(kind, m)


@pytest.mark.parametrize("metric", all_metrics(), ids=lambda g: g.label)
def test_dmetric_matches_finite_differences(metric):
    x = random_points(100, seed=1)
    step = 1e-5
    fd = np.stack([(metric.metric_at(x + step * e) - metric.metric_at(x - step * e)) / (2 * step)
                   for e in np.eye(3)], axis=1)
    exact = metric.dmetric_at(x)
    scale = np.max(np.abs(exact)) + 1e-300
    if metric.kind == "euclidean":
        assert np.max(np.abs(fd)) < 1e-9
    else:
        assert np.max(np.abs(exact - fd)) / scale < 1e-6


@pytest.mark.parametrize("metric", all_metrics()[1:], ids=lambda g: g.label)
def test_d2metric_matches_finite_differences(metric):
    x = random_points(30, seed=2)
    step = 1e-5
    fd = np.stack([(metric.dmetric_at(x + step * e) - metric.dmetric_at(x - step * e)) / (2 * step)
                   for e in np.eye(3)], axis=1)
    exact = metric.d2metric_at(x)
    assert np.max(np.abs(exact - fd)) / np.max(np.abs(exact)) < 1e-6


@pytest.mark.parametrize("metric", all_metrics(), ids=lambda g: g.label)
def test_christoffel_consistent_and_symmetric(metric):
    x = random_points(50, seed=3)
    gam = metric.christoffel_at(x)
    ref = christoffel_from_derivatives(metric.metric_at(x), metric.dmetric_at(x))
    assert np.max(np.abs(gam - ref)) < 1e-10
    assert np.array_equal(gam, np.swapaxes(gam, -1, -2))


@pytest.mark.parametrize("metric", all_metrics(), ids=lambda g: g.label)
def test_positive_definite_outside_rmin(metric):
    x = random_points(200, seed=4, rmin=1.0, rmax=1e4)
    assert np.min(np.linalg.eigvalsh(metric.metric_at(x))) > 0


def test_schwarzschild_scalar_flat():
    g = build_metric("schwarzschild", 1.0)
    R = scalar_curvature(g, random_points(100, seed=5))
    assert np.max(np.abs(R)) < 1e-8


def test_perturbed_scalar_curvature_decays():
    # b ~ r^-2 gives R = O(r^-4)
    g = build_metric("perturbed", 1.0, perturbation_preset("combined"))
    dirs = sphere_directions(32)
    sup = [np.max(np.abs(scalar_curvature(g, r * dirs))) for r in (10.0, 20.0, 40.0)]
    assert sup[0] / sup[2] > 16 * 0.8


def test_decay_trivial_for_unperturbed():
    for g in all_metrics()[:2]:
        rep = validate_decay(g, [10, 100, 1000, 10000])
        assert rep.bounded and not np.any(rep.suprema)


@pytest.mark.parametrize("name", PRESETS)
def test_decay_witness_for_presets(name):
    c = 2.5
    g = build_metric("perturbed", 1.0, perturbation_preset(name, c))
    rep = validate_decay(g, [10, 100, 1000, 10000])
    assert rep.bounded
    # r^2 |b| is scale invariant for these presets
    assert np.allclose(rep.suprema[:, 0], rep.suprema[0, 0], rtol=1e-6)
    assert 0 < rep.suprema[0, 0] <= 3 * c


def test_decay_rejects_slow_fall_off():
    X = sp.symbols("x1 x2 x3", real=True)
    r = sp.sqrt(sum(v ** 2 for v in X))
    b = perturbation_from_sympy(sp.eye(3) / r, X, name="r^-1")
    from quasilocal.ambient import AmbientMetric
    rep = validate_decay(AmbientMetric("perturbed", 1.0, b), [10, 100, 1000, 10000])
    assert not rep.bounded
    with pytest.raises(MetricError, match="decay"):
        build_metric("perturbed", 1.0, b)


def test_presets_are_axisymmetric():
    rng = np.random.default_rng(6)
    x = random_points(20, seed=7)
    for name in PRESETS:
        b = perturbation_preset(name).b_at
        th = rng.uniform(0, 2 * np.pi)
        R = np.array([[np.cos(th), -np.sin(th), 0], [np.sin(th), np.cos(th), 0], [0, 0, 1]])
        lhs = b(x @ R.T)
        rhs = R @ b(x) @ R.T
        assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_normal_derivative_phi_examples():
    g = build_metric("schwarzschild", 1.0)
    a = 7.0
    assert normal_derivative_phi(g, np.array([a, 0, 0]), np.array([1.0, 0, 0])) == \
        pytest.approx(-1.0 / (2 * a * a), rel=1e-14)
    assert abs(normal_derivative_phi(g, np.array([a, 0, 0]), np.array([0, 1.0, 0]))) < 1e-18
    assert normal_derivative_phi(build_metric("euclidean"), np.array([a, 0, 0]),
                                 np.array([1.0, 0, 0])) == 0.0
    with pytest.raises(MetricError):
        normal_derivative_phi(g, np.zeros(3), np.array([1.0, 0, 0]))


@given(st.floats(0.1, 10), st.floats(1.0, 1e4),
       st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)))
def test_normal_derivative_bound(m, r, n):
    nv = np.array(n)
    if np.linalg.norm(nv) < 1e-3:
        return
    nv /= np.linalg.norm(nv)
    g = build_metric("schwarzschild", m)
    x = r * np.array([0.6, 0.0, 0.8])
    assert abs(normal_derivative_phi(g, x, nv)) <= m / (2 * r * r) * (1 + 1e-12)
