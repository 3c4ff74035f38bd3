"""Acceptance criteria 1-9, each reported as a single PASS/FAIL line."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest

from quasilocal import (PRESETS, SurfaceFamily, adm_flux, build_metric,
                        cancellation_diagnostic, composite_nodes, embed_revolution,
                        euclid_gauss_curvature, euclid_principal_curvatures, fit_order,
                        hawking, induced_gauss_curvature, induced_metric, integrate,
                        make_builtin, perturbation_preset, pole_limits, reparametrize_arclength,
                        spheroid, validate_conditions)
from quasilocal.embedding import embedded_principal_curvatures
from quasilocal.experiments import ExperimentConfig, run_experiment, run_lemma_checks
from quasilocal.geometry import conformal_factor_along
from quasilocal.masses import brown_york

ELLIPSOID_SCALES = (25.0, 50.0, 100.0, 200.0, 400.0)


def test_criterion_1_sphere_brown_york_closed_form(acceptance):
    sphere, g = make_builtin("sphere"), build_metric("schwarzschild", 1.0)
    start = time.perf_counter()
    rel = max(abs(brown_york(sphere, a, g) / (1 + 1 / (2 * a)) - 1) for a in (1e1, 1e2, 1e3, 1e4))
    elapsed = time.perf_counter() - start
    ok = rel <= 1e-8 and elapsed < 5.0
    acceptance(1, ok, f"max rel err {rel:.2e} (tol 1e-8), {elapsed:.2f}s (< 5s)")
    assert ok


def test_criterion_2_ellipsoid_schwarzschild_convergence(acceptance):
    cfg = ExperimentConfig(kind="converge_by", scales=ELLIPSOID_SCALES, profile="ellipsoid_112",
                           metric="schwarzschild", m=1.0)
    start = time.perf_counter()
    study = run_experiment(cfg, write=False)
    elapsed = time.perf_counter() - start
    err = np.abs(study.column("m_by") - 1.0)
    order = study.fits["m_by"].fitted_order
    ok = bool(np.all(np.diff(err) < 0)) and -1.3 <= order <= -0.7 and elapsed < 60
    acceptance(2, ok, f"|m_BY-1| = {', '.join(f'{e:.3e}' for e in err)}; "
                      f"order {order:.4f} in [-1.3, -0.7]; {elapsed:.1f}s (< 60s)")
    assert ok


@pytest.mark.parametrize("preset", PRESETS)
def test_criterion_3_perturbed_convergence(acceptance, preset):
    base = dict(scales=ELLIPSOID_SCALES, profile="ellipsoid_112", metric="perturbed", m=1.0,
                perturbation=preset, amplitude=1.0)
    start = time.perf_counter()
    study = run_experiment(ExperimentConfig(kind="converge_by", **base), write=False)
    checks = run_lemma_checks(ExperimentConfig(kind="lemma_decay_checks", **base))
    elapsed = time.perf_counter() - start
    err = np.abs(study.column("m_by") - 1.0)
    by_order = study.fits["m_by"].fitted_order
    h_order = checks["mean_curvature_perturbation"]["order"]
    h0_order = checks["embedded_mean_curvature_perturbation"]["order"]
    ok = (bool(np.all(np.diff(err) < 0)) and by_order <= -0.7 and h_order <= -2.7
          and h0_order <= -2.7 and elapsed < 180)
    acceptance(3, ok, f"preset {preset}: m_BY order {by_order:.3f} (<= -0.7), "
                      f"H~-H order {h_order:.3f}, H~0-H0 order {h0_order:.3f} (<= -2.7); "
                      f"{elapsed:.1f}s (< 180s)", tag=preset)
    assert ok


def test_criterion_4_hawking_sphere(acceptance):
    sphere, g = make_builtin("sphere"), build_metric("schwarzschild", 1.0)
    dev = max(abs(hawking(sphere, a, g) - 1.0) for a in (1e1, 1e2, 1e3))
    ok = dev <= 1e-8
    acceptance(4, ok, f"max |m_H - 1| = {dev:.2e} (tol 1e-8)")
    assert ok


def test_criterion_5_hawking_divergence(acceptance):
    ell, g = make_builtin("ellipsoid_112"), build_metric("schwarzschild", 1.0)
    scales = (50.0, 100.0, 200.0, 400.0)
    mh = [hawking(ell, a, g) for a in scales]
    ratios = [y / x for x, y in zip(mh, mh[1:])]
    ok = all(v < 0 for v in mh) and all(1.8 <= r <= 2.2 for r in ratios)
    pre = hawking(ell, 50.0, g) / hawking(ell, 25.0, g)
    acceptance(5, ok, f"m_H = {', '.join(f'{v:.3f}' for v in mh)} at a = 50..400; ratios "
                      f"{', '.join(f'{r:.3f}' for r in ratios)} in [1.8, 2.2] "
                      f"(a=25->50 ratio {pre:.3f}, outside a >= 50)")
    assert ok


def test_criterion_6_adm_flux(acceptance):
    sphere, ell = make_builtin("sphere"), make_builtin("ellipsoid_112")
    g = build_metric("schwarzschild", 1.0)
    rel = max(abs(adm_flux(sphere, R, g) / (1 + 1 / (2 * R)) ** 3 - 1)
              for R in (1e1, 1e2, 1e3, 1e4))
    gap = abs(adm_flux(ell, 200.0, g) - adm_flux(sphere, 200.0, g))
    ok = rel <= 1e-8 and gap < 5e-3
    acceptance(6, ok, f"sphere rel err {rel:.2e} (tol 1e-8); ellipsoid vs sphere at 200: "
                      f"{gap:.2e} (< 5e-3)")
    assert ok


def test_criterion_7_exact_cancellation(acceptance):
    g = build_metric("schwarzschild", 1.0)
    worst = max(abs(cancellation_diagnostic(make_builtin(n), a, g))
                for n in ("sphere", "ellipsoid_112") for a in (1e2, 1e3))
    ok = worst < 1e-8 * g.m
    acceptance(7, ok, f"max |diagnostic| = {worst:.2e} (< 1e-8 m)")
    assert ok


def _embedding_suite():
    sphere, ell = make_builtin("sphere"), make_builtin("ellipsoid_112")
    metrics = [build_metric("euclidean"), build_metric("schwarzschild", 1.0),
               build_metric("schwarzschild", 3.0)]
    profiles = [sphere, ell, reparametrize_arclength(ell), spheroid(2.0, 0.7), spheroid(0.6, 1.0)]
    suite = [induced_metric(p, a, g) for p in profiles for g in metrics
             for a in (10.0, 100.0, 1000.0)]
    for name in PRESETS:
        g = build_metric("perturbed", 1.0, perturbation_preset(name, 1.0))
        suite += [induced_metric(ell, a, g) for a in ELLIPSOID_SCALES]
    return suite


def test_criterion_8_embedding_round_trip(acceptance):
    worst_iso, worst_gauss, count = 0.0, 0.0, 0
    for im in _embedding_suite():
        t, _ = composite_nodes(0.0, im.l, 16, 16)
        ec = embed_revolution(im, im.a)
        E2, G2 = ec.reinduced(t)
        worst_iso = max(worst_iso, np.max(np.abs(E2 / im.E(t) - 1)),
                        np.max(np.abs(G2 / im.G(t) - 1)))
        k1, k2 = embedded_principal_curvatures(ec, t)
        worst_gauss = max(worst_gauss,
                          np.max(np.abs(k1 * k2 / induced_gauss_curvature(im, t) - 1)))
        count += 1
    ok = worst_iso <= 1e-8 and worst_gauss <= 1e-6
    acceptance(8, ok, f"{count} metrics: isometry {worst_iso:.2e} (tol 1e-8), "
                      f"theorema egregium {worst_gauss:.2e} (tol 1e-6)")
    assert ok


def _property_checks():
    ell, sphere = make_builtin("ellipsoid_112"), make_builtin("sphere")
    out = {}
    lim_s = pole_limits(sphere)
    lim_e = pole_limits(reparametrize_arclength(ell))
    out["pole limits"] = (abs(lim_s["w_over_hprime_at_0"] + 1) < 1e-12
                          and abs(lim_e["w_over_hprime_at_0"] + 0.5) < 1e-9
                          and abs(lim_e["w_over_hprime_at_l"] + 0.5) < 1e-9)

    scales = (10.0, 100.0, 1000.0)
    ok = True
    for p in (sphere, ell, spheroid(2.0, 0.7)):
        c = validate_conditions(SurfaceFamily.fixed(p, scales))
        t = np.concatenate([[0.0], np.linspace(0, p.l, 2001)[1:-1], [p.l]])
        for a in scales:
            lo, hi = c.principal_curvature_bounds(a)
            for k in euclid_principal_curvatures(p, a, t):
                ok &= bool(np.all(k >= lo - 1e-8) and np.all(k <= hi + 1e-8))
    out["principal curvature bounds"] = ok

    t = np.linspace(0.01, ell.l - 0.01, 400)
    orders = []
    for k in (1, 2):
        pairs = [(a, np.max(np.abs(conformal_factor_along(ell, a, 1.0, t)[k])))
                 for a in (1e2, 1e3, 1e4)]
        orders.append(fit_order(pairs).fitted_order)
    out["conformal factor derivative orders"] = all(o <= -1 + 1e-6 for o in orders)

    ok = True
    for p in (sphere, ell, spheroid(2.0, 0.7)):
        nodes, _ = composite_nodes(0.0, p.l, 8, 16)
        K = induced_gauss_curvature(induced_metric(p, 10.0, None), nodes)
        ok &= bool(np.max(np.abs(K / euclid_gauss_curvature(p, 10.0, nodes) - 1)) < 1e-6)
    out["Gauss formula consistency"] = ok

    rng = np.random.default_rng(0)
    ok = True
    for n in (4, 8, 16, 32, 64):
        poly = np.polynomial.Polynomial(rng.normal(size=2 * n))
        exact = poly.integ()(1.0) - poly.integ()(-1.0)
        got = integrate(poly, (-1.0, 1.0)).value
        ok &= abs(got - exact) <= 1e-13 * max(1.0, abs(exact))
    out["polynomial exactness"] = bool(ok)

    cfg = ExperimentConfig(kind="converge_by", scales=(50.0, 100.0, 200.0),
                           profile="ellipsoid_112", metric="schwarzschild", m=1.0)
    serial = [r.row() for r in run_experiment(cfg, write=False).reports]
    ok = True
    for workers in (2, 3, 8):
        par = [r.row() for r in run_experiment(replace(cfg, workers=workers), write=False).reports]
        ok &= par == serial
    with ThreadPoolExecutor(4) as pool:
        vals = list(pool.map(lambda _: brown_york(ell, 100.0, build_metric("schwarzschild", 1.0)),
                             range(8)))
    ok &= len(set(vals)) == 1 and vals[0] == serial[1]["m_by"]
    out["determinism across thread counts"] = bool(ok)
    return out


def test_criterion_9_property_suite(acceptance):
    results = _property_checks()
    failed = [k for k, v in results.items() if not v]
    ok = not failed
    acceptance(9, ok, f"{len(results) - len(failed)}/{len(results)} property groups hold"
                      + (f"; failing: {', '.join(failed)}" if failed else
                         f" ({', '.join(results)})"))
    assert ok
