"""Isometric embedding of the Schwarzschild-induced metric of an ellipsoid.

The surface S_a inherits E dphi^2 + G dtheta^2 from the ambient metric.  Its
Euclidean image is the revolution surface with u = sqrt(G)/a and
v' = -sqrt(E/a^2 - u'^2).  We check that the image is isometric, that its
Gauss curvature matches the intrinsic one, and watch H0 - H shrink like a^-2.
"""

import numpy as np

from quasilocal import (build_metric, composite_nodes, embed_revolution, induced_gauss_curvature,
                        induced_metric, make_builtin, reference_mean_curvature)
from quasilocal.embedding import embedded_principal_curvatures
from quasilocal.masses import mean_curvature

profile = make_builtin("ellipsoid_112").oriented()
metric = build_metric("schwarzschild", 1.0)
t, _ = composite_nodes(0.0, profile.l, 16, 16)

print(f"{'a':>6} {'isometry':>10} {'egregium':>10} {'sup|H0-H|':>11} {'a^2 sup|H0-H|':>14}")
for a in (10.0, 40.0, 160.0, 640.0):
    im = induced_metric(profile, a, metric)
    ec = embed_revolution(im, a)

    # the image re-induces exactly the metric we started from
    E, G = ec.reinduced(t)
    E0, _, _, G0, _, _ = im.jet(t)
    isometry = max(np.max(np.abs(E / E0 - 1)), np.max(np.abs(G / G0 - 1)))

    # Gauss curvature is intrinsic, so the image must reproduce it
    k1, k2 = embedded_principal_curvatures(ec, t)
    K = induced_gauss_curvature(im, t)
    egregium = np.max(np.abs(k1 * k2 / K - 1))

    gap = np.max(np.abs(reference_mean_curvature(ec, a, t) - mean_curvature(profile, a, t, metric)))
    print(f"{a:6g} {isometry:10.1e} {egregium:10.1e} {gap:11.3e} {gap * a ** 2:14.5f}")
