"""Round spheres in Schwarzschild space: every mass has a closed form.

For the coordinate sphere r = a in the metric (1 + m/2r)^4 delta the three
functionals reduce to simple expressions in phi = 1 + m/(2a):

    Brown-York   m (1 + m / 2a)
    Hawking      m                      (exactly, for every a)
    ADM flux     m (1 + m / 2a)^3

This script evaluates them through the general machinery (induced metric,
isometric embedding, quadrature) and prints the deviation from the formulas.
"""

from quasilocal import adm_flux, brown_york, build_metric, hawking, make_builtin

m = 1.0
sphere = make_builtin("sphere")
metric = build_metric("schwarzschild", m)

print(f"{'a':>8} {'m_BY':>20} {'rel.err':>10} {'m_H':>20} {'m_ADM':>20} {'rel.err':>10}")
for a in (10.0, 100.0, 1000.0, 10000.0):
    by = brown_york(sphere, a, metric)
    mh = hawking(sphere, a, metric)
    adm = adm_flux(sphere, a, metric)
    by_exact = m * (1 + m / (2 * a))
    adm_exact = m * (1 + m / (2 * a)) ** 3
    print(f"{a:8g} {by:20.15f} {by / by_exact - 1:10.1e} {mh:20.15f} "
          f"{adm:20.15f} {adm / adm_exact - 1:10.1e}")

# The Brown-York excess over m is m^2 / 2a, so its log-log slope is exactly -1.
