"""The 1:1:2 ellipsoids x^2 + y^2 + z^2/4 = a^2 in Schwarzschild space (m = 1).

Brown-York mass tends to the ADM mass at rate 1/a.  The Hawking mass of the
same family drifts to minus infinity, linearly in a, because the Willmore
energy of a non-round ellipsoid exceeds 16 pi.  The ADM flux integral through
the ellipsoids tends to m as well, but with its own 1/a correction.
"""

from pathlib import Path

from quasilocal import ExperimentConfig, emit_plotdata, run_experiment

scales = (25.0, 50.0, 100.0, 200.0, 400.0)
cfg = ExperimentConfig(kind="converge_by", scales=scales, profile="ellipsoid_112",
                       metric="schwarzschild", m=1.0, workers=4)
study = run_experiment(cfg, write=False)

print(f"{'a':>6} {'m_BY':>14} {'m_BY - 1':>12} {'m_H':>12} {'m_H(2a)/m_H(a)':>15} {'m_ADM':>12}")
previous = None
for r in study.reports:
    ratio = "" if previous is None else f"{r.m_hawking / previous:15.4f}"
    print(f"{r.a:6g} {r.m_by:14.10f} {r.m_by - 1:12.4e} {r.m_hawking:12.4f} {ratio:>15} "
          f"{r.m_adm_flux:12.8f}")
    previous = r.m_hawking

fit = study.fits["m_by"]
print(f"\n|m_BY - 1| ~ {fit.fitted_constant:.4f} * a^{fit.fitted_order:.4f}")
for name, verdict in study.verdicts.items():
    print(f"  {name}: {'pass' if verdict['passed'] else 'FAIL'} ({verdict['detail']})")

out = Path(__file__).with_name("ellipsoid_family.dat")
emit_plotdata(study, out)
print(f"\nplot data written to {out}  (gnuplot: plot '{out.name}' u 1:5 w lp)")
