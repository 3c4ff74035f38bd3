"""Batch experiments: mass tables, convergence studies and decay-order checks.

Experiments are a pure function of their configuration.  Scales may be
evaluated on a thread pool; results are always collected in scale order, so
the written files do not depend on the number of workers.
"""

from __future__ import annotations

import configparser
import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ambient import AmbientMetric, build_metric, perturbation_preset
from .embedding import embed_revolution, reference_mean_curvature
from .errors import ConfigError, QuasiLocalError
from .geometry import (conformal_factor_along, conformal_mean_curvature,
                       euclid_gauss_curvature, general_mean_curvature,
                       induced_gauss_curvature, induced_metric)
from .masses import CSV_FIELDS, MassReport, cancellation_diagnostic, mass_report
from .numerics import OrderFit, QuadSpec, composite_nodes, fit_order
from .profiles import (Profile, SurfaceFamily, load_profile_csv, make_builtin,
                       validate_conditions)

__all__ = [
    "ExperimentConfig",
    "Thresholds",
    "ConvergenceStudy",
    "ExperimentError",
    "EXPERIMENT_KINDS",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_lemma_checks",
    "emit_plotdata",
    "write_study",
    "write_embedding_dump",
    "format_number",
]

EXPERIMENT_KINDS = ("mass_table", "converge_by", "converge_adm", "hawking_divergence",
                    "lemma_decay_checks", "validate")


class ExperimentError(QuasiLocalError):
    """A module error raised while processing one scale of an experiment."""

    def __init__(self, a, stage, cause):
        self.a = a
        self.stage = stage
        self.cause = cause
        super().__init__(f"scale a={a} failed at stage {stage!r}: "
                         f"{type(cause).__name__}: {cause}")

    def record(self) -> dict:
        return {"error": type(self.cause).__name__, "message": str(self.cause),
                "a": self.a, "stage": self.stage}


@dataclass(frozen=True)
class Thresholds:
    order_min: float = -1.3
    order_max: float = -0.7
    adm_order_max: float = -0.7
    hawking_ratio_min: float = 1.8
    hawking_ratio_max: float = 2.2
    hawking_min_scale: float = 50.0
    flat_tol: float = 1e-8
    decay_order_slack: float = 0.3
    cancellation_tol: float = 1e-8
    degenerate_gap: float = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "mass_table"
    scales: tuple[float, ...] = (10.0, 100.0, 1000.0)
    profile: str = "sphere"
    profile_params: tuple[float, ...] = ()
    profile_csv: str | None = None
    metric: str = "schwarzschild"
    m: float = 1.0
    perturbation: str | None = None
    amplitude: float = 1.0
    r_min: float = 1.0
    quad: QuadSpec = field(default_factory=QuadSpec)
    out_dir: str | None = None
    name: str | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    workers: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        scales = tuple(float(a) for a in self.scales)
        if not scales:
            raise ConfigError("scale list is empty")
        if any(b <= a for a, b in zip(scales, scales[1:])) or scales[0] <= 0:
            raise ConfigError("scale list must be positive and strictly increasing")
        object.__setattr__(self, "scales", scales)
        if self.metric != "euclidean" and not self.m > 0:
            raise ConfigError("m must be positive unless the metric is euclidean")
        if self.metric == "perturbed" and not self.perturbation:
            raise ConfigError("perturbed metric needs a perturbation preset")

    @property
    def basename(self) -> str:
        return self.name or f"{self.kind}_{self.profile}_{self.metric}"

    def build_profile(self) -> Profile:
        if self.profile_csv:
            return load_profile_csv(self.profile_csv)
        return make_builtin(self.profile, self.profile_params)

    def build_metric(self) -> AmbientMetric:
        if self.metric == "perturbed":
            b = perturbation_preset(self.perturbation, self.amplitude)
            return build_metric("perturbed", self.m, b, self.r_min)
        return build_metric(self.metric, self.m, None, self.r_min)

    def schwarzschild_part(self) -> AmbientMetric:
        return build_metric("schwarzschild", self.m, None, self.r_min)

    @property
    def mass_limit(self) -> float:
        """ADM mass of the ambient manifold (perturbations carry none)."""
        return 0.0 if self.metric == "euclidean" else self.m


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def parse_config(text: str, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Parse an INI-style configuration (``[section]`` headers, ``key = value``)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    allowed = {"experiment", "profile", "metric", "quadrature", "output", "thresholds"}
    unknown = set(cp.sections()) - allowed
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    kw = {}
    try:
        if cp.has_section("experiment"):
            s = cp["experiment"]
            kw["kind"] = s.get("kind", "mass_table")
            if "scales" in s:
                kw["scales"] = _floats(s["scales"])
            kw["workers"] = s.getint("workers", 1)
        if cp.has_section("profile"):
            s = cp["profile"]
            kw["profile"] = s.get("builtin", "sphere")
            kw["profile_params"] = _floats(s.get("params", ""))
            if s.get("csv"):
                path = Path(s["csv"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                kw["profile_csv"] = str(path)
                kw["profile"] = path.stem
        if cp.has_section("metric"):
            s = cp["metric"]
            kw["metric"] = s.get("kind", "schwarzschild")
            kw["m"] = s.getfloat("m", 1.0 if kw["metric"] != "euclidean" else 0.0)
            kw["perturbation"] = s.get("perturbation") or None
            kw["amplitude"] = s.getfloat("amplitude", 1.0)
            kw["r_min"] = s.getfloat("r_min", 1.0)
        if cp.has_section("quadrature"):
            s = cp["quadrature"]
            kw["quad"] = QuadSpec(panels=s.getint("panels", 16),
                                  nodes_per_panel=s.getint("nodes", 16),
                                  tol=s.getfloat("tol", 1e-10),
                                  pole_margin=s.getfloat("pole_margin", 1e-4))
        if cp.has_section("output"):
            s = cp["output"]
            kw["out_dir"] = s.get("dir") or None
            kw["name"] = s.get("name") or None
        if cp.has_section("thresholds"):
            s = cp["thresholds"]
            defaults = asdict(Thresholds())
            extra = set(s) - set(defaults)
            if extra:
                raise ConfigError(f"unknown thresholds {sorted(extra)}")
            kw["thresholds"] = Thresholds(**{k: s.getfloat(k) for k in s})
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


# --- studies -------------------------------------------------------------------

@dataclass
class ConvergenceStudy:
    config: ExperimentConfig
    reports: list[MassReport]
    fits: dict[str, OrderFit] = field(default_factory=dict)
    verdicts: dict[str, dict] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts.values())

    def column(self, name):
        return np.array([getattr(r, name) for r in self.reports])


def _verdict(passed, detail, **values):
    return {"passed": bool(passed), "detail": detail, **values}


def _map_scales(fn, cfg):
    def guarded(a):
        try:
            return fn(a)
        except ExperimentError:
            raise
        except QuasiLocalError as exc:
            raise ExperimentError(a, getattr(fn, "stage", "mass_report"), exc) from exc

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(guarded, cfg.scales))
    return [guarded(a) for a in cfg.scales]


def _mass_reports(cfg, profile, metric):
    def one(a):
        return mass_report(profile, a, metric, cfg.quad)
    one.stage = "mass_report"
    return _map_scales(one, cfg)


def _safe_fit(scales, errors):
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0) or len(scales) < 3:
        return None
    return fit_order(list(zip(scales, errors)))


def _fit_dict(fit):
    if fit is None:
        return None
    return {"order": fit.fitted_order, "constant": fit.fitted_constant,
            "r_squared": fit.r_squared}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ConvergenceStudy:
    """Run one experiment; writes CSV, JSON and plot data when ``cfg.out_dir`` is set."""
    profile = cfg.build_profile().oriented()
    metric = cfg.build_metric()

    if cfg.kind == "validate":
        fam = SurfaceFamily.fixed(profile, cfg.scales)
        try:
            consts = validate_conditions(fam)
            verdict = _verdict(True, "conditions hold", **asdict(consts))
        except QuasiLocalError as exc:
            consts = None
            verdict = _verdict(False, str(exc))
        study = ConvergenceStudy(cfg, [], verdicts={"conditions": verdict},
                                 extra={"constants": asdict(consts) if consts else None})
    elif cfg.kind == "lemma_decay_checks":
        checks = run_lemma_checks(cfg)
        study = ConvergenceStudy(cfg, [], extra={"checks": checks})
        study.verdicts = {k: _verdict(v["passed"], v["detail"]) for k, v in checks.items()}
    else:
        reports = _mass_reports(cfg, profile, metric)
        study = ConvergenceStudy(cfg, reports)
        _judge(study)

    if write and cfg.out_dir:
        write_study(study, cfg.out_dir)
        if study.reports:
            emit_plotdata(study, Path(cfg.out_dir) / f"{cfg.basename}.dat")
    return study


def _judge(study: ConvergenceStudy):
    cfg, th = study.config, study.config.thresholds
    a = np.array(cfg.scales)
    limit = cfg.mass_limit
    by_err = np.abs(study.column("m_by") - limit)
    adm_err = np.abs(study.column("m_adm_flux") - limit)
    study.fits["m_by"] = _safe_fit(a, by_err)
    study.fits["m_adm_flux"] = _safe_fit(a, adm_err)
    v = study.verdicts
    quad_ok = all(r.quad_err <= cfg.quad.tol * max(1.0, abs(r.area)) for r in study.reports)
    v["quadrature"] = _verdict(quad_ok, "quadrature error estimates below tolerance")

    if cfg.kind == "mass_table" and cfg.metric == "euclidean":
        worst = max(max(abs(r.m_by), abs(r.m_hawking) if r.profile == "sphere" else 0.0,
                        abs(r.m_adm_flux)) for r in study.reports)
        v["flat_masses"] = _verdict(worst <= th.flat_tol,
                                    f"max |mass| = {worst:.3e} (tol {th.flat_tol:g})")
    if cfg.kind == "converge_by":
        dec = bool(np.all(np.diff(by_err) < 0))
        v["m_by_decreasing"] = _verdict(dec, "|m_BY - m| strictly decreasing")
        fit = study.fits["m_by"]
        ok = fit is not None and th.order_min <= fit.fitted_order <= th.order_max
        order = fit.fitted_order if fit else float("nan")
        v["m_by_order"] = _verdict(
            ok, f"fitted order {order:.4f} in [{th.order_min}, {th.order_max}]", order=order)
    if cfg.kind == "converge_adm":
        dec = bool(np.all(np.diff(adm_err) < 0))
        v["m_adm_decreasing"] = _verdict(dec, "|m_ADM(S_a) - m| strictly decreasing")
        fit = study.fits["m_adm_flux"]
        ok = fit is not None and fit.fitted_order <= th.adm_order_max
        order = fit.fitted_order if fit else float("nan")
        v["m_adm_order"] = _verdict(ok, f"fitted order {order:.4f} <= {th.adm_order_max}",
                                    order=order)
    if cfg.kind == "hawking_divergence":
        mh = study.column("m_hawking")
        big = a >= th.hawking_min_scale
        neg = bool(np.all(mh[big] < 0)) and bool(np.any(big))
        v["hawking_negative"] = _verdict(neg, f"m_H < 0 for a >= {th.hawking_min_scale:g}")
        ratios = []
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                if abs(a[j] - 2 * a[i]) < 1e-9 * a[j] and a[i] >= th.hawking_min_scale:
                    ratios.append((a[i], mh[j] / mh[i]))
        ok = bool(ratios) and all(th.hawking_ratio_min <= r <= th.hawking_ratio_max
                                  for _, r in ratios)
        v["hawking_doubling"] = _verdict(
            ok, f"m_H(2a)/m_H(a) in [{th.hawking_ratio_min}, {th.hawking_ratio_max}]",
            ratios=[[float(x), float(r)] for x, r in ratios])
        study.fits["m_hawking"] = _safe_fit(a, np.abs(mh))


# --- decay checks ----------------------------------------------------------------

def _decay_entry(scales, values, nominal, slack, degenerate, stage):
    values = [float(x) for x in values]
    if max(values) < degenerate:
        return {"values": values, "order": None, "constant": None, "nominal": nominal,
                "passed": True, "detail": f"{stage}: all gaps below {degenerate:g}"}
    fit = fit_order(list(zip(scales, values)))
    passed = fit.fitted_order <= nominal + slack
    return {"values": values, "order": fit.fitted_order, "constant": fit.fitted_constant,
            "nominal": nominal, "passed": bool(passed),
            "detail": f"{stage}: fitted order {fit.fitted_order:.4f} "
                      f"(nominal {nominal}, pass <= {nominal + slack:g})"}


def run_lemma_checks(cfg: ExperimentConfig) -> dict:
    """Measured decay orders of the pointwise estimates behind the convergence results.

    * ``conformal_factor_derivatives``: ``sup |phi_a'| + sup |phi_a''|`` ~ ``a^-1``
    * ``gauss_curvature_gap``: ``sup |K - Kbar|`` ~ ``a^-3``
    * ``mean_curvature_perturbation``: ``sup |H~ - H|`` ~ ``a^-3``
    * ``embedded_mean_curvature_perturbation``: ``sup |H~0 - H0|`` ~ ``a^-3``
    * ``exact_derivative_cancellation``: ``|integral| < tol * m`` at every scale
    """
    th = cfg.thresholds
    if len(cfg.scales) < 3:
        raise ConfigError("decay checks need at least 3 scales")
    profile = cfg.build_profile().oriented()
    metric = cfg.build_metric()
    schw = cfg.schwarzschild_part() if cfg.metric != "euclidean" else metric
    t, _ = composite_nodes(0.0, profile.l, cfg.quad.panels, cfg.quad.nodes_per_panel)

    def one(a):
        row = {}
        f, f1, f2 = conformal_factor_along(profile, a, cfg.m, t)
        row["dphi"] = float(np.max(np.abs(f1)) + np.max(np.abs(f2)))
        K = induced_gauss_curvature(induced_metric(profile, a, schw), t)
        row["dK"] = float(np.max(np.abs(K - euclid_gauss_curvature(profile, a, t))))
        if cfg.metric == "perturbed":
            H = conformal_mean_curvature(profile, a, t, schw)
            Ht = general_mean_curvature(profile, a, t, metric)
            row["dH"] = float(np.max(np.abs(Ht - H)))
            h0 = reference_mean_curvature(
                embed_revolution(induced_metric(profile, a, schw), a), a, t)
            h0t = reference_mean_curvature(
                embed_revolution(induced_metric(profile, a, metric), a), a, t)
            row["dH0"] = float(np.max(np.abs(h0t - h0)))
        else:
            row["dH"] = row["dH0"] = 0.0
        row["cancel"] = abs(cancellation_diagnostic(profile, a, schw, cfg.quad))
        return row
    one.stage = "decay_checks"

    rows = _map_scales(one, cfg)
    sc = cfg.scales
    slack, deg = th.decay_order_slack, th.degenerate_gap
    out = {
        "conformal_factor_derivatives": _decay_entry(
            sc, [r["dphi"] for r in rows], -1, slack, deg, "phi_a' and phi_a''"),
        "gauss_curvature_gap": _decay_entry(
            sc, [r["dK"] for r in rows], -3, slack, deg, "K - Kbar"),
        "mean_curvature_perturbation": _decay_entry(
            sc, [r["dH"] for r in rows], -3, slack, deg, "H~ - H"),
        "embedded_mean_curvature_perturbation": _decay_entry(
            sc, [r["dH0"] for r in rows], -3, slack, deg, "H~0 - H0"),
    }
    cancel = [r["cancel"] for r in rows]
    bound = th.cancellation_tol * max(cfg.m, 1e-300)
    out["exact_derivative_cancellation"] = {
        "values": cancel, "order": None, "constant": None, "nominal": 0,
        "passed": bool(max(cancel) < bound),
        "detail": f"max |integral| = {max(cancel):.3e} < {bound:g}"}
    return out


# --- output ---------------------------------------------------------------------

def format_number(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % x


def write_study(study: ConvergenceStudy, out_dir: str | Path) -> dict[str, Path]:
    """CSV (one row per scale) and JSON (rows, fits, verdicts, thresholds)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = study.config
    paths = {}
    rows = [r.row() for r in study.reports]
    if rows:
        csv_path = out / f"{cfg.basename}.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for row in rows:
                writer.writerow([format_number(row[k]) for k in CSV_FIELDS])
        paths["csv"] = csv_path
    doc = {
        "experiment": cfg.kind,
        "profile": cfg.profile,
        "metric": study.reports[0].metric if study.reports else cfg.metric,
        "scales": list(cfg.scales),
        "rows": rows,
        "fits": {k: _fit_dict(v) for k, v in study.fits.items()},
        "verdicts": study.verdicts,
        "thresholds": asdict(cfg.thresholds),
        "passed": study.passed,
        **{k: v for k, v in study.extra.items()},
    }
    json_path = out / f"{cfg.basename}.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    paths["json"] = json_path
    return paths


def emit_plotdata(study: ConvergenceStudy, path: str | Path) -> Path:
    """Whitespace-separated columns for gnuplot, header line starting with ``#``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    limit = study.config.mass_limit
    lines = ["# a m_by m_hawking m_adm |m_by-m_adm_limit|"]
    for r in study.reports:
        vals = (r.a, r.m_by, r.m_hawking, r.m_adm_flux, abs(r.m_by - limit))
        lines.append(" ".join(format_number(v) for v in vals))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_embedding_dump(cfg: ExperimentConfig, out_dir: str | Path,
                         nodes: int = 257) -> list[Path]:
    """One ``phi,u,v,H0`` CSV per scale for the embedded image of ``S_a``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = cfg.build_profile().oriented()
    metric = cfg.build_metric()
    phi = np.linspace(0.0, profile.l, nodes)
    paths = []

    def one(a):
        ec = embed_revolution(induced_metric(profile, a, metric), a)
        return ec.u(phi), ec.v(phi), reference_mean_curvature(ec, a, phi)
    one.stage = "embedding"

    for a, (u, v, H0) in zip(cfg.scales, _map_scales(one, cfg)):
        path = out / f"embed_{cfg.profile}_a{format_number(a)}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["phi", "u", "v", "H0"])
            for row in zip(phi, u, v, H0):
                writer.writerow([format_number(x) for x in row])
        paths.append(path)
    return paths
