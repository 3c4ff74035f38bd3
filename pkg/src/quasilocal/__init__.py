"""Quasi-local masses (Brown-York, Hawking) and ADM flux for families of
convex surfaces of revolution in Schwarzschild-type 3-manifolds."""

from .errors import (ConfigError, ConvexityError, EmbeddingError, GeometryError,
                     MetricError, ProfileError, QuadratureError, QuasiLocalError)
from .numerics import (CumulativeIntegral, OrderFit, QuadResult, QuadSpec,
                       check_derivatives, composite_nodes, fit_order, integrate)
from .profiles import (ConditionConstants, Profile, SurfaceFamily, from_samples,
                       load_profile_csv, make_builtin, reparametrize_arclength,
                       spheroid, validate_conditions)
from .ambient import (PRESETS, AmbientMetric, DecayReport, PerturbationField,
                      build_metric, normal_derivative_phi, perturbation_from_sympy,
                      perturbation_preset, scalar_curvature, validate_decay)
from .geometry import (CurvatureSample, InducedMetric, conformal_mean_curvature,
                       euclid_gauss_curvature, euclid_mean_curvature,
                       euclid_principal_curvatures, general_mean_curvature,
                       induced_gauss_curvature, induced_metric, pole_limits,
                       sample_curvatures)
from .embedding import (EmbeddedCurve, embed_revolution, embedding_perturbation_gap,
                        reference_mean_curvature)
from .masses import (CSV_FIELDS, MassReport, adm_flux, area, brown_york,
                     cancellation_diagnostic, hawking, mass_report)
from .experiments import (ConvergenceStudy, ExperimentConfig, Thresholds,
                          emit_plotdata, load_config, parse_config, run_experiment,
                          run_lemma_checks)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvexityError",
    "EmbeddingError",
    "GeometryError",
    "MetricError",
    "ProfileError",
    "QuadratureError",
    "QuasiLocalError",
    "CumulativeIntegral",
    "OrderFit",
    "QuadResult",
    "QuadSpec",
    "check_derivatives",
    "composite_nodes",
    "fit_order",
    "integrate",
    "ConditionConstants",
    "Profile",
    "SurfaceFamily",
    "from_samples",
    "load_profile_csv",
    "make_builtin",
    "reparametrize_arclength",
    "spheroid",
    "validate_conditions",
    "PRESETS",
    "AmbientMetric",
    "DecayReport",
    "PerturbationField",
    "build_metric",
    "normal_derivative_phi",
    "perturbation_from_sympy",
    "perturbation_preset",
    "scalar_curvature",
    "validate_decay",
    "CurvatureSample",
    "InducedMetric",
    "conformal_mean_curvature",
    "euclid_gauss_curvature",
    "euclid_mean_curvature",
    "euclid_principal_curvatures",
    "general_mean_curvature",
    "induced_gauss_curvature",
    "induced_metric",
    "pole_limits",
    "sample_curvatures",
    "EmbeddedCurve",
    "embed_revolution",
    "embedding_perturbation_gap",
    "reference_mean_curvature",
    "CSV_FIELDS",
    "MassReport",
    "adm_flux",
    "area",
    "brown_york",
    "cancellation_diagnostic",
    "hawking",
    "mass_report",
    "ConvergenceStudy",
    "ExperimentConfig",
    "Thresholds",
    "emit_plotdata",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_lemma_checks",
]
