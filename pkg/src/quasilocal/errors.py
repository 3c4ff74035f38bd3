"""Exception hierarchy shared by the package."""


class QuasiLocalError(Exception):
    """Base class for all errors raised by :mod:`quasilocal`."""


class ProfileError(QuasiLocalError, ValueError):
    """Invalid generating curve or surface family."""


class ConvexityError(ProfileError):
    """A family violates the curvature or distance conditions."""


class MetricError(QuasiLocalError, ValueError):
    """Invalid ambient metric or perturbation field."""


class GeometryError(QuasiLocalError, ArithmeticError):
    """Degenerate geometric quantity (zero speed, degenerate normal, ...)."""


class EmbeddingError(QuasiLocalError, ArithmeticError):
    """The revolution-surface embedding formula does not apply."""


class QuadratureError(QuasiLocalError, ArithmeticError):
    """Non-finite integrand or non-convergent quadrature."""


class ConfigError(QuasiLocalError, ValueError):
    """Malformed experiment configuration."""
