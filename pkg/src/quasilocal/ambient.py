"""Ambient 3-metrics on R^3 minus a compact set.

Three kinds are supported: the flat metric, the spatial Schwarzschild metric
in isotropic coordinates ``phi^4 delta`` with ``phi = 1 + m/(2r)``, and
Schwarzschild plus an axisymmetric perturbation ``b_ij`` decaying like
``r^-2``.  All evaluators are vectorised over leading axes of ``x``.

Index conventions: ``dmetric_at(x)[..., k, i, j] = d_k g_ij`` and
``christoffel_at(x)[..., k, i, j] = Gamma^k_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .errors import MetricError

__all__ = [
    "AmbientMetric",
    "PerturbationField",
    "DecayReport",
    "build_metric",
    "perturbation_from_sympy",
    "perturbation_preset",
    "PRESETS",
    "validate_decay",
    "normal_derivative_phi",
    "christoffel_from_derivatives",
    "scalar_curvature",
    "finite_difference_metric",
    "sphere_directions",
]

KINDS = ("euclidean", "schwarzschild", "perturbed")
_EYE = np.eye(3)


@dataclass(frozen=True)
class PerturbationField:
    """Closed-form ``b_ij`` with coordinate derivatives to third order."""

    b_at: Callable[[np.ndarray], np.ndarray]
    db_at: Callable[[np.ndarray], np.ndarray]
    d2b_at: Callable[[np.ndarray], np.ndarray]
    d3b_at: Callable[[np.ndarray], np.ndarray]
    axisymmetric_flag: bool = True
    name: str = "custom"


def _tensor_function(exprs, shape, symbols, scale=1.0):
    """Vectorised evaluator of a list of expressions reshaped to ``shape``.

    Repeated expressions (mixed partials, symmetric entries) are compiled
    once and scattered back with an index array.
    """
    unique, index = [], []
    seen = {}
    for e in exprs:
        if e not in seen:
            seen[e] = len(unique)
            unique.append(e)
        index.append(seen[e])
    index = np.array(index)
    fn = sp.lambdify(symbols, unique, modules="numpy", cse=True)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        parts = np.broadcast_arrays(*fn(x[..., 0], x[..., 1], x[..., 2]),
                                    np.empty(x.shape[:-1]))[:-1]
        out = np.stack(parts, axis=-1)[..., index]
        if scale != 1.0:
            out = scale * out
        return out.reshape(x.shape[:-1] + shape)

    return evaluate


def perturbation_from_sympy(b, symbols=None, name="custom",
                            axisymmetric=True, scale: float = 1.0) -> PerturbationField:
    """Build a :class:`PerturbationField` from a symbolic 3x3 matrix.

    Derivatives are taken symbolically, so the field and all its
    derivatives are exact closed forms.  ``scale`` multiplies every
    evaluated tensor.
    """
    if symbols is None:
        symbols = sp.symbols("x1 x2 x3", real=True)
    b = sp.Matrix(b)
    if b.shape != (3, 3) or b != b.T:
        raise MetricError("perturbation must be a symmetric 3x3 matrix")
    X = list(symbols)
    idx = range(3)
    cache = {}

    def partial(i, j, ks):
        # mixed partials commute and b is symmetric: cache on sorted keys and
        # build each derivative from the one of order one less
        key = (min(i, j), max(i, j), tuple(sorted(ks)))
        if key not in cache:
            if not ks:
                cache[key] = b[key[0], key[1]]
            else:
                cache[key] = sp.diff(partial(i, j, key[2][:-1]), X[key[2][-1]])
        return cache[key]

    comps = [partial(i, j, ()) for i in idx for j in idx]
    d1 = [partial(i, j, (k,)) for k in idx for i in idx for j in idx]
    d2 = [partial(i, j, (k, l)) for l in idx for k in idx for i in idx for j in idx]
    d3 = [partial(i, j, (k, l, n))
          for n in idx for l in idx for k in idx for i in idx for j in idx]
    return PerturbationField(
        _tensor_function(comps, (3, 3), X, scale),
        _tensor_function(d1, (3, 3, 3), X, scale),
        _tensor_function(d2, (3, 3, 3, 3), X, scale),
        _tensor_function(d3, (3, 3, 3, 3, 3), X, scale),
        axisymmetric, name)


def _preset_matrix(name, c, X):
    x1, x2, x3 = X
    r2 = x1 ** 2 + x2 ** 2 + x3 ** 2
    xv = sp.Matrix(X)
    e3 = sp.Matrix([0, 0, 1])
    if name == "radial":
        return c * (xv * xv.T) / r2 ** 2
    if name == "axial":
        return c * (e3 * e3.T) / r2
    if name == "quadrupole":
        return c * (3 * x3 ** 2 / r2 - 1) / r2 * sp.eye(3)
    if name == "mixed":
        return c * x3 * (xv * e3.T + e3 * xv.T) / r2 ** 2
    if name == "combined":
        return c * ((xv * xv.T) / r2 + e3 * e3.T
                    + x3 * (xv * e3.T + e3 * xv.T) / r2
                    + (3 * x3 ** 2 / r2 - 1) * sp.eye(3)) / (2 * r2)
    raise MetricError(f"unknown perturbation preset {name!r}")


PRESETS = ("radial", "axial", "quadrupole", "mixed", "combined")


@lru_cache(maxsize=None)
def _unit_preset(name: str) -> PerturbationField:
    X = sp.symbols("x1 x2 x3", real=True)
    return perturbation_from_sympy(_preset_matrix(name, sp.Integer(1), X), X, name=name)


def perturbation_preset(name: str, amplitude: float = 1.0) -> PerturbationField:
    """Axisymmetric presets, all of the form ``amplitude * r^-2 * (unit tensor)``.

    Every preset lies in the span of ``delta``, ``x x^T``, ``e3 e3^T`` and
    ``x e3^T + e3 x^T``, so it is invariant under rotations about the x3-axis
    and keeps the induced metric of a revolution surface diagonal in
    ``(phi, theta)``.  The symbolic work is done once per preset name.
    """
    if name not in PRESETS:
        raise MetricError(f"unknown perturbation preset {name!r}")
    unit = _unit_preset(name)
    c = float(amplitude)

    def scaled(f):
        return f if c == 1.0 else (lambda x: c * f(x))

    return PerturbationField(scaled(unit.b_at), scaled(unit.db_at), scaled(unit.d2b_at),
                             scaled(unit.d3b_at), True, f"{name}({c:g})")


class AmbientMetric:
    """Immutable ambient metric ``phi^4 delta + b`` (or the flat metric)."""

    def __init__(self, kind: str, m: float = 0.0,
                 perturbation: PerturbationField | None = None, r_min: float = 1.0):
        self.kind = kind
        self.m = float(m)
        self.perturbation = perturbation
        self.r_min = float(r_min)

    def __repr__(self):
        extra = f", b={self.perturbation.name}" if self.perturbation else ""
        return f"AmbientMetric({self.kind!r}, m={self.m:g}{extra})"

    @property
    def label(self) -> str:
        if self.kind == "euclidean":
            return "euclidean"
        if self.kind == "schwarzschild":
            return f"schwarzschild(m={self.m:g})"
        return f"perturbed(m={self.m:g},b={self.perturbation.name})"

    # conformal factor ------------------------------------------------------

    def conformal_factor(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return 1.0 + self.m / (2.0 * r)

    def conformal_gradient(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return -0.5 * self.m * x / r[..., None] ** 3

    def conformal_hessian(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)[..., None, None]
        outer = x[..., :, None] * x[..., None, :]
        return -0.5 * self.m * (_EYE / r ** 3 - 3.0 * outer / r ** 5)

    def _conformal_parts(self, x):
        """phi^4 and its first and second derivatives."""
        f = self.conformal_factor(x)
        df = self.conformal_gradient(x)
        ddf = self.conformal_hessian(x)
        p4 = f ** 4
        d4 = 4.0 * f[..., None] ** 3 * df
        dd4 = (12.0 * f[..., None, None] ** 2 * df[..., :, None] * df[..., None, :]
               + 4.0 * f[..., None, None] ** 3 * ddf)
        return p4, d4, dd4

    # metric and derivatives ------------------------------------------------

    def metric_at(self, x):
        x = np.asarray(x, dtype=float)
        p4, _, _ = self._conformal_parts(x)
        g = p4[..., None, None] * _EYE
        if self.perturbation is not None:
            g = g + self.perturbation.b_at(x)
        return g

    def dmetric_at(self, x):
        x = np.asarray(x, dtype=float)
        _, d4, _ = self._conformal_parts(x)
        dg = d4[..., :, None, None] * _EYE
        if self.perturbation is not None:
            dg = dg + self.perturbation.db_at(x)
        return dg

    def d2metric_at(self, x):
        x = np.asarray(x, dtype=float)
        _, _, dd4 = self._conformal_parts(x)
        d2g = dd4[..., :, :, None, None] * _EYE
        if self.perturbation is not None:
            d2g = d2g + self.perturbation.d2b_at(x)
        return d2g

    def christoffel_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.perturbation is None:
            # conformally flat: Gamma^k_ij = (2/phi)(d_k^i d_j phi + d_k^j d_i phi - d_ij d_k phi)
            f = self.conformal_factor(x)[..., None]
            s = 2.0 * self.conformal_gradient(x) / f
            gam = (np.einsum("ki,...j->...kij", _EYE, s)
                   + np.einsum("kj,...i->...kij", _EYE, s)
                   - np.einsum("ij,...k->...kij", _EYE, s))
            return gam
        return christoffel_from_derivatives(self.metric_at(x), self.dmetric_at(x))

    def perturbation_parts(self, x):
        """``b`` and its first three derivatives (zeros when unperturbed)."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        if self.perturbation is None:
            return tuple(np.zeros(lead + (3,) * n) for n in (2, 3, 4, 5))
        pf = self.perturbation
        return pf.b_at(x), pf.db_at(x), pf.d2b_at(x), pf.d3b_at(x)


def christoffel_from_derivatives(g, dg):
    """``Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)``."""
    ginv = np.linalg.inv(g)
    lowered = 0.5 * (np.einsum("...ijl->...lij", dg)
                     + np.einsum("...jil->...lij", dg)
                     - dg)
    return np.einsum("...kl,...lij->...kij", ginv, lowered)


def scalar_curvature(metric: AmbientMetric, x):
    """Scalar curvature from analytic first and second metric derivatives."""
    x = np.asarray(x, dtype=float)
    g = metric.metric_at(x)
    dg = metric.dmetric_at(x)
    d2g = metric.d2metric_at(x)
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("...ka,...lab,...bm->...lkm", ginv, dg, ginv)
    low = 0.5 * (np.einsum("...ijm->...mij", dg) + np.einsum("...jim->...mij", dg) - dg)
    dlow = 0.5 * (np.einsum("...nijm->...nmij", d2g) + np.einsum("...njim->...nmij", d2g)
                  - d2g)
    gam = np.einsum("...km,...mij->...kij", ginv, low)
    # dgam[n, k, i, j] = d_n Gamma^k_ij
    dgam = (np.einsum("...nkm,...mij->...nkij", dginv, low)
            + np.einsum("...km,...nmij->...nkij", ginv, dlow))
    ricci = (np.einsum("...kkij->...ij", dgam)
             - np.einsum("...jkik->...ij", dgam)
             + np.einsum("...kkl,...lij->...ij", gam, gam)
             - np.einsum("...kjl,...lik->...ij", gam, gam))
    return np.einsum("...ij,...ij->...", ginv, ricci)


def finite_difference_metric(metric: AmbientMetric, step: float = 1e-4) -> AmbientMetric:
    """Copy of ``metric`` whose derivatives come from central differences.

    Only meant as an independent check of the analytic derivative code.
    """

    class _FD(AmbientMetric):
        def dmetric_at(self, x):
            x = np.asarray(x, dtype=float)
            h = step * np.maximum(1.0, np.linalg.norm(x, axis=-1))[..., None]
            parts = []
            for k in range(3):
                e = np.zeros(3)
                e[k] = 1.0
                parts.append((metric.metric_at(x + h * e) - metric.metric_at(x - h * e))
                             / (2 * h[..., None]))
            return np.stack(parts, axis=-3)

        def christoffel_at(self, x):
            return christoffel_from_derivatives(self.metric_at(x), self.dmetric_at(x))

    return _FD(metric.kind, metric.m, metric.perturbation, metric.r_min)


def sphere_directions(n: int = 64) -> np.ndarray:
    """Deterministic, nearly uniform unit vectors (Fibonacci lattice)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z ** 2)
    ang = np.pi * (3.0 - np.sqrt(5.0)) * k
    return np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=-1)


@dataclass(frozen=True)
class DecayReport:
    """``suprema[s, k] = max over directions of r^(2+k) |d^k b|`` on shell ``s``."""

    shells: tuple[float, ...]
    suprema: np.ndarray
    bounded: bool

    @property
    def witness(self) -> float:
        return float(self.suprema.sum(axis=1).max())


def validate_decay(metric: AmbientMetric, shells: Sequence[float],
                   directions: int = 64) -> DecayReport:
    """Sample ``r^(2+k)|d^k b|`` (k = 0..3) on coordinate spheres."""
    shells = tuple(float(r) for r in shells)
    if not shells or any(b <= a for a, b in zip(shells, shells[1:])):
        raise ValueError("shells must be non-empty and increasing")
    dirs = sphere_directions(directions)
    sup = np.zeros((len(shells), 4))
    for s, r in enumerate(shells):
        parts = metric.perturbation_parts(r * dirs)
        for k, part in enumerate(parts):
            norm = np.abs(part).reshape(len(dirs), -1).max(axis=1)
            sup[s, k] = r ** (2 + k) * norm.max()
    totals = sup.sum(axis=1)
    bounded = bool(totals[-1] <= 2.0 * totals[0] + 1e-300)
    return DecayReport(shells, sup, bounded)


def build_metric(kind: str, m: float = 0.0, b: PerturbationField | None = None,
                 r_min: float = 1.0) -> AmbientMetric:
    """Construct and validate an ambient metric."""
    if kind not in KINDS:
        raise MetricError(f"unknown metric kind {kind!r}")
    if kind == "euclidean":
        if b is not None:
            raise MetricError("the flat metric takes no perturbation")
        return AmbientMetric("euclidean", 0.0, None, r_min)
    if not m > 0:
        raise MetricError("mass parameter m must be positive")
    if kind == "schwarzschild":
        if b is not None:
            raise MetricError("use kind='perturbed' with a perturbation field")
        return AmbientMetric("schwarzschild", m, None, r_min)
    if b is None:
        raise MetricError("perturbed metric needs a perturbation field")
    if not b.axisymmetric_flag:
        raise MetricError("only axisymmetric perturbations are supported")
    metric = AmbientMetric("perturbed", m, b, r_min)
    report = validate_decay(metric, [r_min * 10.0 ** k for k in range(4)])
    if not report.bounded:
        raise MetricError(f"perturbation {b.name} does not decay like r^-2")
    for r in (r_min, 10 * r_min):
        eig = np.linalg.eigvalsh(metric.metric_at(r * sphere_directions(64)))
        if np.min(eig) <= 0:
            raise MetricError(f"metric not positive definite at r={r:g}")
    return metric


def normal_derivative_phi(metric: AmbientMetric, x, n):
    """Euclidean directional derivative ``n . grad(phi)`` of the conformal factor."""
    x = np.asarray(x, dtype=float)
    if np.any(np.linalg.norm(x, axis=-1) == 0):
        raise MetricError("conformal factor is singular at the origin")
    if metric.m == 0:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    return np.sum(np.asarray(n, dtype=float) * metric.conformal_gradient(x), axis=-1)
