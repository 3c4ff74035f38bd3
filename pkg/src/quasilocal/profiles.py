"""Generating curves of closed surfaces of revolution.

A profile is the plane curve ``(w(phi), h(phi))`` on ``[0, l]``; the surface
at scale ``a`` is ``(a w cos(theta), a w sin(theta), a h)``.  Profiles carry
derivatives up to third order, either in closed form or from a Chebyshev fit
of user samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import ConvexityError, ProfileError
from .numerics import CumulativeIntegral

__all__ = [
    "Profile",
    "SurfaceFamily",
    "ConditionConstants",
    "make_builtin",
    "spheroid",
    "from_samples",
    "load_profile_csv",
    "reparametrize_arclength",
    "validate_conditions",
    "BUILTIN_NAMES",
]

BUILTIN_NAMES = ("sphere", "ellipsoid_112", "custom")
CONDITION_GRID = 2048


class Profile:
    """Generating curve with derivatives.

    ``jet_fn(phi)`` must return an array of shape ``(2, 4) + phi.shape``:
    row 0 holds ``w, w', w'', w'''`` and row 1 the same for ``h``.
    """

    def __init__(self, jet_fn: Callable[[np.ndarray], np.ndarray], length: float,
                 name: str = "custom", arclength: bool = False):
        if not length > 0:
            raise ProfileError("profile length must be positive")
        self._jet_fn = jet_fn
        self.l = float(length)
        self.name = name
        self.arclength_flag = bool(arclength)

    def __repr__(self):
        return (f"Profile(name={self.name!r}, l={self.l:.15g}, "
                f"arclength={self.arclength_flag})")

    def jet(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.asarray(self._jet_fn(phi), dtype=float)

    def w(self, phi):
        return self.jet(phi)[0, 0]

    def h(self, phi):
        return self.jet(phi)[1, 0]

    def speed(self, phi):
        j = self.jet(phi)
        return np.hypot(j[0, 1], j[1, 1])

    def flipped(self) -> "Profile":
        """Mirror image ``h -> -h``."""
        src = self._jet_fn

        def jet(phi):
            j = np.array(src(phi), dtype=float)
            j[1] *= -1.0
            return j

        return Profile(jet, self.l, self.name, self.arclength_flag)

    def oriented(self) -> "Profile":
        """Return the profile with ``h' < 0`` in the interior, flipping if needed."""
        phi = np.linspace(0, self.l, 65)[1:-1]
        hp = self.jet(phi)[1, 1]
        if np.all(hp < 0):
            return self
        if np.all(hp > 0):
            return self.flipped()
        raise ConvexityError(f"{self.name}: h' changes sign, not convex")

    def pole_residuals(self) -> np.ndarray:
        """``w(0), w(l), h'(0), h'(l)``; all vanish for a closed surface."""
        j = self.jet(np.array([0.0, self.l]))
        return np.array([j[0, 0, 0], j[0, 0, 1], j[1, 1, 0], j[1, 1, 1]])


def spheroid(horizontal: float, vertical: float, name: str | None = None) -> Profile:
    """Profile ``w = A sin(phi)``, ``h = B cos(phi)`` on ``[0, pi]``."""
    A, B = float(horizontal), float(vertical)
    if not (A > 0 and B > 0):
        raise ProfileError("spheroid semi-axes must be positive")

    def jet(phi):
        s, c = np.sin(phi), np.cos(phi)
        return np.array([[A * s, A * c, -A * s, -A * c],
                         [B * c, -B * s, -B * c, B * s]])

    if name is None:
        name = "sphere" if A == B == 1.0 else f"spheroid_{A:g}_{B:g}"
    return Profile(jet, math.pi, name, arclength=(A == B == 1.0))


def make_builtin(name: str, params: Sequence[float] = ()) -> Profile:
    """Built-in profile by name.

    ``sphere`` and ``ellipsoid_112`` take no parameters; ``custom`` is the
    spheroid with semi-axes ``params = (horizontal, vertical)``.
    """
    params = list(params)
    if name == "sphere":
        return spheroid(1.0, 1.0, "sphere")
    if name == "ellipsoid_112":
        return spheroid(1.0, 2.0, "ellipsoid_112")
    if name == "custom":
        if len(params) != 2:
            raise ProfileError("custom profile needs two semi-axes")
        if min(params) <= 0:
            raise ProfileError("non-positive axis ratio")
        return spheroid(params[0], params[1])
    raise ProfileError(f"unknown built-in profile {name!r}")


# --- sampled profiles -------------------------------------------------------

def _cheb_jet(series: Chebyshev):
    d1 = series.deriv(1)
    d2 = series.deriv(2)
    d3 = series.deriv(3)
    return lambda x: np.array([series(x), d1(x), d2(x), d3(x)])


def from_samples(phi, w, h, name: str = "custom", degree: int | None = None,
                 closure_tol: float = 1e-6) -> Profile:
    """Chebyshev profile fitted to samples ``(phi, w, h)``.

    The fit is corrected by a low-order term so that ``w(0) = w(l) = 0`` and
    ``h'(0) = h'(l) = 0`` hold exactly.
    """
    phi = np.asarray(phi, dtype=float)
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    if phi.ndim != 1 or phi.shape != w.shape or phi.shape != h.shape:
        raise ProfileError("phi, w, h must be 1-D arrays of equal length")
    if phi.size < 8:
        raise ProfileError("need at least 8 samples")
    if np.any(np.diff(phi) <= 0):
        raise ProfileError("phi must be strictly increasing")
    if abs(w[0]) > closure_tol or abs(w[-1]) > closure_tol:
        raise ProfileError("first/last rows violate pole closure w = 0")
    length = phi[-1] - phi[0]
    x = phi - phi[0]
    # equispaced least squares stays well conditioned up to about n/2
    deg = degree if degree is not None else min((phi.size - 1) // 2, 32)
    domain = [0.0, length]
    wj = _cheb_jet(Chebyshev.fit(x, w, deg, domain=domain))
    hj = _cheb_jet(Chebyshev.fit(x, h, deg, domain=domain))

    w_end = wj(np.array([0.0, length]))[0]
    hp_end = hj(np.array([0.0, length]))[1]
    # the fit's end slopes are noisier than the sampled values
    slope_tol = 1e3 * closure_tol * max(1.0, np.abs(h).max()) / length
    if np.any(np.abs(hp_end) > slope_tol):
        raise ProfileError("samples violate pole closure h' = 0")

    def jet(t):
        t = np.asarray(t, dtype=float)
        jw = wj(t)
        jh = hj(t)
        # w -= linear interpolant of end values
        jw[0] -= w_end[0] + (w_end[1] - w_end[0]) * t / length
        jw[1] -= (w_end[1] - w_end[0]) / length
        # h -= q with q'(0) = h'(0), q'(l) = h'(l)
        slope = (hp_end[1] - hp_end[0]) / length
        jh[0] -= hp_end[0] * t + 0.5 * slope * t ** 2
        jh[1] -= hp_end[0] + slope * t
        jh[2] -= slope
        return np.array([jw, jh])

    return Profile(jet, length, name)


def load_profile_csv(path: str | Path, **kwargs) -> Profile:
    """Read a ``phi,w,h`` CSV file into a Chebyshev profile."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [c.strip() for c in next(reader)]
        if header != ["phi", "w", "h"]:
            raise ProfileError(f"{path}: header must be 'phi,w,h', got {header}")
        try:
            rows = [[float(c) for c in row] for row in reader if row]
        except ValueError as exc:
            raise ProfileError(f"{path}: {exc}") from exc
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ProfileError(f"{path}: expected three numeric columns")
    kwargs.setdefault("name", path.stem)
    return from_samples(data[:, 0], data[:, 1], data[:, 2], **kwargs)


# --- arclength ----------------------------------------------------------------

class _ArclengthMap:
    """Cumulative length table of a profile and its inverse."""

    def __init__(self, profile: Profile, tol: float):
        self.src = profile
        check = np.linspace(0.0, profile.l, 4097)
        if np.min(profile.speed(check)) < tol:
            raise ProfileError("degenerate tangent: |(w', h')| below tolerance")
        self.arc = CumulativeIntegral(profile.speed, 0.0, profile.l)
        self.edges = self.arc.edges
        self.cumulative = self.arc.table
        self.length = self.arc.total

    def invert(self, s):
        s = np.asarray(s, dtype=float)
        phi = np.interp(s, self.cumulative, self.edges)
        for _ in range(50):
            step = (self.arc(phi) - s) / self.src.speed(phi)
            phi = np.clip(phi - step, 0.0, self.src.l)
            if np.max(np.abs(step), initial=0.0) < 4e-16 * self.src.l:
                return phi
        if np.max(np.abs(step)) > 1e-12 * self.src.l:
            raise ProfileError("arclength inversion did not converge")
        return phi


def _arclength_jet(source: Profile, amap: _ArclengthMap):
    def jet(s):
        phi = amap.invert(s)
        j = source.jet(phi)
        x1, x2, x3 = j[:, 1], j[:, 2], j[:, 3]
        sig = np.hypot(x1[0], x1[1])
        sig1 = (x1[0] * x2[0] + x1[1] * x2[1]) / sig
        sig2 = ((x2[0] ** 2 + x2[1] ** 2 + x1[0] * x3[0] + x1[1] * x3[1]) / sig
                - sig1 ** 2 / sig)
        out = np.empty_like(j)
        out[:, 0] = j[:, 0]
        out[:, 1] = x1 / sig
        out[:, 2] = x2 / sig ** 2 - x1 * sig1 / sig ** 3
        out[:, 3] = (x3 / sig ** 3 - 3 * x2 * sig1 / sig ** 4
                     - x1 * sig2 / sig ** 4 + 3 * x1 * sig1 ** 2 / sig ** 5)
        return out

    return jet


def reparametrize_arclength(p: Profile, tol: float = 1e-10) -> Profile:
    """Same curve, parametrised by arclength; ``l`` becomes the curve length.

    The inverse length map is solved by Newton iteration on an exact
    cumulative-length table, and derivatives of the new parametrisation
    follow from the chain rule, so no re-fitting is involved.
    """
    amap = _ArclengthMap(p, tol)
    return Profile(_arclength_jet(p, amap), amap.length, p.name, arclength=True)


# --- families and conditions ---------------------------------------------------

@dataclass(frozen=True)
class SurfaceFamily:
    profile_at: Callable[[float], Profile]
    scale_list: tuple[float, ...]

    def __post_init__(self):
        scales = tuple(float(a) for a in self.scale_list)
        if not scales:
            raise ProfileError("scale_list is empty")
        if any(a <= 0 for a in scales) or any(b <= a for a, b in zip(scales, scales[1:])):
            raise ProfileError("scale_list must be positive and strictly increasing")
        object.__setattr__(self, "scale_list", scales)

    @classmethod
    def fixed(cls, profile: Profile, scales: Sequence[float]) -> "SurfaceFamily":
        return cls(lambda a: profile, tuple(scales))


@dataclass(frozen=True)
class ConditionConstants:
    """Best constants for ``a^2 K >= C1``, ``a H <= C2``, ``C3 <= r/a <= C4``."""

    C1: float
    C2: float
    C3: float
    C4: float

    def principal_curvature_bounds(self, a: float) -> tuple[float, float]:
        return self.C1 / (self.C2 * a), self.C2 / a


def _golden_extremum(f, lo, hi, maximize, iters=60):
    """Refine an extremum of a scalar function bracketed in ``[lo, hi]``."""
    sign = -1.0 if maximize else 1.0
    g = lambda t: sign * float(f(np.array([t]))[0])
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - inv * (hi - lo), lo + inv * (hi - lo)
    fc, fd = g(c), g(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = g(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = g(d)
    return sign * min(fc, fd)


def _grid_extremum(f, phi, values, maximize):
    """Grid extremum, polished by golden section between its neighbours."""
    i = int(np.argmax(values) if maximize else np.argmin(values))
    best = float(values[i])
    lo, hi = phi[max(i - 1, 0)], phi[min(i + 1, len(phi) - 1)]
    if 0 < i < len(phi) - 1:
        refined = _golden_extremum(f, lo, hi, maximize)
        best = max(best, refined) if maximize else min(best, refined)
    return best


def validate_conditions(family: SurfaceFamily) -> ConditionConstants:
    """Measure the convexity, mean-curvature and distance constants of a family.

    Quantities are sampled at 2048 cell midpoints plus both poles; each
    extremum is then refined by a golden-section search between the
    neighbouring grid nodes.
    """
    from .geometry import euclid_principal_curvatures

    c1, c2, c3, c4 = math.inf, 0.0, math.inf, 0.0
    for a in family.scale_list:
        p = family.profile_at(a).oriented()
        phi = np.concatenate([[0.0], (np.arange(CONDITION_GRID) + 0.5) * p.l / CONDITION_GRID,
                              [p.l]])
        k_mer, k_par = euclid_principal_curvatures(p, a, phi)
        K = k_mer * k_par
        H = k_mer + k_par
        if np.any(K <= 0) or np.any(k_mer <= 0):
            raise ConvexityError(f"{p.name} at a={a:g}: not convex (K <= 0)")
        if np.any(H <= 0):
            raise ConvexityError(f"{p.name} at a={a:g}: mean curvature not positive")
        j = p.jet(phi)
        r = np.hypot(j[0, 0], j[1, 0])
        if np.min(r) <= 0 or not np.all(np.isfinite(r)):
            raise ConvexityError(f"{p.name} at a={a:g}: surface meets the origin")

        def a2K(t, p=p, a=a):
            k1, k2 = euclid_principal_curvatures(p, a, t)
            return a * a * k1 * k2

        def aH(t, p=p, a=a):
            k1, k2 = euclid_principal_curvatures(p, a, t)
            return a * (k1 + k2)

        def radius(t, p=p):
            jj = p.jet(t)
            return np.hypot(jj[0, 0], jj[1, 0])

        c1 = min(c1, _grid_extremum(a2K, phi, a * a * K, maximize=False))
        c2 = max(c2, _grid_extremum(aH, phi, a * H, maximize=True))
        c3 = min(c3, _grid_extremum(radius, phi, r, maximize=False))
        c4 = max(c4, _grid_extremum(radius, phi, r, maximize=True))
    return ConditionConstants(c1, c2, c3, c4)
