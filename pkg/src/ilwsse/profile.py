"""Admissible initial profiles, turning points and the inviscid Burgers flow.

A profile is positive, decays at both ends and has a single maximum.  It is
built from a small spec: either a named analytic family with parameters, or
a table of samples interpolated by monotone cubics.  Parse the spec from a
JSON file with ``load_profile_spec`` or from ``NAME:key=val,...`` with
``parse_profile_arg``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .errors import BracketError, DomainError, UsageError, ValidationError

__all__ = [
    "AdmissibleProfile",
    "TurningPoints",
    "BurgersState",
    "build_profile",
    "parse_profile_arg",
    "load_profile_spec",
    "turning_points",
    "turning_points_level",
    "catastrophe_time",
    "burgers_eval",
    "burgers_state",
]

GRID_POINTS = 4096
DEFAULT_SPAN = 30.0


@dataclass(frozen=True)
class AdmissibleProfile:
    """An initial condition with its lobe geometry.

    ``u0``, ``du0`` and ``d2u0`` accept and return numpy arrays.  ``spec`` is
    the canonical description the profile was built from and is what gets
    hashed and serialized.
    """

    u0: Callable
    du0: Callable
    d2u0: Callable
    x_max: float
    u_max: float
    decay_certificate: float
    span: float
    spec: dict = field(compare=False)

    @property
    def name(self) -> str:
        return self.spec["kind"]

    def l2_norm_squared(self) -> float:
        f = lambda x: self.u0(np.asarray(x)) ** 2
        left = quad(f, -np.inf, self.x_max, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        right = quad(f, self.x_max, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return left + right

    def mass(self) -> float:
        left = quad(self.u0, -np.inf, self.x_max, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        right = quad(self.u0, self.x_max, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return left + right


class TurningPoints:
    """Pair ``(x_minus, x_plus)``; ``clipped`` marks levels below the grid floor."""

    __slots__ = ("x_minus", "x_plus", "clipped")

    def __init__(self, x_minus, x_plus, clipped=False):
        self.x_minus = float(x_minus)
        self.x_plus = float(x_plus)
        self.clipped = bool(clipped)

    def __iter__(self):
        yield self.x_minus
        yield self.x_plus

    def __repr__(self):
        flag = ", clipped" if self.clipped else ""
        return f"TurningPoints({self.x_minus!r}, {self.x_plus!r}{flag})"


# ---------------------------------------------------------------------------
# analytic families
# ---------------------------------------------------------------------------

def _sech2_family(amplitude=1.0, center=0.0, width=1.0):
    A, c, w = float(amplitude), float(center), float(width)

    def sech2(y):
        e = np.exp(-2.0 * np.abs(y))
        return 4.0 * e / (1.0 + e) ** 2

    def u0(x):
        return A * sech2((np.asarray(x, dtype=float) - c) / w)

    def du0(x):
        y = (np.asarray(x, dtype=float) - c) / w
        return -2.0 * A / w * sech2(y) * np.tanh(y)

    def d2u0(x):
        y = (np.asarray(x, dtype=float) - c) / w
        t = np.tanh(y)
        return 2.0 * A / (w * w) * sech2(y) * (3.0 * t * t - 1.0)

    return u0, du0, d2u0, {"amplitude": A, "center": c, "width": w}


def _gaussian_family(amplitude=1.0, center=0.0, width=1.0):
    A, c, w = float(amplitude), float(center), float(width)

    def u0(x):
        y = (np.asarray(x, dtype=float) - c) / w
        return A * np.exp(-y * y)

    def du0(x):
        y = (np.asarray(x, dtype=float) - c) / w
        return -2.0 * A / w * y * np.exp(-y * y)

    def d2u0(x):
        y = (np.asarray(x, dtype=float) - c) / w
        return 2.0 * A / (w * w) * (2.0 * y * y - 1.0) * np.exp(-y * y)

    return u0, du0, d2u0, {"amplitude": A, "center": c, "width": w}


_FAMILIES = {
    "sech2": _sech2_family,
    "gaussian": _gaussian_family,
}
_ALIASES = {"sech^2": "sech2", "sech²": "sech2", "gaussian-lobe": "gaussian", "gauss": "gaussian"}


def _tabulated(x, u):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim != 1 or x.shape != u.shape or x.size < 5:
        raise ValidationError("tabulated profile needs matching 1-D x and u arrays (>= 5 samples)")
    if np.any(np.diff(x) <= 0):
        raise ValidationError("tabulated x samples must be strictly increasing")
    if np.any(u <= 0):
        raise ValidationError("positivity violated: tabulated u must be > 0")
    interp = PchipInterpolator(x, u, extrapolate=False)
    d1 = interp.derivative()
    d2 = d1.derivative()
    lam_l = d1(x[0]) / u[0]
    lam_r = -d1(x[-1]) / u[-1]
    if lam_l <= 0 or lam_r <= 0:
        raise ValidationError("tabulated profile must decrease toward both ends of the table")
    xl, xr, ul, ur = x[0], x[-1], u[0], u[-1]

    def u0(xx):
        xx = np.asarray(xx, dtype=float)
        out = np.empty_like(xx)
        left, right = xx < xl, xx > xr
        mid = ~(left | right)
        out[mid] = interp(xx[mid])
        out[left] = ul * np.exp(lam_l * (xx[left] - xl))
        out[right] = ur * np.exp(-lam_r * (xx[right] - xr))
        return out

    def du0(xx):
        xx = np.asarray(xx, dtype=float)
        out = np.empty_like(xx)
        left, right = xx < xl, xx > xr
        mid = ~(left | right)
        out[mid] = d1(xx[mid])
        out[left] = lam_l * ul * np.exp(lam_l * (xx[left] - xl))
        out[right] = -lam_r * ur * np.exp(-lam_r * (xx[right] - xr))
        return out

    def d2u0(xx):
        xx = np.asarray(xx, dtype=float)
        out = np.empty_like(xx)
        left, right = xx < xl, xx > xr
        mid = ~(left | right)
        out[mid] = d2(xx[mid])
        out[left] = lam_l ** 2 * ul * np.exp(lam_l * (xx[left] - xl))
        out[right] = lam_r ** 2 * ur * np.exp(-lam_r * (xx[right] - xr))
        return out

    return u0, du0, d2u0, {"x": x.tolist(), "u": u.tolist()}


def _callable_shape(f):
    def g(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(f(x), dtype=float) * np.ones_like(x)
    return g


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def build_profile(spec, **params) -> AdmissibleProfile:
    """Build and validate a profile.

    ``spec`` is a family name (``"sech2"``, ``"gaussian"``), a dict with a
    ``kind`` key, or ``"tabulated"`` with ``x`` and ``u`` sample arrays.
    Raises ``ValidationError`` naming the first invariant that fails.
    """
    if isinstance(spec, dict):
        params = {**{k: v for k, v in spec.items() if k != "kind"}, **params}
        kind = spec.get("kind")
    else:
        kind = spec
    if not isinstance(kind, str):
        raise UsageError("profile spec needs a 'kind'")
    kind = _ALIASES.get(kind.lower(), kind.lower())
    if kind == "tabulated":
        try:
            u0, du0, d2u0, canon = _tabulated(params["x"], params["u"])
        except KeyError as exc:
            raise UsageError("tabulated profile needs 'x' and 'u'") from exc
    elif kind in _FAMILIES:
        try:
            u0, du0, d2u0, canon = _FAMILIES[kind](**params)
        except TypeError as exc:
            raise UsageError(f"bad parameters for profile '{kind}': {exc}") from exc
        if canon["amplitude"] <= 0:
            raise ValidationError("positivity violated: amplitude must be > 0")
        if canon["width"] <= 0:
            raise ValidationError("width must be > 0")
    else:
        raise UsageError(f"unknown profile kind '{kind}'")
    canon = {"kind": kind, **canon}
    return _finish(u0, du0, d2u0, canon)


def profile_from_functions(u0, du0, d2u0=None, *, label="custom") -> AdmissibleProfile:
    """Validate arbitrary callables as a profile (used for two-lobe rejection tests)."""
    if d2u0 is None:
        def d2u0(x, _d=du0):
            x = np.asarray(x, dtype=float)
            h = 1e-5
            return (_d(x + h) - _d(x - h)) / (2 * h)
    return _finish(_callable_shape(u0), _callable_shape(du0), _callable_shape(d2u0),
                   {"kind": label})


def _finish(u0, du0, d2u0, canon):
    coarse = np.linspace(-200.0, 200.0, 40001)
    vals = u0(coarse)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("profile values must be finite")
    i = int(np.argmax(vals))
    lo, hi = coarse[max(i - 1, 0)], coarse[min(i + 1, coarse.size - 1)]
    res = minimize_scalar(lambda x: -float(u0(np.array(x))), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-13})
    x_max = float(res.x)
    d_lo, d_hi = du0(np.array(lo)), du0(np.array(hi))
    if d_lo > 0 > d_hi:
        x_max = brentq(lambda x: float(du0(np.array(x))), lo, hi, xtol=1e-15, rtol=8.9e-16)
    u_max = float(u0(np.array(x_max)))
    if u_max <= 0:
        raise ValidationError("positivity violated: maximum is not positive")

    span = DEFAULT_SPAN
    while float(u0(np.array(x_max - span))) > 1e-20 * u_max or \
            float(u0(np.array(x_max + span))) > 1e-20 * u_max:
        span *= 2.0
        if span > 1e5:
            raise ValidationError("decay violated: profile does not vanish at infinity")
    grid = np.linspace(x_max - span, x_max + span, GRID_POINTS)
    u = u0(grid)
    du = du0(grid)
    if np.any(u < 0):
        raise ValidationError(f"positivity violated at x={grid[np.argmax(u < 0)]:.6g}")
    representable = u > 1e-250 * u_max
    if np.any((u == 0) & representable):
        raise ValidationError("positivity violated: profile vanishes inside its support")
    h = grid[1] - grid[0]
    left = (grid < x_max - h) & representable
    right = (grid > x_max + h) & representable
    if np.any(du[left] <= 0):
        raise ValidationError(
            f"single-lobe violated: du0 <= 0 at x={grid[left][np.argmax(du[left] <= 0)]:.6g} left of x_max")
    if np.any(du[right] >= 0):
        raise ValidationError(
            f"single-lobe violated: du0 >= 0 at x={grid[right][np.argmax(du[right] >= 0)]:.6g} right of x_max")
    if u[0] > 1e-8 * u_max or u[-1] > 1e-8 * u_max:
        raise ValidationError("decay violated: profile is not small at the grid ends")

    f = lambda x: (np.asarray(x) ** 2 + 1.0) * u0(np.asarray(x))
    # only finiteness is certified here, so a roundoff warning is irrelevant
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        cert = quad(f, -np.inf, x_max, limit=200, epsabs=1e-12, epsrel=1e-10)[0] \
            + quad(f, x_max, np.inf, limit=200, epsabs=1e-12, epsrel=1e-10)[0]
    if not math.isfinite(cert):
        raise ValidationError("decay violated: the moment integral of (x^2+1)u0 diverges")
    return AdmissibleProfile(u0, du0, d2u0, x_max, u_max, float(cert), span, canon)


def parse_profile_arg(text: str) -> AdmissibleProfile:
    """Parse ``NAME[:key=val,key=val]``, e.g. ``sech2:amplitude=0.5,center=1``."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise UsageError(f"profile parameter '{item}' is not key=value")
            try:
                params[key.strip()] = float(val)
            except ValueError as exc:
                raise UsageError(f"profile parameter '{key}' must be numeric") from exc
    return build_profile(name.strip(), **params)


def load_profile_spec(path) -> AdmissibleProfile:
    """Load a JSON profile spec file (schema documented in the README)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read profile spec {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("profile spec must be a JSON object")
    return build_profile(data)


# ---------------------------------------------------------------------------
# turning points, catastrophe time, characteristics
# ---------------------------------------------------------------------------

def _root_on_side(profile, level, side):
    u0 = profile.u0
    x0 = profile.x_max
    g = lambda x: float(u0(np.array(x))) - level
    step = 1.0
    far = x0 + side * step
    while g(far) > 0:
        if step >= profile.span:
            return x0 + side * profile.span, True
        step = min(2.0 * step, profile.span)
        far = x0 + side * step
    a, b = sorted((x0, far))
    root = brentq(g, a, b, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    d = float(profile.du0(np.array(root)))
    if d != 0:
        polished = root - g(root) / d
        if abs(g(polished)) <= abs(g(root)) and a <= polished <= b:
            root = polished
    return root, False


def turning_points_level(profile: AdmissibleProfile, level: float) -> TurningPoints:
    """Solve ``u0(x) = level`` on both sides of the maximum."""
    if level > profile.u_max * (1 + 1e-14) or level <= 0:
        raise DomainError(f"level {level!r} is outside (0, u_max={profile.u_max}]")
    if level >= profile.u_max:
        return TurningPoints(profile.x_max, profile.x_max)
    xm, cm = _root_on_side(profile, level, -1.0)
    xp, cp = _root_on_side(profile, level, +1.0)
    return TurningPoints(xm, xp, cm or cp)


def turning_points(profile: AdmissibleProfile, zeta: complex, delta: float) -> TurningPoints:
    """Turning points of the level ``E(zeta)`` for ``zeta`` on the quadratrix."""
    from .specfun import level_E

    return turning_points_level(profile, level_E(zeta, delta))


def catastrophe_time(profile: AdmissibleProfile) -> float:
    """``t_c = 1 / max(-2 u0')`` (the steepest descending slope)."""
    grid = np.linspace(profile.x_max, profile.x_max + profile.span, GRID_POINTS)
    d = profile.du0(grid)
    i = int(np.argmin(d))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda x: float(profile.du0(np.array(x))), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    x_star = float(res.x)
    # Newton polish on u0'' = 0 (the slope is stationary there)
    for _ in range(3):
        d2 = float(profile.d2u0(np.array(x_star)))
        h = 1e-4
        d3 = (float(profile.d2u0(np.array(x_star + h))) - float(profile.d2u0(np.array(x_star - h)))) / (2 * h)
        if d3 == 0:
            break
        nxt = x_star - d2 / d3
        if not lo <= nxt <= hi:
            break
        x_star = nxt
    slope = min(float(profile.du0(np.array(x_star))), float(d[i]))
    if slope >= 0:
        raise DomainError("profile never decreases; no gradient catastrophe")
    return 1.0 / (-2.0 * slope)


@dataclass(frozen=True)
class BurgersState:
    profile: AdmissibleProfile
    t: float
    t_c: float


def burgers_state(profile: AdmissibleProfile, t: float) -> BurgersState:
    t_c = catastrophe_time(profile)
    if not 0 <= t < t_c:
        raise DomainError(f"Burgers flow is only single valued for 0 <= t < t_c = {t_c:.12g}")
    return BurgersState(profile, float(t), t_c)


def characteristic_foot(profile: AdmissibleProfile, x, t: float, *, t_c: float | None = None):
    """Foot ``y`` of the characteristic through ``(x, t)``: ``x = y + 2 u0(y) t``."""
    if t_c is None:
        t_c = catastrophe_time(profile)
    if t < 0 or t >= t_c:
        raise DomainError(f"t={t} outside [0, t_c={t_c:.12g})")
    x = np.asarray(x, dtype=float)
    if t == 0:
        return x.copy()
    lo = x - 2.0 * t * profile.u_max
    hi = x.copy()
    phi = lambda y: y + 2.0 * t * profile.u0(y)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        above = phi(mid) > x
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= 1e-13 * (1.0 + np.abs(x))):
            break
    y = 0.5 * (lo + hi)
    for _ in range(2):
        dphi = 1.0 + 2.0 * t * profile.du0(y)
        if np.any(dphi <= 1e-10):
            raise BracketError("characteristic map is degenerate (too close to t_c)")
        y = y - (phi(y) - x) / dphi
    resid = np.abs(x - phi(y))
    if np.any(resid > 1e-12 * (1.0 + np.abs(x))):
        raise BracketError(f"characteristic residual {resid.max():.3g} exceeds tolerance")
    return y


def burgers_eval(profile: AdmissibleProfile, x, t: float, *, t_c: float | None = None):
    """Inviscid Burgers solution ``u0(y)`` with ``x = y + 2 u0(y) t`` (vectorized)."""
    y = characteristic_foot(profile, x, t, t_c=t_c)
    out = profile.u0(y)
    return float(out) if np.ndim(out) == 0 else out
