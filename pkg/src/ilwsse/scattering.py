"""Weyl law, Weyl density, tail integrals and modified scattering data.

Everything here reduces to integrals over x of functions of the level gap
``s = 2*delta*(u(x) - E)``, with ``E`` the turning-point level of ``zeta``:

* ``D(s) = W_0 - W_-1`` drives the Weyl law ``R = (1/4 delta) int D dx``;
* ``D'(s) = W_-1/(1+W_-1) - W_0/(1+W_0) = 1/(1+W_0) - 1/(1+W_-1)`` drives the density;
* ``kappa + Im W_-1 / (2 delta)`` (with ``s < 0``) drives the tail integrals.

Here ``W_n`` is evaluated at ``-exp(-1 - s)``.  On the quadratrix that equals
``-2 delta zeta exp(-2 delta (zeta + u))``.  Square-root behaviour at
the turning points is removed by the substitution ``x = x_turn -/+ sigma^2``
before the adaptive Gauss-Kronrod rule sees the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, DomainError, ValidationError
from .profile import AdmissibleProfile, turning_points_level
from .quadrature import gk15
from .specfun import (
    QuadratrixPoint,
    dlevel_dkappa,
    kappa_max as _kappa_max,
    level_E,
    level_of_kappa,
    level_pair,
    level_pair_shifted,
    quadratrix,
)

__all__ = [
    "ScatteringData",
    "weyl_R",
    "weyl_R_kappa",
    "weyl_density",
    "tail_theta",
    "tail_theta_kappa",
    "modified_data",
    "tail_integrand",
    "RECORD_VERSION",
]

RECORD_VERSION = 1
ATOL = 1e-13
RTOL = 1e-11
# Below this fraction of kappa_max the density is evaluated at the floor
# itself: rho is continuous from the right at kappa = 0, while the level
# E(kappa) ~ delta*kappa^2 makes the turning points run off to infinity.
KAPPA_FLOOR = 1e-9
# Squared distance (relative to |x|) from a turning point inside which the
# gap is taken from a quadratic Taylor model instead of u(x) - E.
_TAYLOR_WINDOW = 1e-5


def _D(s):
    v0, vm = level_pair_shifted(s)
    return (v0 - vm).real


def _Dprime(s):
    # W/(1+W) = 1 - 1/(1+W), so the difference only needs the shifted values
    v0, vm = level_pair_shifted(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (1.0 / v0 - 1.0 / vm).real
    return np.where(np.isfinite(val), val, 0.0)


def tail_integrand(s, kappa, delta):
    """``kappa + Im W_-1(-exp(-1-s))/(2 delta)``; equals kappa where ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    _, wm = level_pair(np.minimum(s, 0.0))
    return kappa + wm.imag / (2.0 * delta)


def _gap(u, level, delta):
    return 2.0 * delta * (u - level)


def _allowed_integral(h_of_s, profile, level, delta, xm, xp, lo=None, *,
                      weight=None, atol=ATOL, rtol=RTOL):
    """``int h(s(x)) dx`` over ``[max(lo, xm), xp]`` where ``s`` is the level gap.

    ``h`` may have a square-root singularity where ``s = 0``.  The interval
    is split at the profile maximum and each half is mapped by
    ``x = x_turn -/+ sigma^2`` from its turning point, which keeps the
    integrand smooth both when the turning points merge and when they run
    far out into the exponential tails.  Within rounding distance of a
    turning point the gap is replaced by its linearization, since the
    computed ``u - E`` there has no correct digits (the abscissa itself is
    rounded) and may even be negative.  ``weight(x)`` multiplies the
    integrand (the characteristic Jacobian for evolved profiles).
    """
    if lo is None or lo < xm:
        lo = xm
    if lo >= xp:
        return 0.0
    x_mid = min(max(profile.x_max, xm), xp)
    # Near the top of the lobe the gap u - E is a difference of nearly equal
    # numbers; ask for no more digits than it carries.
    depth = max(profile.u_max - level, 1e-300)
    rtol = max(rtol, 4e-15 * profile.u_max / depth)

    def piece(x_turn, side, s_lo, s_hi):
        # second-order Taylor data at the turning point
        d1 = float(profile.du0(x_turn))
        d2 = float(profile.d2u0(x_turn))
        cutoff = _TAYLOR_WINDOW * max(1.0, abs(x_turn))

        def f(sg):
            q = sg * sg
            x = x_turn - side * q
            gap = _gap(profile.u0(x), level, delta)
            local = 2.0 * delta * q * (-side * d1 + 0.5 * d2 * q)
            gap = np.where(q < cutoff, local, gap)
            gap = np.where(gap > 0.0, gap, 2.0 * delta * abs(d1) * q)
            val = h_of_s(gap) * 2.0 * sg
            return val if weight is None else val * weight(x)

        return gk15(f, s_lo, s_hi, atol=atol, rtol=rtol)[0]

    total = 0.0
    a = max(lo, x_mid)
    if xp > a:
        total += piece(xp, +1.0, 0.0, math.sqrt(xp - a))
    if lo < x_mid:
        total += piece(xm, -1.0, math.sqrt(lo - xm), math.sqrt(x_mid - xm))
    return total


def _half_line(g_of_x, x0, x_end, *, atol=ATOL, rtol=RTOL):
    """``int g dx`` from ``x0`` to ``x_end`` with ``x = x0 + (x_end - x0) sigma^2``.

    Used for tails, where ``x_end`` is the edge of the profile's validated
    span (beyond it ``u`` is below 1e-20 of its maximum and every tail
    integrand here is proportional to ``u``).  The squared map removes a
    square-root singularity at ``x0``.
    """
    length = x_end - x0
    if length == 0.0:
        return 0.0

    def f(sg):
        val = g_of_x(x0 + length * sg * sg) * 2.0 * sg * length
        return np.where(np.isfinite(val), val, 0.0)

    return gk15(f, 0.0, 1.0, atol=atol, rtol=rtol)[0]


def _check_kappa(profile, kappa, delta):
    km = _kappa_max(profile.u_max, delta)
    if kappa < 0 or kappa > km * (1 + 1e-13):
        raise DomainError(f"kappa={kappa} outside [0, kappa_max={km}]")
    return km


# ---------------------------------------------------------------------------
# Weyl law and density
# ---------------------------------------------------------------------------

def weyl_R_kappa(profile: AdmissibleProfile, kappa: float, delta: float) -> float:
    """``R^Wyl(zeta(kappa))`` (real, nonnegative)."""
    km = _check_kappa(profile, kappa, delta)
    if kappa >= km:
        return 0.0
    if kappa == 0.0:
        g = lambda x: _D(_gap(profile.u0(x), 0.0, delta))
        total = (_half_line(g, profile.x_max, profile.x_max + profile.span)
                 - _half_line(g, profile.x_max, profile.x_max - profile.span))
        return total / (4.0 * delta)
    level = float(level_of_kappa(kappa, delta))
    xm, xp = turning_points_level(profile, min(level, profile.u_max))
    return max(_allowed_integral(_D, profile, level, delta, xm, xp), 0.0) / (4.0 * delta)


def weyl_R(profile: AdmissibleProfile, zeta: complex, delta: float) -> float:
    """The ILW Weyl law at a point ``zeta`` of the quadratrix arc."""
    return weyl_R_kappa(profile, _kappa_of(zeta, delta), delta)


def _kappa_of(zeta, delta):
    kappa = float(complex(zeta).imag)
    if kappa < 0:
        raise DomainError("zeta must lie on the upper quadratrix arc")
    return kappa


def weyl_density(profile: AdmissibleProfile, kappa: float, delta: float) -> float:
    """``rho^Wyl(kappa) = -dR/dkappa`` (nonnegative)."""
    km = _check_kappa(profile, kappa, delta)
    kappa = max(kappa, KAPPA_FLOOR * km)
    if kappa >= km:
        kappa = km * (1 - 1e-12)
    level = float(level_of_kappa(kappa, delta))
    xm, xp = turning_points_level(profile, min(level, profile.u_max))
    integral = _allowed_integral(_Dprime, profile, level, delta, xm, xp)
    return 0.5 * float(dlevel_dkappa(kappa, delta)) * integral


def weyl_density_array(profile, kappas, delta):
    return np.array([weyl_density(profile, float(k), delta) for k in np.atleast_1d(kappas)])


# ---------------------------------------------------------------------------
# tail integrals
# ---------------------------------------------------------------------------

def _check_time(profile, t):
    from .profile import catastrophe_time

    if t < 0 or (t > 0 and t >= catastrophe_time(profile)):
        raise DomainError(f"t={t} is outside [0, t_c)")


def _tail_piece(profile, kappa, level, delta, y0, y1, t):
    """``int_{y0}^{y1} f(u0(y)) (1 + 2 t u0'(y)) dy`` with ``f`` the tail integrand.

    ``y0`` is a turning point, so the integral runs through the forbidden
    side only; the squared map absorbs the square-root onset at ``y0``.
    """
    def g(y):
        val = tail_integrand(_gap(profile.u0(y), level, delta), kappa, delta)
        if t:
            val = val * (1.0 + 2.0 * t * profile.du0(y))
        return val

    return _half_line(g, y0, y1)


def tail_theta_kappa(profile: AdmissibleProfile, kappa: float, side: str, delta: float,
                     *, t: float = 0.0) -> float:
    """Tail integral ``theta_+`` or ``theta_-`` at ``zeta(kappa)``.

    ``theta_+ = kappa*x_+ + int_{x_+}^{inf} f dx`` and, mirrored,
    ``theta_- = -kappa*x_- + int_{-inf}^{x_-} f dx``, where
    ``f = Im[zeta + W_-1/(2 delta)]``.  The sign of ``theta_-`` is chosen so
    that a profile and its reflection swap the two tails.  With ``t > 0``
    the Burgers-evolved profile is used, written in the characteristic
    variable ``y`` (``x = y + 2 t u0(y)``) so that the turning points stay
    put and only move the linear term.
    """
    km = _check_kappa(profile, kappa, delta)
    if side not in ("+", "-"):
        raise DomainError("side must be '+' or '-'")
    _check_time(profile, t)
    sgn = 1.0 if side == "+" else -1.0
    if kappa == 0.0:
        return 0.0
    level = float(level_of_kappa(min(kappa, km), delta))
    level = min(level, profile.u_max)
    tp = turning_points_level(profile, level)
    y_turn = tp.x_plus if side == "+" else tp.x_minus
    y_end = profile.x_max + sgn * profile.span
    linear = sgn * kappa * (y_turn + 2.0 * level * t)
    if sgn * (y_end - y_turn) <= 0:
        return linear
    return linear + sgn * _tail_piece(profile, kappa, level, delta, y_turn, y_end, t)


def tail_theta(profile: AdmissibleProfile, zeta: complex, side: str, delta: float) -> float:
    return tail_theta_kappa(profile, _kappa_of(zeta, delta), side, delta)


# ---------------------------------------------------------------------------
# modified scattering data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScatteringData:
    """Leading-order scattering data for an N-soliton ensemble.

    ``log_c[n]`` is the log norming constant of ``eigen[n]``; raw constants
    are never formed because they overflow for small ``eps_N``.
    """

    N: int
    eps_N: float
    delta: float
    eigen: tuple
    log_c: tuple
    theta_plus: tuple = ()
    kappa_max: float = float("nan")
    profile_spec: dict = field(default_factory=dict, compare=False)

    @property
    def kappa(self) -> np.ndarray:
        return np.array([p.kappa for p in self.eigen])

    @property
    def zeta(self) -> np.ndarray:
        return np.array([p.zeta for p in self.eigen])

    @property
    def reflection_coefficient(self) -> float:
        """Identically zero by construction."""
        return 0.0

    def to_record(self) -> str:
        """Versioned plain-text record (one eigenvalue per line)."""
        lines = [
            f"# ilwsse scattering-data record v{RECORD_VERSION}",
            f"version {RECORD_VERSION}",
            f"N {self.N}",
            f"delta {float(self.delta)!r}",
            f"eps_N {float(self.eps_N)!r}",
            f"kappa_max {float(self.kappa_max)!r}",
            "columns n kappa re_zeta log_c theta_plus",
        ]
        thetas = self.theta_plus or (float("nan"),) * self.N
        for n, (p, lc, th) in enumerate(zip(self.eigen, self.log_c, thetas), start=1):
            lines.append(f"{n} {float(p.kappa)!r} {float(p.zeta.real)!r} {float(lc)!r} {float(th)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "ScatteringData":
        head = {}
        rows = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0].isdigit() and "N" in head:
                rows.append(parts)
            else:
                head[parts[0]] = parts[1:]
        try:
            version = int(head["version"][0])
            N = int(head["N"][0])
            delta = float(head["delta"][0])
            eps = float(head["eps_N"][0])
            km = float(head.get("kappa_max", ["nan"])[0])
        except (KeyError, ValueError, IndexError) as exc:
            raise ValidationError(f"malformed scattering record header: {exc}") from exc
        if version != RECORD_VERSION:
            raise ValidationError(f"unsupported scattering record version {version}")
        if len(rows) != N:
            raise ValidationError(f"record declares N={N} but lists {len(rows)} eigenvalues")
        eigen, log_c, theta = [], [], []
        for parts in rows:
            kappa = float(parts[1])
            pt = quadratrix(kappa, delta)
            re_zeta = float(parts[2])
            if abs(pt.zeta.real - re_zeta) > 1e-9 * (1 + abs(re_zeta)):
                raise ValidationError("record eigenvalue is not on the quadratrix")
            eigen.append(pt)
            log_c.append(float(parts[3]))
            theta.append(float(parts[4]) if len(parts) > 4 else float("nan"))
        return cls(N, eps, delta, tuple(eigen), tuple(log_c), tuple(theta), km)


def modified_data(profile: AdmissibleProfile, N: int, delta: float) -> ScatteringData:
    """Eigenvalues from the Weyl law and log norming constants ``+2 theta_+/eps_N``.

    The sign of the exponent is fixed by the Fredholm expansion of the
    partition function; see the README for the derivation.
    """
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    N = int(N)
    km = _kappa_max(profile.u_max, delta)
    R0 = weyl_R_kappa(profile, 0.0, delta)
    eps = R0 / (math.pi * N)
    eigen, log_c, thetas = [], [], []
    for n in range(1, N + 1):
        target = math.pi * (n - 0.5) * eps
        f = lambda k: weyl_R_kappa(profile, k, delta) - target
        try:
            kappa = brentq(f, 0.0, km, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        except ValueError as exc:
            raise BracketError(f"Weyl-law root for n={n} is not bracketed") from exc
        if abs(f(kappa)) > 1e-11 * R0:
            raise BracketError(f"Weyl-law residual too large for n={n}")
        th = tail_theta_kappa(profile, kappa, "+", delta)
        eigen.append(quadratrix(kappa, delta))
        thetas.append(th)
        log_c.append(2.0 * th / eps)
    return ScatteringData(N, eps, float(delta), tuple(eigen), tuple(log_c), tuple(thetas), km,
                          dict(profile.spec))
