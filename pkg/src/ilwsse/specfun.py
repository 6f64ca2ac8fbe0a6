"""Lambert-W branches, quadratrix geometry and the WKB building blocks.

Branch conventions follow Corless et al.: ``W_n`` is the n-th branch and every
branch cut runs along the negative real axis.  A point that lies exactly on a
cut takes the value from the upper side.  We enforce that by turning a
negative zero imaginary part into a positive one before evaluating.

The ILW scattering problem only ever needs ``W`` at arguments of the form
``-exp(-1 - s)`` with ``s = 2*delta*(u - E)`` real (see ``level_pair``).  That
family gets its own solver, written in the shifted variable ``v = w + 1``.  It
stays accurate to machine precision right up to the square-root branch point
``s = 0``, where the generic iteration loses half its digits.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, SingularityError

__all__ = [
    "Branch",
    "QuadratrixPoint",
    "lambert_w",
    "lambert_w_array",
    "level_pair",
    "quadratrix",
    "zeta_of_kappa",
    "dzeta_dkappa",
    "level_of_kappa",
    "dlevel_dkappa",
    "zeta_max",
    "kappa_max",
    "level_E",
    "G",
    "g_inverse",
    "amplitude",
    "ImaginaryResidualWarning",
]

_INV_E = math.exp(-1.0)
_MAX_ITER = 50


class ImaginaryResidualWarning(RuntimeWarning):
    """A quantity that should be real came back with a sizeable imaginary part."""


@dataclass(frozen=True)
class Branch:
    """A Lambert-W branch index."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)):
            raise DomainError(f"branch index must be an integer, got {self.n!r}")

    @property
    def reaches_minus_one(self) -> bool:
        """Only branches 0 and -1 contain w = -1 in their range."""
        return self.n in (0, -1)


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _upper_side(z):
    z = np.array(z, dtype=complex, copy=True)
    z.imag = z.imag + 0.0  # maps -0.0 to +0.0: cut values come from above
    return z


def _bp_series(p):
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3 - 43.0 / 540.0 * p ** 4 \
        + 769.0 / 17280.0 * p ** 5


def _asymptotic(z, n):
    l1 = np.log(z) + 2j * np.pi * n
    l2 = np.log(l1)
    return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)


def _initial_guess(n, z):
    w = np.empty_like(z)
    near_bp = np.abs(z + _INV_E) < 0.25
    p = np.sqrt(2.0 * (math.e * z + 1.0))
    if n == 0:
        near_bp = (np.abs(z + _INV_E) < 0.3) | (
            (z.imag == 0.0) & (z.real >= -1.0) & (z.real < -_INV_E))
        # Winitzki's global approximation for the principal branch, with the
        # log-asymptotic series in the left half plane away from the origin
        left = (z.real < 0.0) & (np.abs(z) >= 0.9) & ~near_bp
        l = np.log1p(np.where(near_bp | left, 0.0, z))
        w[:] = l * (1.0 - np.log1p(l) / (2.0 + l))
        w[left] = _asymptotic(z[left], 0)
        w[near_bp] = _bp_series(p[near_bp])
        return w
    w[:] = _asymptotic(z, n)
    if n == -1:
        sel = near_bp & (z.imag >= 0.0)
        w[sel] = _bp_series(-p[sel])
    elif n == 1:
        sel = near_bp & (z.imag < 0.0)
        w[sel] = _bp_series(-p[sel])
    return w


def _halley(z, w):
    done = np.zeros(z.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        act = ~done
        if not act.any():
            return w, done
        wa = w[act]
        ew = np.exp(wa)
        f = wa * ew - z[act]
        wp1 = wa + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            den = ew * wp1 - (wa + 2.0) * f / (2.0 * wp1)
            step = np.where(f == 0, 0.0, f / den)
        step = np.where(np.isfinite(step), step, 0.0)
        wn = wa - step
        w[act] = wn
        conv = np.abs(step) <= 2e-15 * np.maximum(np.abs(wn), 1e-300)
        # near the branch point W is ill-conditioned: the step can stall above
        # rounding while the residual w e^w - z is already at rounding level
        conv |= np.abs(f) <= 4e-16 * (np.abs(wa * ew) + np.abs(z[act]))
        idx = np.flatnonzero(act)
        done[idx[conv]] = True
    return w, done


def lambert_w_array(branch, z):
    """Vectorized ``W_branch(z)`` for complex ``z`` (any shape)."""
    n = int(branch)
    z = _upper_side(z)
    shape = z.shape
    z = z.ravel()
    out = np.empty_like(z)
    zero = z == 0
    if zero.any():
        if n != 0:
            raise DomainError(f"W_{n}(0) is a logarithmic singularity")
        out[zero] = 0.0
    bp = (z == -_INV_E) & (n in (0, -1))
    out[bp] = -1.0
    todo = ~(zero | bp)
    if todo.any():
        zz = z[todo]
        real_case = (zz.imag == 0.0) & (
            ((n == 0) & (zz.real >= -_INV_E)) | ((n == -1) & (zz.real >= -_INV_E) & (zz.real < 0)))
        w = _initial_guess(n, zz)
        w[real_case] = w[real_case].real
        w, ok = _halley(zz, w)
        w[real_case] = w[real_case].real
        if not ok.all():
            bad = zz[~ok][0]
            raise ConvergenceError(f"Lambert W_{n} did not converge at z={bad!r}")
        out[todo] = w
    return out.reshape(shape)


def lambert_w(branch: int, z: complex) -> complex:
    """Branch ``branch`` of the Lambert W function at a single point.

    Values on a branch cut are taken from above.  Raises ``DomainError`` for
    ``z == 0`` off the principal branch and ``ConvergenceError`` if Halley's
    iteration fails to settle within 50 steps.
    """
    Branch(branch)
    return complex(lambert_w_array(branch, np.array([z], dtype=complex))[0])


def level_pair(s):
    """Return ``(W_0, W_-1)`` evaluated at ``-exp(-1 - s)`` for real ``s``.

    For ``s >= 0`` both values are real with ``W_0 >= -1 >= W_-1``.  For
    ``s < 0`` the argument lies on the cut below ``-1/e``.  There the two
    values are complex conjugates, and ``W_-1`` sits in the lower half plane
    (upper-side convention).  The iteration runs on ``v = w + 1``, whose
    defining relation ``log(1 - v) + v + s = 0`` has no cancellation near
    the branch point.
    """
    v0, vm = level_pair_shifted(s)
    return v0 - 1.0, vm - 1.0


def level_pair_shifted(s):
    """``(1 + W_0, 1 + W_-1)`` at ``-exp(-1 - s)``, accurate relative to each value.

    Near ``s = 0`` both shifted values are ``O(sqrt(s))``; forming them from
    ``level_pair`` would lose every digit to cancellation.
    """
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = s.ravel()
    v0 = _level_branch(s, upper=True)
    vm = _level_branch(s, upper=False)
    return v0.reshape(shape), vm.reshape(shape)


def _log1m_plus(v):
    """``log(1 - v) + v`` without cancellation for small ``|v|``."""
    out = np.empty_like(v)
    small = np.abs(v) < 0.1
    vs = v[small]
    acc = np.zeros_like(vs)
    term = vs * vs
    for k in range(2, 18):
        acc -= term / k
        term = term * vs
    out[small] = acc
    vb = v[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.log(1.0 - vb) + vb
    return out


def _level_branch(s, upper):
    sign = 1.0 if upper else -1.0
    cplx = s < 0
    v = np.zeros(s.shape, dtype=complex)
    q = np.sqrt(2.0 * s.astype(complex))  # +i*sqrt(2|s|) on the cut
    small = np.abs(s) <= 1.5
    # q is real for s >= 0 and purely imaginary on the cut, so -q is both the
    # lower real branch and the complex conjugate of the upper one.
    qq = sign * q[small]
    v[small] = qq - qq * qq / 3.0 + qq ** 3 / 36.0
    big_pos = (s > 1.5)
    if big_pos.any():
        z = -np.exp(-1.0 - s[big_pos])
        if upper:
            v[big_pos] = 1.0 + z - z * z + 1.5 * z ** 3
        else:
            lz = -1.0 - s[big_pos]
            l2 = np.log(-lz)
            v[big_pos] = 1.0 + lz - l2 + l2 / lz
    big_neg = s < -1.5
    if big_neg.any():
        z = -np.exp(-1.0 - s[big_neg]) + 0j
        w = lambert_w_array(0 if upper else -1, z)
        v[big_neg] = w + 1.0
    real = ~cplx
    done = np.zeros(s.shape, dtype=bool)
    done |= s == 0
    v[s == 0] = 0.0
    for _ in range(_MAX_ITER):
        act = ~done
        if not act.any():
            break
        va = v[act]
        one_m = 1.0 - va
        with np.errstate(divide="ignore", invalid="ignore"):
            h1 = -va / one_m
            h2 = -1.0 / (one_m * one_m)
        h = _log1m_plus(va) + s[act]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = h / (h1 - h * h2 / (2.0 * h1))
        step = np.where(np.isfinite(step), step, 0.0)
        vn = va - step
        v[act] = vn
        av = np.abs(vn)
        # the series branch is accurate relative to |v|; the log branch only
        # to a few ulps absolute, so it gets an absolute floor
        tol = np.where(av < 0.1, 4e-16 * np.maximum(av, 1e-300), 2e-15 * np.maximum(av, 1.0))
        conv = np.abs(step) <= tol
        conv |= h == 0
        idx = np.flatnonzero(act)
        done[idx[conv]] = True
    if not done.all():
        raise ConvergenceError("level_pair iteration did not converge")
    v[real] = v[real].real
    return v


# ---------------------------------------------------------------------------
# Quadratrix geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratrixPoint:
    """A point ``zeta(kappa)`` on the delta-scaled quadratrix."""

    kappa: float
    zeta: complex
    zeta_prime: complex
    delta: float


def _check_kappa(kappa, delta):
    if delta <= 0:
        raise DomainError("delta must be positive")
    if np.any(np.abs(kappa) >= np.pi / (2.0 * delta)):
        raise DomainError(f"|kappa| must be below pi/(2*delta) = {np.pi / (2 * delta)}")


def zeta_of_kappa(kappa, delta):
    """``kappa*cot(2*delta*kappa) + i*kappa`` (vectorized, removable at 0)."""
    kappa = np.asarray(kappa, dtype=float)
    _check_kappa(kappa, delta)
    a = 2.0 * delta * kappa
    small = np.abs(a) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        re = np.where(small, (1.0 - a * a / 3.0 - a ** 4 / 45.0) / (2.0 * delta),
                      kappa / np.tan(np.where(small, 1.0, a)))
    return re + 1j * kappa


def dzeta_dkappa(kappa, delta):
    kappa = np.asarray(kappa, dtype=float)
    _check_kappa(kappa, delta)
    a = 2.0 * delta * kappa
    small = np.abs(a) < 1e-4
    safe = np.where(small, 1.0, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        re = np.where(small, -(2.0 * a / 3.0 + 4.0 * a ** 3 / 45.0) / 1.0,
                      1.0 / np.tan(safe) - safe / np.sin(safe) ** 2)
    return re + 1j


def quadratrix(kappa: float, delta: float) -> QuadratrixPoint:
    """The quadratrix point with imaginary part ``kappa``."""
    _check_kappa(kappa, delta)
    z = complex(zeta_of_kappa(kappa, delta))
    zp = complex(dzeta_dkappa(kappa, delta))
    return QuadratrixPoint(float(kappa), z, zp, float(delta))


def level_of_kappa(kappa, delta):
    """Real turning-point level ``E(zeta(kappa))``, vectorized in kappa.

    On the curve ``|2*delta*zeta| = a/sin(a)`` with ``a = 2*delta*kappa``, so
    ``E = -kappa*cot(a) + (1 + log(a/sin a))/(2*delta)``.
    """
    kappa = np.asarray(kappa, dtype=float)
    _check_kappa(kappa, delta)
    a = np.abs(2.0 * delta * kappa)
    small = a < 1e-3
    safe = np.where(small, 1.0, a)
    big = (-safe / np.tan(safe) + 1.0 + np.log(safe / np.sin(safe))) / (2.0 * delta)
    ser = (a * a / 2.0 + a ** 4 / 36.0 + a ** 6 * (1.0 / 405.0)) / (2.0 * delta)
    return np.where(small, ser, big)


def dlevel_dkappa(kappa, delta):
    """``dE/dkappa = 1/a - 2*cot(a) + a/sin(a)^2`` times ``2*delta/(2*delta)``."""
    kappa = np.asarray(kappa, dtype=float)
    _check_kappa(kappa, delta)
    a = 2.0 * delta * kappa
    small = np.abs(a) < 1e-3
    safe = np.where(small, 1.0, a)
    big = 1.0 / safe - 2.0 / np.tan(safe) + safe / np.sin(safe) ** 2
    ser = a + a ** 3 / 9.0 + a ** 5 * (2.0 / 135.0)
    return np.where(small, ser, big)


def zeta_max(u_max: float, delta: float) -> complex:
    """Endpoint of the quadratrix arc where the level reaches ``u_max``."""
    if u_max <= 0:
        raise DomainError("u_max must be positive")
    z = -math.exp(2.0 * delta * u_max - 1.0)
    return -lambert_w(-1, complex(z, 0.0)) / (2.0 * delta)


def kappa_max(u_max: float, delta: float) -> float:
    return zeta_max(u_max, delta).imag


def level_E(zeta: complex, delta: float, *, tol: float = 1e-12) -> float:
    """Turning-point level ``E(zeta) = -zeta + (1 + log(2*delta*zeta))/(2*delta)``.

    Returns the real part and warns when the imaginary part exceeds ``tol``
    (which means ``zeta`` is not on the quadratrix).
    """
    if zeta == 0:
        raise DomainError("E(zeta) is undefined at zeta = 0")
    e = -zeta + (1.0 + cmath.log(2.0 * delta * zeta)) / (2.0 * delta)
    if abs(e.imag) > tol * max(1.0, abs(e.real)):
        warnings.warn(f"E(zeta) has imaginary part {e.imag:.3e}; zeta is off the quadratrix",
                      ImaginaryResidualWarning, stacklevel=2)
    return e.real


# ---------------------------------------------------------------------------
# G and its branched inverse
# ---------------------------------------------------------------------------

def G(eta, zeta, delta):
    """``G(eta; zeta) = -eta + zeta*exp(-2*delta*(zeta - eta))``."""
    return -eta + zeta * np.exp(-2.0 * delta * (zeta - eta))


def _wkb_argument(U, zeta, delta):
    a = -2.0 * delta * zeta * cmath.exp(-2.0 * delta * (zeta + U))
    # On the quadratrix the argument is real and negative; rounding leaves a
    # tiny imaginary part of random sign, which would pick the wrong side of
    # the cut.  Snap it so the upper-side convention applies.
    if a.real < 0 and abs(a.imag) <= 1e-13 * abs(a):
        a = complex(a.real, 0.0)
    return a


def g_inverse(branch: int, U: float, zeta: complex, delta: float) -> complex:
    """Branch ``n`` of the inverse of ``G``: ``-U - W_n(a)/(2*delta)``."""
    if zeta == 0:
        raise DomainError("zeta must be nonzero")
    a = _wkb_argument(U, zeta, delta)
    return -U - lambert_w(branch, a) / (2.0 * delta)


def amplitude(branch: int, U: float, zeta: complex, delta: float) -> complex:
    """WKB amplitude ``sqrt(-W/(1 + W))`` for branch ``n``.

    Raises ``SingularityError`` at a turning point of branch 0 or -1.  When
    the radicand sits on the negative real axis, the value is taken from
    ``U + 1e-9 i``, i.e. the branch continuous from a small positive
    imaginary part of ``U``.
    """
    if zeta == 0:
        raise DomainError("zeta must be nonzero")
    a = _wkb_argument(U, zeta, delta)
    if branch in (0, -1) and abs(math.e * a + 1.0) <= 1e-12:
        raise SingularityError("amplitude is singular at a turning point (1 + W = 0)")
    w = lambert_w(branch, a)
    if abs(1.0 + w) <= 1e-12:
        raise SingularityError("amplitude is singular: 1 + W vanishes")
    q = -w / (1.0 + w)
    if q.real < 0 and abs(q.imag) <= 1e-6 * abs(q):
        a2 = -2.0 * delta * zeta * cmath.exp(-2.0 * delta * (zeta + complex(U, 1e-9)))
        w2 = lambert_w(branch, a2)
        q2 = -w2 / (1.0 + w2)
        root = cmath.sqrt(q2)
        # keep the modulus of the exact point, the phase of the continuation
        return abs(cmath.sqrt(q)) * root / abs(root)
    return cmath.sqrt(q)
