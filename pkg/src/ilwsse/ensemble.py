"""Exact evaluation of the N-soliton ensemble in arbitrary precision.

The partition function is ``Z_N(z, t) = det(I + D C D)`` with the diagonal
``D_nn = exp(log_c_n / 2 - kappa_n z/eps - q_n t/eps)`` (``q_n`` the
imaginary part of ``(zeta_n - 1/2delta)^2``) and the Hermitian positive
definite Cauchy matrix ``C_nl = i / (zeta_l - conj(zeta_n))``.

For ``z = x + i y`` write ``D = V A`` with ``V = diag(exp(-i kappa y/eps))``
unimodular and ``A`` real positive, and let ``S = diag(max(1, A_nn))``.  Then

    I + D C D = V S B S V,   B = Ahat C Ahat + S^-2 V^-2,   Ahat = A S^-1,

and every entry of ``B`` is of order one no matter how large the exponents
are.  Since ``y`` has a fixed sign, the numerical range of ``B`` lies in the
sector ``0 <= sgn(y) arg <= 2 kappa_max |y|/eps`` (less than pi inside the
strip), so an unpivoted LU has all its pivots in that sector and the
continuous argument of ``Z`` is the sum of their principal arguments plus
``-2 sum(kappa) y/eps``.  No unwinding is needed.

All matrix arithmetic uses ball arithmetic (python-flint), so insufficient
precision is detected from the error radii rather than guessed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import flint
import numpy as np

from .errors import DomainError, PrecisionError, ValidationError
from .scattering import ScatteringData

__all__ = [
    "LogDetResult",
    "DeltaFactors",
    "exponent_budget_bits",
    "delta_matrix",
    "log_det_Z",
    "fredholm_sum",
    "discrete_energy",
    "ensemble_field",
    "bounds_check",
    "l2_identity",
    "DEFAULT_PRECISION",
]

DEFAULT_PRECISION = 256
# working precision is doubled on a PrecisionError up to this cap
MAX_PRECISION = 8192
# required correct bits in log|Z| and arg Z before a result is accepted
_ACCURACY_BITS = 60
FREDHOLM_MAX_N = 20


@dataclass(frozen=True)
class LogDetResult:
    """``log|Z_N|`` and the continuous ``arg Z_N`` (zero on the real axis)."""

    log_mag: float
    arg: float
    precision_bits: int
    log_mag_radius: float = 0.0
    arg_radius: float = 0.0

    @property
    def value(self) -> complex:
        """``log Z_N`` on the continuous branch."""
        return complex(self.log_mag, self.arg)


@dataclass(frozen=True)
class DeltaFactors:
    """``Delta = D C D`` with ``D`` stored as per-entry complex logarithms."""

    log_d: tuple
    C: object  # flint.acb_mat
    precision_bits: int

    def reconstruct(self):
        """Assemble ``Delta`` entrywise (only sensible for moderate exponents)."""
        with flint.ctx.workprec(self.precision_bits):
            d = [flint.acb(v).exp() for v in self.log_d]
            N = len(d)
            return flint.acb_mat(N, N, [d[n] * self.C[n, l] * d[l]
                                        for n in range(N) for l in range(N)])


def _check_data(data: ScatteringData):
    if not isinstance(data, ScatteringData):
        raise ValidationError("expected ScatteringData")


def _strip_check(data, z):
    y = complex(z).imag
    half = data.delta * data.eps_N
    if abs(y) > half * (1 + 1e-12):
        raise DomainError(f"|Im z|={abs(y)} exceeds the strip half-width delta*eps={half}")


def exponent_budget_bits(data: ScatteringData, x_window) -> int:
    """The conservative exponent-range estimate for ``precision_bits``.

    ``64 + ceil((2/ln 2) max|theta_+|/eps + (2/ln 2) N kappa_max X/eps)``
    with ``X = max |x|`` over the window.  The scaled algorithm here never
    forms the large exponentials, so this is reported as a diagnostic only.
    """
    eps = data.eps_N
    theta = max((abs(v) for v in data.theta_plus), default=0.0)
    if not data.theta_plus or not np.all(np.isfinite(data.theta_plus)):
        theta = max(abs(v) * eps / 2 for v in data.log_c) if data.log_c else 0.0
    X = max(abs(float(v)) for v in x_window)
    km = data.kappa_max if math.isfinite(data.kappa_max) else max(data.kappa)
    bits = (2 / math.log(2)) * theta / eps + (2 / math.log(2)) * data.N * km * X / eps
    return 64 + int(math.ceil(bits))


def _arb(x):
    return flint.arb(float(x))


def _cauchy(data):
    zeta = data.zeta
    N = data.N
    rows = []
    for n in range(N):
        zn = flint.acb(zeta[n].real, -zeta[n].imag)
        for l in range(N):
            zl = flint.acb(zeta[l].real, zeta[l].imag)
            rows.append(flint.acb(0, 1) / (zl - zn))
    return flint.acb_mat(N, N, rows)


def _q(data):
    d = data.delta
    return [((p.zeta - 1.0 / (2 * d)) ** 2).imag for p in data.eigen]


def _log_d(data, z, t):
    """Complex logs of ``D_nn``, as acb balls at the current precision."""
    eps = _arb(data.eps_N)
    x = _arb(complex(z).real)
    y = _arb(complex(z).imag)
    tt = _arb(t)
    out = []
    for kappa, lc, q in zip(data.kappa, data.log_c, _q(data)):
        k = _arb(kappa)
        re = _arb(lc) / 2 - k * x / eps - _arb(q) * tt / eps
        im = -k * y / eps
        out.append(flint.acb(re, im))
    return out


def delta_matrix(data: ScatteringData, z: complex, t: float,
                 precision_bits: int = DEFAULT_PRECISION) -> DeltaFactors:
    _check_data(data)
    _strip_check(data, z)
    with flint.ctx.workprec(precision_bits):
        return DeltaFactors(tuple(_log_d(data, z, t)), _cauchy(data), precision_bits)


def _scaled_system(data, z, t):
    """Return ``(B, log_s, y)`` for the factorization described in the module doc."""
    N = data.N
    eps = _arb(data.eps_N)
    y = complex(z).imag
    logd = _log_d(data, z, t)
    C = _cauchy(data)
    log_a = [ld.real for ld in logd]
    log_s = [la if la > 0 else flint.arb(0) for la in log_a]
    ahat = [(la - ls).exp() for la, ls in zip(log_a, log_s)]
    entries = []
    for n in range(N):
        for l in range(N):
            v = ahat[n] * C[n, l] * ahat[l]
            if n == l:
                # S^-2 V^-2 = exp(-2 log s_n + 2 i kappa_n y / eps)
                ph = 2 * _arb(data.kappa[n]) * _arb(y) / eps
                v += flint.acb(-2 * log_s[n], ph).exp()
            entries.append(v)
    return flint.acb_mat(N, N, entries), log_s


def _lu_pivots(B):
    """Unpivoted LU; returns the list of pivots (acb balls)."""
    N = B.nrows()
    A = [[B[i, j] for j in range(N)] for i in range(N)]
    pivots = []
    for k in range(N):
        p = A[k][k]
        if p.contains(0):
            raise PrecisionError(
                "pivot ball contains zero; increase precision_bits")
        pivots.append(p)
        inv = 1 / p
        for i in range(k + 1, N):
            f = A[i][k] * inv
            if f.is_zero():
                continue
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, N):
                row_i[j] -= f * row_k[j]
    return pivots


def _accept(value, label, bits):
    mid = float(value.mid())
    rad = float(value.rad())
    if not math.isfinite(mid) or rad > 2.0 ** (-_ACCURACY_BITS) * max(1.0, abs(mid)):
        raise PrecisionError(
            f"{label} has only {value.rel_accuracy_bits()} accurate bits at "
            f"{bits}-bit working precision; increase precision_bits")
    return mid, rad


def _escalate(fn, bits, max_bits):
    """Run ``fn(bits)``, doubling ``bits`` while the result is not certified."""
    bits = int(bits)
    if bits < 32:
        raise ValidationError("precision_bits must be at least 32")
    while True:
        try:
            return fn(bits)
        except PrecisionError:
            if 2 * bits > max(max_bits, bits):
                raise
            bits *= 2


def log_det_Z(data: ScatteringData, z: complex, t: float,
              precision_bits: int = DEFAULT_PRECISION, *,
              max_precision_bits: int = MAX_PRECISION) -> LogDetResult:
    """``log Z_N(z, t)`` with the continuous argument, in ball arithmetic.

    ``precision_bits`` is the starting working precision; it is doubled
    until the result carries 60 certified bits, and the precision finally
    used is recorded on the result.
    """
    _check_data(data)
    _strip_check(data, z)
    if data.N == 0:
        return LogDetResult(0.0, 0.0, precision_bits)
    return _escalate(lambda b: _log_det_at(data, z, t, b), precision_bits,
                     max_precision_bits)


def _log_det_at(data, z, t, precision_bits):
    y = complex(z).imag
    with flint.ctx.workprec(precision_bits):
        B, log_s = _scaled_system(data, z, t)
        pivots = _lu_pivots(B)
        log_mag = 2 * sum(log_s, flint.arb(0))
        arg = flint.arb(0)
        for p in pivots:
            log_mag += abs(p).log()
            arg += p.arg()
        ksum = sum((_arb(k) for k in data.kappa), flint.arb(0))
        arg += -2 * ksum * _arb(y) / _arb(data.eps_N)
        lm, lr = _accept(log_mag, "log|Z|", precision_bits)
        am, ar = _accept(arg, "arg Z", precision_bits)
    if y == 0.0:
        am = 0.0
    return LogDetResult(lm, am, precision_bits, lr, ar)


# ---------------------------------------------------------------------------
# Fredholm (principal-minor) expansion: the brute-force oracle
# ---------------------------------------------------------------------------

def _g_matrix(data):
    z = data.zeta
    with np.errstate(divide="ignore"):
        G = np.log(np.abs(z[:, None] - np.conj(z)[None, :])) - np.log(np.abs(z[:, None] - z[None, :]))
    np.fill_diagonal(G, np.log(2.0 * data.kappa))
    return G


def _subset_matrix(N):
    idx = np.arange(2 ** N, dtype=np.int64)
    return ((idx[:, None] >> np.arange(N)[None, :]) & 1).astype(float)


def _subset_exponents(data, z, t):
    """Complex exponents ``w_S = -(2/(eps^2 pi)) E_S(z, t)`` for all subsets."""
    N = data.N
    eps = data.eps_N
    bits = _subset_matrix(N)
    lin = (np.asarray(data.log_c) - 2.0 * data.kappa * complex(z) / eps
           - 2.0 * np.asarray(_q(data)) * t / eps)
    G = _g_matrix(data)
    quad = np.einsum("sn,nl,sl->s", bits, G, bits)
    return bits @ lin - quad


def fredholm_sum(data: ScatteringData, z: complex, t: float) -> LogDetResult:
    """``log Z_N`` as the sum of all ``2^N`` principal minors (log-sum-exp)."""
    _check_data(data)
    _strip_check(data, z)
    if data.N > FREDHOLM_MAX_N:
        raise ValidationError(f"fredholm_sum is limited to N <= {FREDHOLM_MAX_N}")
    if data.N == 0:
        return LogDetResult(0.0, 0.0, 53)
    w = _subset_exponents(data, z, t)
    M = float(np.max(w.real))
    terms = np.exp(w - M)
    re = math.fsum(terms.real)
    im = math.fsum(terms.imag)
    log_mag = M + 0.5 * math.log(re * re + im * im)
    # The terms' arguments span up to 2 N kappa_max |y|/eps, which can exceed
    # 2 pi, so only the principal value is available here; compare modulo 2 pi.
    arg = 0.0 if complex(z).imag == 0.0 else math.atan2(im, re)
    return LogDetResult(log_mag, arg, 53)


def discrete_energy(data: ScatteringData, S, x: float, t: float):
    """``(E_S, P_S, Q_S)`` for a subset ``S`` of ``{1..N}`` (one-based indices)."""
    _check_data(data)
    idx = np.array(sorted(int(n) - 1 for n in S), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= data.N):
        raise DomainError("subset indices must lie in 1..N")
    eps = data.eps_N
    if idx.size == 0:
        return 0.0, 0.0, 0.0
    kappa = data.kappa[idx]
    q = np.asarray(_q(data))[idx]
    theta = eps * np.asarray(data.log_c)[idx] / 2.0
    V = x * kappa + t * q - theta
    G = _g_matrix(data)[np.ix_(idx, idx)]
    E = eps * math.pi * V.sum() + 0.5 * eps * eps * math.pi * G.sum()
    return float(E), float(eps * math.pi * kappa.sum()), float(eps * math.pi * q.sum())


# ---------------------------------------------------------------------------
# the field
# ---------------------------------------------------------------------------

def _field_trace(data, x, t, bits):
    """``u = 4 sum kappa_n Im[(I + Delta(x + i delta eps))^-1]_nn``.

    This is the exact derivative of ``2 eps arg Z(x + i delta eps)`` in x,
    obtained from ``d/dx log det = tr((I+Delta)^-1 d Delta/dx)``.
    """
    y = data.delta * data.eps_N
    z = complex(x, y)
    with flint.ctx.workprec(bits):
        B, log_s = _scaled_system(data, z, t)
        N = data.N
        eye = flint.acb_mat(N, N, [1 if i == j else 0 for i in range(N) for j in range(N)])
        try:
            Binv = B.solve(eye, algorithm="precond")
        except ZeroDivisionError as exc:
            raise PrecisionError("scaled system is numerically singular") from exc
        total = flint.arb(0)
        eps = _arb(data.eps_N)
        for n in range(data.N):
            k = _arb(data.kappa[n])
            # [(I+Delta)^-1]_nn = exp(2 i kappa y/eps) s_n^-2 [B^-1]_nn
            fac = flint.acb(-2 * log_s[n], 2 * k * _arb(y) / eps).exp()
            total += k * (fac * Binv[n, n]).imag
        u = 4 * total
        mid = float(u.mid())
        if not math.isfinite(mid) or float(u.rad()) > 1e-13 * max(1.0, abs(mid)):
            raise PrecisionError(
                f"field value has only {u.rel_accuracy_bits()} accurate bits at "
                f"{bits}-bit precision; increase precision_bits")
        return mid


def _field_stencil(data, x, t, bits, h):
    """Fourth-order central difference of ``2 eps arg Z(x + i delta eps)``."""
    y = data.delta * data.eps_N
    a = [log_det_Z(data, complex(x + k * h, y), t, bits).arg for k in (-2, -1, 1, 2)]
    deriv = (a[0] - 8 * a[1] + 8 * a[2] - a[3]) / (12 * h)
    return 2 * data.eps_N * deriv


def ensemble_field(data: ScatteringData, x_grid, t: float,
                   precision_bits: int = DEFAULT_PRECISION, *, method: str = "trace",
                   h: float | None = None,
                   max_precision_bits: int = MAX_PRECISION) -> np.ndarray:
    """Samples of ``u^SSE_N(x, t)``.

    ``method="trace"`` (default) differentiates ``log Z`` analytically
    through the trace identity; ``method="stencil"`` applies a fourth-order
    central difference with step ``h`` (default ``eps_N/20``) to the
    continuous argument.
    """
    _check_data(data)
    xs = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if data.N == 0:
        return np.zeros_like(xs)
    if method == "trace":
        return np.array([_escalate(lambda b, x=float(x): _field_trace(data, x, t, b),
                                   precision_bits, max_precision_bits) for x in xs])
    if method == "stencil":
        h = data.eps_N / 20 if h is None else h
        return np.array([_field_stencil(data, float(x), t, precision_bits, h) for x in xs])
    raise ValidationError(f"unknown field method {method!r}")


# ---------------------------------------------------------------------------
# bounds and identities
# ---------------------------------------------------------------------------

def _d_factor(theta):
    if theta <= math.pi / 2:
        return 1.0
    if theta <= math.pi:
        return math.sin(theta)
    return 0.0


def minimal_discrete_energy(data: ScatteringData, x: float, t: float) -> float:
    """``min_S E_S(x, t)`` by enumeration of all subsets."""
    if data.N > FREDHOLM_MAX_N:
        raise ValidationError(f"subset enumeration is limited to N <= {FREDHOLM_MAX_N}")
    w = _subset_exponents(data, complex(x, 0.0), t).real
    # w_S = -(2/(eps^2 pi)) E_S
    return float(-np.max(w) * data.eps_N ** 2 * math.pi / 2.0)


def bounds_check(data: ScatteringData, z: complex, t: float,
                 precision_bits: int = DEFAULT_PRECISION) -> dict:
    """Magnitude and argument bounds on ``Z_N`` as margins (nonnegative = holds)."""
    _check_data(data)
    _strip_check(data, z)
    z = complex(z)
    eps = data.eps_N
    km = data.kappa_max
    res = log_det_Z(data, z, t, precision_bits)
    N = data.N
    theta = 2 * km * abs(z.imag) / eps
    d = _d_factor(theta)
    log_lower = N * math.log(d) if d > 0 else -math.inf
    Emin = minimal_discrete_energy(data, z.real, t)
    log_upper = N * math.log(2.0) - 2.0 / (eps * eps * math.pi) * Emin
    sgn = 1.0 if z.imag > 0 else (-1.0 if z.imag < 0 else 0.0)
    arg_scaled = -sgn * res.arg
    arg_hi = 2 * N * km * abs(z.imag) / eps
    tol_l = 1e-12 * max(1.0, abs(res.log_mag))
    tol_a = 1e-12 * max(1.0, abs(res.arg))
    margins = {
        "lower": res.log_mag - log_lower,
        "upper": log_upper - res.log_mag,
        "arg_low": arg_scaled,
        "arg_high": arg_hi - arg_scaled,
    }
    passed = (margins["lower"] >= -tol_l and margins["upper"] >= -tol_l
              and margins["arg_low"] >= -tol_a and margins["arg_high"] >= -tol_a)
    return {
        "z": [z.real, z.imag], "t": t, "N": N,
        "log_abs_Z": res.log_mag, "arg_Z": res.arg,
        "log_lower_bound": log_lower, "log_upper_bound": log_upper,
        "arg_bound": arg_hi, "E_min": Emin,
        "margins": margins, "passed": bool(passed),
    }


def quadrupole_total(data: ScatteringData) -> float:
    """``Q_{Z_N} = eps pi sum_n Im[(zeta_n - 1/2delta)^2]``."""
    return float(data.eps_N * math.pi * np.sum(_q(data)))


def dipole_total(data: ScatteringData) -> float:
    """``P_{Z_N} = eps pi sum_n kappa_n``."""
    return float(data.eps_N * math.pi * np.sum(data.kappa))


def l2_identity(data: ScatteringData, t: float = 0.0, *,
                precision_bits: int = DEFAULT_PRECISION, center: float = 0.0,
                points_per_eps: int = 16, tail_fraction: float = 1e-8) -> dict:
    """Compare ``int u^2 dx`` with ``-(4 delta/pi) Q_{Z_N}``.

    The window grows symmetrically about ``center`` until the field at both
    ends is small enough for the neglected tails (which decay exponentially)
    to hold less than ``tail_fraction`` of the mass; the integral is the
    trapezoidal rule, which is spectrally accurate for such integrands.
    """
    eps = data.eps_N
    h = eps / points_per_eps
    kmin = float(np.min(data.kappa))
    half = 4.0
    xs = np.arange(center - half, center + half + h / 2, h)
    u = ensemble_field(data, xs, t, precision_bits)
    while True:
        peak = float(np.max(np.abs(u)))
        # an exponential tail exp(-2 kmin |x|/eps) beyond the window carries
        # at most u_end^2 * eps / (4 kmin) of the squared mass
        tail = (u[0] ** 2 + u[-1] ** 2) * eps / (4.0 * kmin)
        total = float(np.sum(u * u) * h)
        if tail <= tail_fraction * total and max(abs(u[0]), abs(u[-1])) < 1e-6 * peak:
            break
        extra = np.arange(1, int(round(half / h)) + 1) * h
        left = ensemble_field(data, xs[0] - extra[::-1], t, precision_bits)
        right = ensemble_field(data, xs[-1] + extra, t, precision_bits)
        xs = np.concatenate([xs[0] - extra[::-1], xs, xs[-1] + extra])
        u = np.concatenate([left, u, right])
        half *= 2.0
        if half > 1e4:
            raise PrecisionError("l2_identity: field does not decay within the window")
    target = -(4 * data.delta / math.pi) * quadrupole_total(data)
    return {
        "N": data.N, "t": t, "integral": total, "target": target,
        "relative_error": abs(total - target) / abs(target),
        "window": [float(xs[0]), float(xs[-1])], "h": h, "samples": int(xs.size),
    }
