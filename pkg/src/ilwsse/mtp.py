"""The model turning-point equation ``i eps psi_X^+ + h X psi^+ - e^-1 psi^- = 0``.

Its fundamental solutions are Laplace-type integrals

    psi_nu(Z) = int_{C_nu} exp(-(i/(h eps)) f(k) + i k (Z/eps + i/2)) dk,
    f(k) = k^2/2 - exp(-k-1),

where ``C_nu`` joins two valleys of ``Im f``: for ``nu`` in ``2Z - 1/2`` it runs
from ``-inf + i pi nu`` to ``-inf + i pi (nu + 2)``, and ``C_-inf`` runs from
``-inf - i pi/2`` to ``inf * exp(-i pi/4)``.

Contours are built numerically.  From an anchor point (the relevant simple
saddle, or the midpoint of the two coalescing saddles near the fold) the
steepest-descent flow of the integrand's modulus is traced in both
directions until the integrand has dropped far below its peak.  The ends
are then checked against the prescribed valleys.  The integrand is entire,
so any contour with the right end valleys gives the same value; following
the descent flow only keeps cancellation small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import airy

from .errors import ConvergenceError, DomainError, ValidationError
from .quadrature import gk15
from .specfun import lambert_w

__all__ = [
    "SaddleSet",
    "saddle_points",
    "PsiResult",
    "psi_fundamental",
    "model_residual",
    "psi_formula",
    "psi_formula_log",
    "airy_compare",
    "parse_nu",
]

NU_INF = -math.inf
# stop tracing once the integrand is below exp(-DROP) times its peak
DROP = 40.0
_STEP = 0.02
_MAX_STEPS = 200000


def parse_nu(nu) -> float:
    """Accept ``-inf``/``"-inf"`` or a member of ``2Z - 1/2``."""
    if isinstance(nu, str):
        text = nu.strip().lower()
        if text in ("-inf", "-infinity", "minf"):
            return NU_INF
        try:
            if "/" in text:
                num, den = text.split("/")
                nu = float(num) / float(den)
            else:
                nu = float(text)
        except ValueError as exc:
            raise ValidationError(f"cannot parse nu={nu!r}") from exc
    nu = float(nu)
    if nu == NU_INF:
        return nu
    m = (nu + 0.5) / 2.0
    if not math.isfinite(nu) or abs(m - round(m)) > 1e-12:
        raise ValidationError(f"nu={nu} is neither -inf nor in 2Z - 1/2")
    return nu


@dataclass(frozen=True)
class SaddleSet:
    X_tilde: complex
    points: dict  # branch -> complex saddle

    def residuals(self):
        return {n: abs(k + np.exp(-k - 1) - self.X_tilde) for n, k in self.points.items()}


def saddle_points(X_tilde, branches=(0, -1)) -> SaddleSet:
    """Saddles ``k_n = X + W_n(-exp(-X-1))`` of ``f(k) - k X``."""
    X = complex(X_tilde)
    arg = -np.exp(-X - 1.0)
    if X.imag == 0.0:
        arg = complex(arg.real, 0.0)
    pts = {}
    for n in branches:
        if n in (0, -1) and X.imag == 0.0 and X.real == 0.0:
            pts[int(n)] = complex(-1.0, 0.0)  # the fold point itself
            continue
        w = lambert_w(int(n), arg)
        k = X + w
        # a Newton polish removes the rounding of forming exp(-X-1)
        for _ in range(2):
            g = k + np.exp(-k - 1.0) - X
            d = 1.0 - np.exp(-k - 1.0)
            if d == 0:
                break
            k = k - g / d
        pts[int(n)] = complex(k)
    return SaddleSet(X, pts)


class _Exponent:
    """``phi(k) = -(i/(h eps)) (f(k) - Xc k)`` with ``Xc = h (Z + i eps/2)``."""

    def __init__(self, Z, eps, h):
        self.scale = 1.0 / (h * eps)
        self.Xc = h * (complex(Z) + 0.5j * eps)

    def F(self, k):
        return 0.5 * k * k - np.exp(-k - 1.0) - self.Xc * k

    def dF(self, k):
        return k + np.exp(-k - 1.0) - self.Xc

    def d2F(self, k):
        return 1.0 - np.exp(-k - 1.0)

    def re_phi(self, k):
        return self.scale * np.imag(self.F(k))

    def phi(self, k):
        return -1j * self.scale * self.F(k)

    def descent(self, k):
        # the rate of change of Im F along a unit direction e is Im(F' e),
        # most negative for F' e = -i |F'|
        g = self.dF(k)
        mag = abs(g)
        if mag == 0:
            return 0j
        return -1j * np.conj(g) / mag


def _trace(ex: _Exponent, start, direction, peak, first=_STEP):
    """Follow the descent flow from ``start`` (after a first step along ``direction``)."""
    pts = [start]
    k = start + first * direction
    pts.append(k)
    for _ in range(_MAX_STEPS):
        if ex.re_phi(k) < peak - DROP and _valley(k, ex) is not None:
            return pts
        # RK4 on dk/ds = descent(k)
        a = ex.descent(k)
        b = ex.descent(k + 0.5 * _STEP * a)
        c = ex.descent(k + 0.5 * _STEP * b)
        d = ex.descent(k + _STEP * c)
        step = _STEP / 6.0 * (a + 2 * b + 2 * c + d)
        if step == 0:
            raise ConvergenceError("descent flow stalled at a critical point")
        k = k + step
        if not np.isfinite(k):
            break
        pts.append(k)
    raise ConvergenceError("descent path did not reach a valley within the step budget")


def _valley(k, ex: _Exponent | None = None):
    """Label of the valley a descent path at ``k`` is committed to, else None.

    With ``ex`` given, the label is only assigned once the asymptotic term
    that defines the valley dominates and the flow heads out along it.
    """
    expo = abs(np.exp(-k - 1.0)) if k.real > -700 else math.inf
    d = ex.descent(k) if ex is not None else None
    if k.real > 1.0 and -0.5 * math.pi < math.atan2(k.imag, k.real) < 0.0:
        if ex is None:
            return "SE"
        lin = abs(k - ex.Xc)
        if expo < 0.1 * lin and (np.conj(k) * d).real > 0.9 * abs(k) and lin > 2.0:
            return "SE"
        return None
    if k.real < -1.0:
        # valleys sit around Im k = pi nu with nu = 2m - 1/2
        m = round((k.imag / math.pi + 0.5) / 2.0)
        nu = 2 * m - 0.5
        if abs(k.imag - math.pi * nu) < 0.5 * math.pi:
            if ex is None:
                return float(nu)
            if expo > 10.0 * abs(k - ex.Xc) and d.real < -0.9:
                return float(nu)
    return None


def _targets(nu):
    if nu == NU_INF:
        return -0.5, "SE"
    return nu, nu + 2.0


def _branch(nu):
    """Branch of the saddle between the two end valleys of ``C_nu``."""
    if nu == NU_INF or nu == -0.5:
        return 0
    return int(round((nu - 1.5) / 2)) if nu <= -2.5 else int(round((nu + 0.5) / 2))


# saddles closer than this are treated as one fold point
_FOLD_SEPARATION = 0.1
_FOLD_STEP = 0.1


@dataclass
class _Edge:
    ends: tuple  # (valley, valley)
    path: np.ndarray  # oriented from ends[0] to ends[1]
    height: float  # Re phi at the top of the path


def _edges(ex: _Exponent, branches):
    """Descent paths through the saddles of the given branches."""
    sad = saddle_points(ex.Xc, sorted(set(branches) | {0, -1})).points
    anchors = []
    fold = abs(sad[0] - sad[-1]) < _FOLD_SEPARATION
    for n, k in sad.items():
        if fold and n in (0, -1):
            continue
        a = ex.d2F(k)
        # descent directions satisfy F'' e^2 = -i |F''|
        e = np.exp(0.5j * (-0.5 * math.pi - np.angle(a)))
        anchors.append((k, (e, -e), _STEP))
    if fold:
        mid = 0.5 * (sad[0] + sad[-1])
        dirs = tuple(np.exp(1j * a) for a in (-5 * math.pi / 6, -math.pi / 6, math.pi / 2))
        anchors.append((mid, dirs, _FOLD_STEP))
    edges = []
    for k, dirs, first in anchors:
        peak = float(ex.re_phi(k))
        arms = []
        for d in dirs:
            try:
                arm = _trace(ex, k, d, peak, first)
            except ConvergenceError:
                continue
            arms.append((_valley(arm[-1], ex), arm))
        for i in range(len(arms)):
            for j in range(i + 1, len(arms)):
                (va, pa), (vb, pb) = arms[i], arms[j]
                if va != vb:
                    path = np.array(pa[::-1] + pb[1:], dtype=complex)
                    edges.append(_Edge((va, vb), path, peak))
    return edges


def _chain(edges, start, end):
    """Edges (with orientation signs) joining ``start`` to ``end`` with the lowest peak."""
    order = sorted(range(len(edges)), key=lambda i: edges[i].height)
    for m in range(1, len(order) + 1):
        usable = order[:m]
        # breadth-first search over valleys
        prev = {start: None}
        queue = [start]
        while queue:
            v = queue.pop(0)
            if v == end:
                break
            for i in usable:
                a, b = edges[i].ends
                for src, dst, sign in ((a, b, 1), (b, a, -1)):
                    if src == v and dst not in prev:
                        prev[dst] = (v, i, sign)
                        queue.append(dst)
        if end in prev:
            out = []
            v = end
            while prev[v] is not None:
                v, i, sign = prev[v]
                out.append((i, sign))
            return out[::-1]
    return None


@dataclass(frozen=True)
class PsiResult:
    """``psi = exp(log_value)``; ``value`` overflows to inf for extreme exponents."""

    log_value: complex
    error: float  # relative quadrature error estimate
    nu: float
    Z: complex
    path_points: int

    @property
    def value(self) -> complex:
        with np.errstate(over="ignore"):
            return complex(np.exp(self.log_value))


def _contour(nu, Z, eps, h):
    ex = _Exponent(Z, eps, h)
    n = _branch(nu)
    edges = _edges(ex, range(min(n, -1) - 2, max(n, 0) + 3))
    start, end = _targets(nu)
    chain = _chain(edges, start, end)
    if chain is None:
        raise ConvergenceError(
            f"no descent-path chain joins the valleys of C_nu for nu={nu} at Z={Z}")
    return ex, [(edges[i], sign) for i, sign in chain]


def _integrate(ex, path, shift, weight=None, *, rtol=1e-12):
    """Integral along ``path`` divided by ``exp(shift)``, with its error."""
    seg = np.diff(path)
    m = seg.size

    def integrand(s):
        j = np.clip(np.floor(s).astype(int), 0, m - 1)
        r = s - j
        k = path[j] + r * seg[j]
        val = np.exp(ex.phi(k) - shift) * seg[j]
        if weight is not None:
            val = val * weight(k)
        return val

    val, err = gk15(integrand, 0.0, float(m), atol=0.0, rtol=rtol,
                    points=np.arange(1, m, 64), max_intervals=200000)
    return complex(val), float(err)


def psi_fundamental(nu, Z, eps: float, h: float, *, weight=None) -> PsiResult:
    """Numerical ``psi_nu(Z; eps, h)`` with an error estimate.

    ``weight`` (a function of ``k``) multiplies the integrand, which gives
    derivatives in ``Z`` (``weight = i k/eps``) from the same contour.
    """
    nu = parse_nu(nu)
    if eps <= 0 or h <= 0:
        raise DomainError("eps and h must be positive")
    Z = complex(Z)
    if abs(Z.imag) > 0.5 * eps * (1 + 1e-12):
        raise DomainError(f"Z={Z} lies outside the strip |Im Z| <= eps/2")
    ex, chain = _contour(nu, Z, eps, h)
    # integrate relative to each edge's top so the exponentials stay in range,
    # then combine on the scale of the highest top
    parts = []
    for edge, sign in chain:
        top = complex(ex.phi(edge.path[np.argmax(ex.re_phi(edge.path))]))
        v, e = _integrate(ex, edge.path, top, weight)
        parts.append((sign * v, e, top))
    common = max(p[2].real for p in parts)
    total = sum(v * np.exp(top - common) for v, _, top in parts)
    err = sum(e * math.exp(top.real - common) for _, e, top in parts)
    if total == 0:
        raise ConvergenceError("contour integral vanished to working precision")
    npts = sum(edge.path.size for edge, _ in chain)
    return PsiResult(complex(np.log(total) + common), err / abs(total), nu, Z, npts)


def model_residual(nu, X: float, eps: float, h: float) -> dict:
    """Residual of the model equation at real ``X`` for the numerical ``psi_nu``."""
    up = complex(X, -0.5 * eps)  # psi^+ is the value at X - i eps/2
    dn = complex(X, 0.5 * eps)
    p_plus = psi_fundamental(nu, up, eps, h)
    dp_plus = psi_fundamental(nu, up, eps, h, weight=lambda k: 1j * k / eps)
    p_minus = psi_fundamental(nu, dn, eps, h)
    # work relative to a common scale so very large or small values stay finite
    logs = [p_plus.log_value, dp_plus.log_value, p_minus.log_value]
    scale = max(v.real for v in logs)
    pp, dpp, pm = (complex(np.exp(v - scale)) for v in logs)
    res = 1j * eps * dpp + h * X * pp - math.exp(-1.0) * pm
    norm = max(abs(pp), abs(pm))
    return {
        "nu": nu, "X": X, "residual": abs(res), "norm": norm, "log_scale": scale,
        "relative": abs(res) / norm if norm > 0 else math.inf,
    }


def psi_formula(nu, chi: float, eps: float, h: float, alpha: float, Y: float = 0.5) -> complex:
    """Leading-order asymptotic form of ``psi_nu`` at ``Z = eps^alpha chi + i eps (Y - 1/2)``."""
    with np.errstate(over="ignore"):
        return complex(np.exp(psi_formula_log(nu, chi, eps, h, alpha, Y)))


def psi_formula_log(nu, chi: float, eps: float, h: float, alpha: float,
                    Y: float = 0.5) -> complex:
    """Complex logarithm of :func:`psi_formula` (finite where the value overflows)."""
    nu = parse_nu(nu)
    s = eps ** (1.0 - alpha)
    if nu in (NU_INF, -0.5):
        pref = 2 * math.pi * (2 * h * eps) ** (1.0 / 3.0)
        scale = (2 * h) ** (1.0 / 3.0) / eps ** (2.0 / 3.0 - alpha)
        if nu == NU_INF:
            phase = 1j / (2 * h * eps) - 1j * chi / s + Y
            ai = airy(-scale * chi)[0]
        else:
            phase = 1j / (2 * h * eps) + 1j * math.pi / 3 - 1j * chi / s + Y
            ai = airy(scale * np.exp(1j * math.pi / 3) * chi)[0]
        return complex(np.log(pref) + phase + np.log(ai))
    if nu <= -2.5:
        n = int(round((nu - 1.5) / 2))
        extra = -1j * math.pi / 4
    elif nu >= 1.5:
        n = int(round((nu + 0.5) / 2))
        extra = 3j * math.pi / 4
    else:
        raise ValidationError(f"no closed form for nu={nu}")
    W = complex(lambert_w(n, -math.exp(-1.0)))
    log_pref = 0.5 * np.log(2 * math.pi * h * eps / (1 + W))
    phase = (1j * (1 - (1 + W) ** 2) / (2 * h * eps) + 1j * W * chi / s - W * Y + extra)
    return complex(log_pref + phase)


def airy_compare(nu, chi_grid, eps: float, h: float, alpha: float, Y: float = 0.5) -> dict:
    """Largest relative deviation of ``psi_nu`` from its asymptotic form over a grid."""
    nu = parse_nu(nu)
    if not 0.5 < alpha < 2.0 / 3.0:
        raise DomainError("alpha must lie in (1/2, 2/3)")
    rows = []
    for chi in np.atleast_1d(np.asarray(chi_grid, dtype=float)):
        Z = complex(eps ** alpha * chi, eps * (Y - 0.5))
        num = psi_fundamental(nu, Z, eps, h)
        form = psi_formula_log(nu, float(chi), eps, h, alpha, Y)
        rel = abs(np.expm1(num.log_value - form))
        rows.append({"chi": float(chi), "log_psi": num.log_value, "log_formula": form,
                     "relative_error": float(rel), "quadrature_error": num.error})
    return {"nu": nu, "eps": eps, "h": h, "alpha": alpha, "Y": Y,
            "max_relative_error": max(r["relative_error"] for r in rows), "rows": rows}
