"""The twelve acceptance checks, shared by ``verify`` and the test suite.

Each check returns a JSON-friendly dict with the measured quantities, the
thresholds and a ``passed`` flag.  Runtimes are not part of the result (the
payloads are deterministic); callers that care time the call themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ensemble, equilibrium, mtp, pde
from .output import canonical_json
from .profile import build_profile, burgers_eval, catastrophe_time
from .scattering import modified_data, tail_theta_kappa, weyl_R_kappa
from .specfun import kappa_max, lambert_w_array, zeta_of_kappa

__all__ = ["CRITERIA", "Criterion", "run_criterion", "run_suite", "cached_data",
           "REFERENCE_PROFILE", "REFERENCE_DELTA"]

REFERENCE_PROFILE = {"kind": "sech2"}
REFERENCE_DELTA = 0.5


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    runtime_limit_s: float
    func: object


@lru_cache(maxsize=None)
def _profile(spec_json: str):
    import json
    return build_profile(json.loads(spec_json))


def reference_profile(spec=None):
    return _profile(canonical_json(spec or REFERENCE_PROFILE))


@lru_cache(maxsize=None)
def _data(spec_json: str, N: int, delta: float):
    return modified_data(_profile(spec_json), N, delta)


def cached_data(N: int, delta: float = REFERENCE_DELTA, spec=None):
    """Modified scattering data, memoized per (profile, N, delta)."""
    return _data(canonical_json(spec or REFERENCE_PROFILE), int(N), float(delta))


def _l2(values, h):
    return math.sqrt(float(np.sum(np.asarray(values) ** 2) * h))


# ---------------------------------------------------------------------------


def c01_lambert_roundtrip(seed=1, samples=10_000):
    rng = np.random.default_rng(seed)
    r = 10.0 ** rng.uniform(-6, 3, samples)
    th = rng.uniform(-math.pi, math.pi, samples)
    z = r * np.exp(1j * th)
    # include the negative real axis (branch cuts) explicitly
    z[:500] = -r[:500] + 0j
    branch = rng.integers(-3, 4, samples)
    worst = 0.0
    for n in range(-3, 4):
        m = branch == n
        w = lambert_w_array(n, z[m])
        res = np.abs(w * np.exp(w) - z[m]) / (1 + np.abs(z[m]))
        worst = max(worst, float(res.max()))
    return {"samples": samples, "max_scaled_residual": worst, "threshold": 1e-12,
            "passed": worst <= 1e-12}


def c02_catastrophe_time():
    t_c = catastrophe_time(reference_profile())
    exact = 3 * math.sqrt(3) / 8
    err = abs(t_c - exact)
    return {"t_c": t_c, "expected": exact, "error": err, "threshold": 1e-10,
            "passed": err <= 1e-10}


def c03_weyl_consistency(delta=REFERENCE_DELTA, points=64):
    p = reference_profile()
    rho = equilibrium.wyl_density_sampled(p, delta)
    km = rho.kappa_max
    worst = 0.0
    for k in np.linspace(0.0, km, points):
        worst = max(worst, abs(weyl_R_kappa(p, float(k), delta) - rho.antiderivative_from(float(k))))
    at_max = abs(weyl_R_kappa(p, km, delta))
    near_max = abs(weyl_R_kappa(p, km * (1 - 1e-12), delta))
    return {"max_error": worst, "R_at_zeta_max": at_max, "R_just_below_zeta_max": near_max,
            "threshold": 1e-8, "threshold_zeta_max": 1e-10,
            "passed": worst <= 1e-8 and max(at_max, near_max) <= 1e-10}


def c04_potential_identity(delta=REFERENCE_DELTA, nodes=32):
    p = reference_profile()
    rho = equilibrium.wyl_density_sampled(p, delta)
    km = rho.kappa_max
    worst = 0.0
    for k in km * (np.arange(nodes) + 0.5) / nodes:
        z = complex(zeta_of_kappa(float(k), delta))
        lhs = equilibrium.potential_L(rho, z)
        rhs = tail_theta_kappa(p, float(k), "+", delta) + tail_theta_kappa(p, float(k), "-", delta)
        worst = max(worst, abs(lhs - rhs))
    return {"max_error": worst, "threshold": 1e-6, "passed": worst <= 1e-6}


def c05_quadrupole_identity():
    p = reference_profile()
    norm2 = 4.0 / 3.0  # ||sech^2||^2
    rows = []
    for delta in (0.5, 1.0):
        Q = equilibrium.functional_Q(equilibrium.wyl_density_sampled(p, delta))
        res = abs(Q + math.pi / (4 * delta) * norm2)
        rows.append({"delta": delta, "Q": Q, "residual": res})
    worst = max(r["residual"] for r in rows)
    return {"rows": rows, "max_residual": worst, "threshold": 1e-6 * norm2,
            "passed": worst <= 1e-6 * norm2}


def _strip_points(data, rng, count, t_range=(0.0, 0.6), x_half=4.0):
    x0 = reference_profile().x_max
    out = []
    for _ in range(count):
        x = x0 + rng.uniform(-x_half, x_half)
        y = rng.uniform(-1.0, 1.0) * data.delta * data.eps_N
        t = rng.uniform(*t_range)
        out.append((complex(x, y), t))
    return out


def c06_fredholm_oracle(seed=6, delta=REFERENCE_DELTA):
    rng = np.random.default_rng(seed)
    rows = []
    for N in (2, 4, 8, 12):
        data = cached_data(N, delta)
        worst = 0.0
        for z, t in _strip_points(data, rng, 10):
            a = ensemble.log_det_Z(data, z, t)
            b = ensemble.fredholm_sum(data, z, t)
            # the subset sum only knows the argument modulo 2 pi
            darg = abs((a.arg - b.arg + math.pi) % (2 * math.pi) - math.pi)
            diff = abs(complex(a.log_mag - b.log_mag, darg))
            worst = max(worst, diff / max(1.0, abs(a.value)))
        rows.append({"N": N, "max_relative_difference": worst})
    worst = max(r["max_relative_difference"] for r in rows)
    return {"rows": rows, "max_relative_difference": worst, "threshold": 1e-10,
            "passed": worst <= 1e-10}


def c07_magnitude_bounds(seed=7, delta=REFERENCE_DELTA, N=16, count=50):
    rng = np.random.default_rng(seed)
    data = cached_data(N, delta)
    margins = {"lower": math.inf, "upper": math.inf, "arg_low": math.inf, "arg_high": math.inf}
    ok = True
    for z, t in _strip_points(data, rng, count):
        r = ensemble.bounds_check(data, z, t)
        ok &= r["passed"]
        for k, v in r["margins"].items():
            margins[k] = min(margins[k], float(v))
    return {"N": N, "points": count, "min_margins": margins, "passed": bool(ok)}


def c08_l2_identity(delta=REFERENCE_DELTA, precision_bits=256):
    rows = []
    for N in (4, 8, 16):
        r = ensemble.l2_identity(cached_data(N, delta), 0.0, precision_bits=precision_bits,
                                 center=reference_profile().x_max)
        rows.append({k: r[k] for k in ("N", "integral", "target", "relative_error")})
    worst = max(r["relative_error"] for r in rows)
    return {"rows": rows, "max_relative_error": worst, "threshold": 1e-6,
            "precision_bits": precision_bits, "passed": worst <= 1e-6}


def c09_l2_convergence(delta=REFERENCE_DELTA, t=0.3, h=0.01, half_width=10.0):
    p = reference_profile()
    x = p.x_max + np.arange(-half_width, half_width, h)
    u0 = p.u0(x)
    uB = burgers_eval(p, x, t)
    rows = []
    for N in (4, 8, 16, 32):
        data = cached_data(N, delta)
        e0 = _l2(ensemble.ensemble_field(data, x, 0.0) - u0, h)
        et = _l2(ensemble.ensemble_field(data, x, t) - uB, h) if N in (4, 32) else None
        rows.append({"N": N, "eps_N": data.eps_N, "error_t0": e0, "error_vs_burgers": et})
    errs = [r["error_t0"] for r in rows]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    later = rows[-1]["error_vs_burgers"] <= rows[0]["error_vs_burgers"]
    return {"rows": rows, "t": t, "window": [float(x[0]), float(x[-1])], "h": h,
            "strictly_decreasing": decreasing, "N32_not_worse_than_N4": later,
            "passed": bool(decreasing and later)}


def c10_variational(delta=REFERENCE_DELTA):
    p = reference_profile()
    points = [(p.x_max, 0.0), (p.x_max + 2.0, 0.0), (1.0, 0.3)]
    rows = []
    for x, t in points:
        r = equilibrium.verify_variational(p, x, t, delta)
        rows.append({"x": x, "t": t, "regions": r["regions"], "worst": r["worst"],
                     "edge_error": r["edge_error"], "admissible": r["admissible"],
                     "classification_ok": r["classification_ok"], "passed": r["passed"]})
    return {"rows": rows, "passed": all(r["passed"] for r in rows)}


def c11_pde_suite(delta=1.0, eps=0.05, L=12.0, n_x=2000, dt=1e-4):
    p = reference_profile()
    f0 = pde.Field.from_function(p.u0, L, n_x, eps=eps, delta=delta)
    traj = pde.simulate(f0, dt, 1.5, (0.3, 1.5))
    dm, dl = traj.drift()
    snap = traj.snapshots[0.3]
    h = L / n_x
    b_err = _l2(snap.values - burgers_eval(p, snap.x, 0.3), h)
    late = traj.snapshots[1.5]
    shock = late.x >= p.x_max
    extrema = pde.count_local_extrema(late.values[shock])
    # Strang order: successive differences under dt halving at t = 0.5
    runs = [pde.simulate(f0, s, 0.5, (0.5,)).snapshots[0.5].values for s in (4e-4, 2e-4, 1e-4)]
    ratio = float(np.linalg.norm(runs[0] - runs[1]) / np.linalg.norm(runs[1] - runs[2]))
    checks = {
        "mass_drift": dm <= 1e-6, "l2_drift": dl <= 1e-6,
        "strang_ratio": abs(ratio - 4.0) <= 0.5, "burgers_agreement": b_err <= 0.1,
        "dsw_oscillations": extrema >= 5,
    }
    return {"delta": delta, "eps": eps, "mass_drift": dm, "l2_drift": dl,
            "strang_ratio": ratio, "burgers_l2_error_t0.3": b_err,
            "extrema_t1.5": extrema, "checks": checks, "passed": all(checks.values())}


def c12_mtp_suite(eps=0.05, h=1.0, alpha=0.6):
    worst_saddle = 0.0
    for X in np.linspace(-10, 10, 41):
        res = mtp.saddle_points(float(X), range(-5, 6)).residuals()
        worst_saddle = max(worst_saddle, max(res.values()))
    worst_res = 0.0
    for nu in ("-inf", "-1/2", "-5/2", "3/2"):
        for X in np.linspace(-0.5, 0.5, 10):
            worst_res = max(worst_res, mtp.model_residual(nu, float(X), eps, h)["relative"])
    airy = []
    for e in (0.1, 0.05, 0.02):
        r = mtp.airy_compare("-inf", np.linspace(-1, 1, 11), e, h, alpha)
        airy.append({"eps": e, "max_relative_error": r["max_relative_error"]})
    errs = [a["max_relative_error"] for a in airy]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    checks = {"saddles": worst_saddle <= 1e-12, "model_equation": worst_res <= 1e-6,
              "airy_decreasing": decreasing}
    return {"max_saddle_residual": worst_saddle, "max_model_residual": worst_res,
            "airy": airy, "checks": checks, "passed": all(checks.values())}


CRITERIA = [
    Criterion(1, "Lambert-W round trip", 1, c01_lambert_roundtrip),
    Criterion(2, "catastrophe time", 1, c02_catastrophe_time),
    Criterion(3, "Weyl-law consistency", 30, c03_weyl_consistency),
    Criterion(4, "potential identity", 60, c04_potential_identity),
    Criterion(5, "quadrupole identity", 60, c05_quadrupole_identity),
    Criterion(6, "Fredholm oracle", 120, c06_fredholm_oracle),
    Criterion(7, "magnitude and argument bounds", 120, c07_magnitude_bounds),
    Criterion(8, "L2 identity", 600, c08_l2_identity),
    Criterion(9, "L2 convergence", 1800, c09_l2_convergence),
    Criterion(10, "variational verification", 300, c10_variational),
    Criterion(11, "PDE suite", 1200, c11_pde_suite),
    Criterion(12, "turning-point suite", 600, c12_mtp_suite),
]


def run_criterion(number: int) -> dict:
    crit = next((c for c in CRITERIA if c.number == number), None)
    if crit is None:
        raise KeyError(number)
    result = crit.func()
    return {"criterion": crit.number, "name": crit.name,
            "runtime_limit_s": crit.runtime_limit_s, **result}


def run_suite(numbers=None) -> dict:
    numbers = [c.number for c in CRITERIA] if numbers is None else list(numbers)
    results = [run_criterion(n) for n in numbers]
    return {"criteria": results, "passed": all(r["passed"] for r in results)}
