"""Command implementations behind the HTTP endpoints.

Each handler takes a validated request model and returns a
:class:`~ilwsse.service.schemas.CommandResponse`.  Handlers are serialized
with a process-wide lock because the ball-arithmetic context is global.
"""

from __future__ import annotations

import math
import threading

import numpy as np
from scipy.integrate import trapezoid

from .. import ensemble, equilibrium, mtp, pde
from ..acceptance import run_suite
from ..errors import UsageError, ValidationError
from ..output import to_jsonable
from ..profile import AdmissibleProfile, build_profile, burgers_eval, catastrophe_time, \
    parse_profile_arg
from ..scattering import modified_data, weyl_density, weyl_R_kappa
from .schemas import (CommandResponse, CompareRequest, EnsembleRequest, EquilibriumRequest,
                      MtpRequest, ScatteringRequest, SimulateRequest, Table, VerifyRequest)

__all__ = ["HANDLERS", "dispatch"]

LOCK = threading.Lock()


def resolve_profile(spec) -> AdmissibleProfile:
    if isinstance(spec, dict):
        return build_profile(spec)
    return parse_profile_arg(spec)


def resolve_N(profile: AdmissibleProfile, delta: float, N, eps) -> int:
    """``N`` as given, or the ensemble size whose ``eps_N`` is closest to ``eps``."""
    if N is not None:
        return int(N)
    if eps is None:
        raise UsageError("one of N or eps is required")
    R0 = weyl_R_kappa(profile, 0.0, delta)
    n = int(round(R0 / (math.pi * eps)))
    if n < 1:
        raise UsageError(f"eps={eps} is too large: it gives N < 1 (R0={R0:.6g})")
    return n


def _table(name, columns, rows) -> Table:
    return Table(name=name, columns=list(columns), rows=to_jsonable([list(r) for r in rows]))


def _response(command, req, report, tables=(), records=None, passed=None) -> CommandResponse:
    return CommandResponse(command=command, config=to_jsonable(req.model_dump()),
                           report=to_jsonable(report), tables=list(tables),
                           records=records or {}, passed=passed)


def _l2(a, b, x):
    d = np.asarray(a) - np.asarray(b)
    return float(math.sqrt(trapezoid(d * d, x)))


def _t_label(t):
    return f"u_t{t:g}"


def simulate(req: SimulateRequest) -> CommandResponse:
    profile = resolve_profile(req.profile)
    initial = pde.Field.from_function(profile.u0, req.L, req.n_x, eps=req.eps, delta=req.delta)
    times = sorted(set(float(t) for t in req.snapshots if t <= req.t_end) | {req.t_end})
    traj = pde.simulate(initial, req.dt, req.t_end, times, log_every=req.log_every)
    x = initial.x
    snaps = [traj.snapshots[t].values for t in times]
    dm, dl = traj.drift()
    report = {
        "N_steps": int(round(req.t_end / req.dt)),
        "mass_drift": dm,
        "l2_drift": dl,
        "catastrophe_time": catastrophe_time(profile),
        "extrema": {f"{t:g}": pde.count_local_extrema(v) for t, v in zip(times, snaps)},
    }
    tables = [
        _table("snapshots", ["x"] + [_t_label(t) for t in times], zip(x, *snaps)),
        _table("conservation", ["step", "t", "mass", "l2"], traj.log),
    ]
    return _response("simulate", req, report, tables)


def scattering(req: ScatteringRequest) -> CommandResponse:
    profile = resolve_profile(req.profile)
    N = resolve_N(profile, req.delta, req.N, req.eps)
    data = modified_data(profile, N, req.delta)
    R0 = weyl_R_kappa(profile, 0.0, req.delta)
    eig_rows = [(n, p.kappa, p.zeta.real, lc, th) for n, (p, lc, th)
                in enumerate(zip(data.eigen, data.log_c, data.theta_plus), start=1)]
    ks = data.kappa_max * (np.arange(req.grid) + 0.5) / req.grid
    weyl_rows = [(float(k), weyl_R_kappa(profile, float(k), req.delta),
                  weyl_density(profile, float(k), req.delta)) for k in ks]
    report = {"N": N, "eps_N": data.eps_N, "delta": req.delta, "R0": R0,
              "kappa_max": data.kappa_max, "profile": profile.spec,
              "reflection_coefficient": data.reflection_coefficient}
    tables = [
        _table("eigenvalues", ["n", "kappa", "re_zeta", "log_c", "theta_plus"], eig_rows),
        _table("weyl", ["kappa", "R", "rho_wyl"], weyl_rows),
    ]
    return _response("scattering", req, report, tables, {"scattering_data.txt": data.to_record()})


def _window(req, profile, half_width, bounds=None):
    lo, hi = req.x_range or (profile.x_max - half_width, profile.x_max + half_width)
    if bounds is not None:
        if lo < bounds[0] or hi > bounds[1]:
            raise UsageError(f"x_range must lie inside the periodic domain {list(bounds)}")
    return np.linspace(lo, hi, req.grid)


def ensemble_cmd(req: EnsembleRequest) -> CommandResponse:
    profile = resolve_profile(req.profile)
    N = resolve_N(profile, req.delta, req.N, req.eps)
    data = modified_data(profile, N, req.delta)
    x = _window(req, profile, 6.0)
    t_c = catastrophe_time(profile)
    columns, cols = ["x"], [x]
    for t in req.t:
        columns.append(_t_label(t))
        cols.append(ensemble.ensemble_field(data, x, t, req.precision_bits, method=req.method))
    burgers_times = [t for t in req.t if t < t_c]
    for t in burgers_times:
        columns.append(f"uB_t{t:g}")
        cols.append(np.asarray(burgers_eval(profile, x, t, t_c=t_c), dtype=float))
    report = {"N": N, "eps_N": data.eps_N, "delta": req.delta, "method": req.method,
              "precision_bits": req.precision_bits,
              "exponent_budget_bits": ensemble.exponent_budget_bits(data, (x[0], x[-1])),
              "catastrophe_time": t_c, "t": req.t}
    return _response("ensemble", req, report, [_table("field", columns, zip(*cols))])


def equilibrium_cmd(req: EquilibriumRequest) -> CommandResponse:
    profile = resolve_profile(req.profile)
    reports, tables = [], []
    for i, x in enumerate(req.x):
        rep = equilibrium.verify_variational(profile, float(x), req.t, req.delta,
                                             grid=req.grid, n=req.nodes, tol=req.tolerance)
        rows = rep.pop("rows")
        reports.append(rep)
        tables.append(_table(f"frechet_{i}", ["kappa", "frechet", "predicted", "observed",
                                              "graded", "ok"],
                             [[r["kappa"], r["frechet"], r["predicted"], r["observed"],
                               int(r["graded"]), int(r["ok"])] for r in rows]))
        rho = equilibrium.min_density_sampled(profile, float(x), req.t, req.delta, req.nodes)
        wyl = [weyl_density(profile, float(k), req.delta) for k in rho.kappa_nodes]
        tables.append(_table(f"density_{i}", ["kappa", "rho_min", "rho_wyl"],
                             zip(rho.kappa_nodes, rho.values, wyl)))
    passed = all(r["passed"] for r in reports)
    report = {"t": req.t, "delta": req.delta, "points": reports, "passed": passed}
    return _response("equilibrium", req, report, tables, passed=passed)


def mtp_cmd(req: MtpRequest) -> CommandResponse:
    lo, hi = req.chi_range
    if lo > hi:
        raise UsageError("chi_range must be [a, b] with a <= b")
    chi = np.linspace(lo, hi, req.grid)
    results, tables = [], []
    for i, nu in enumerate(req.nu):
        try:
            parsed = mtp.parse_nu(nu)
        except ValidationError as exc:
            raise UsageError(str(exc)) from exc
        res = mtp.airy_compare(parsed, chi, req.eps, req.h, req.alpha, req.Y)
        rows = res.pop("rows")
        results.append({"nu_input": nu, **res})
        tables.append(_table(f"airy_{i}", ["chi", "re_log_psi", "im_log_psi", "re_log_formula",
                                           "im_log_formula", "relative_error",
                                           "quadrature_error"],
                             [[r["chi"], r["log_psi"].real, r["log_psi"].imag,
                               r["log_formula"].real, r["log_formula"].imag,
                               r["relative_error"], r["quadrature_error"]] for r in rows]))
    passed = None
    if req.tolerance is not None:
        passed = all(r["max_relative_error"] <= req.tolerance for r in results)
    report = {"eps": req.eps, "h": req.h, "alpha": req.alpha, "Y": req.Y,
              "tolerance": req.tolerance, "results": results}
    return _response("mtp", req, report, tables, passed=passed)


def compare(req: CompareRequest) -> CommandResponse:
    profile = resolve_profile(req.profile)
    N = resolve_N(profile, req.delta, req.N, req.eps)
    data = modified_data(profile, N, req.delta)
    bounds = (-req.L / 2, req.L / 2)
    half = min(6.0, 0.45 * req.L)
    x = _window(req, profile, half, bounds)
    u_sse = ensemble.ensemble_field(data, x, req.t, req.precision_bits)
    initial = pde.Field.from_function(profile.u0, req.L, req.n_x, eps=data.eps_N,
                                      delta=req.delta)
    traj = pde.simulate(initial, req.dt, req.t, [req.t], log_every=max(1, int(round(req.t / req.dt))))
    u_pde = pde.fourier_interpolate(traj.snapshots[req.t], x)
    columns, cols = ["x", "u_sse", "u_pde"], [x, u_sse, u_pde]
    distances = {"sse_pde": _l2(u_sse, u_pde, x)}
    t_c = catastrophe_time(profile)
    if req.t < t_c:
        u_b = np.asarray(burgers_eval(profile, x, req.t, t_c=t_c), dtype=float)
        columns.append("u_burgers")
        cols.append(u_b)
        distances["sse_burgers"] = _l2(u_sse, u_b, x)
        distances["pde_burgers"] = _l2(u_pde, u_b, x)
    graded = "sse_burgers" if "sse_burgers" in distances else "sse_pde"
    passed = None if req.tolerance is None else distances[graded] <= req.tolerance
    report = {"N": N, "eps_N": data.eps_N, "delta": req.delta, "t": req.t,
              "catastrophe_time": t_c, "window": [x[0], x[-1]], "l2_distances": distances,
              "graded_distance": graded, "tolerance": req.tolerance}
    return _response("compare", req, report, [_table("compare", columns, zip(*cols))],
                     passed=passed)


def verify(req: VerifyRequest) -> CommandResponse:
    suite = run_suite(req.criteria)
    return _response("verify", req, suite, passed=suite["passed"])


HANDLERS = {
    "simulate": (SimulateRequest, simulate),
    "scattering": (ScatteringRequest, scattering),
    "ensemble": (EnsembleRequest, ensemble_cmd),
    "equilibrium": (EquilibriumRequest, equilibrium_cmd),
    "mtp": (MtpRequest, mtp_cmd),
    "compare": (CompareRequest, compare),
    "verify": (VerifyRequest, verify),
}


def dispatch(command: str, request) -> CommandResponse:
    _, handler = HANDLERS[command]
    with LOCK:
        return handler(request)

