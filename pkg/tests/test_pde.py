import math

import numpy as np
import pytest

from ilwsse import ensemble, pde
from ilwsse.errors import ConvergenceError, DomainError, ValidationError
from ilwsse.profile import burgers_eval

# coth(10) - 1/10 from mpmath
TAU_10 = 0.90000000412230725337
# 2 tanh 6 and int_{-6}^{6} sech^4 = 2 (tanh 6 - tanh^3 6 / 3)
MASS_L12 = 1.99997542330159114113
L2SQ_L12 = 2 * (math.tanh(6) - math.tanh(6) ** 3 / 3)


def sech2_field(L=12.0, n=2000, eps=0.05, delta=1.0):
    return pde.Field.from_function(lambda x: 1 / np.cosh(x) ** 2, L, n, eps=eps, delta=delta)


def test_tau_values():
    assert pde.tau(0.0) == 0.0
    assert pde.tau(10.0) == pytest.approx(TAU_10, rel=1e-15)
    k = np.linspace(-3, 3, 31)
    assert np.allclose(pde.tau(-k), -pde.tau(k), atol=0)
    # series and closed form agree across the switch
    lo, hi = pde.tau(0.99e-4), pde.tau(1.01e-4)
    assert (hi - lo) == pytest.approx(0.02e-4 / 3, rel=1e-6)


def test_field_validation():
    with pytest.raises(ValidationError):
        pde.Field(1.0, np.zeros(8), 0.0, 0.1, 1.0)
    with pytest.raises(ValidationError):
        pde.Field(1.0, np.full(32, np.nan), 0.0, 0.1, 1.0)


def test_apply_T_on_modes():
    L, n, eps, delta = 2 * math.pi, 64, 0.1, 2.0
    const = pde.Field(L, np.ones(n), 0.0, eps, delta)
    assert np.allclose(pde.apply_T(const).values, 0.0, atol=1e-15)
    x = pde.grid(L, n)
    f = pde.Field(L, np.cos(2 * math.pi * x / L), 0.0, eps, delta)
    expected = -pde.tau(delta * eps * 2 * math.pi / L) * np.sin(2 * math.pi * x / L)
    assert np.allclose(pde.apply_T(f).values, expected, atol=1e-14)
    neg = pde.Field(L, -f.values, 0.0, eps, delta)
    assert np.allclose(pde.apply_T(neg).values, -pde.apply_T(f).values, atol=1e-15)


def test_zero_stays_zero():
    f = pde.Field(12.0, np.zeros(128), 0.0, 0.05, 1.0)
    assert np.all(pde.step(f, 1e-3).values == 0.0)


def test_linear_single_mode_dispersion():
    L, n, eps, delta, m = 12.0, 256, 0.3, 0.7, 5
    k = 2 * math.pi * m / L
    x = pde.grid(L, n)
    f = pde.Field(L, np.cos(k * x), 0.0, eps, delta)
    t = 0.37
    traj = pde.simulate(f, 0.01, t, [t], nonlinear=False)
    # omega(k) = -eps tau(delta eps k) k^2, so cos(k x - omega t)
    omega = -eps * pde.tau(delta * eps * k) * k * k
    assert np.allclose(traj.snapshots[t].values, np.cos(k * x - omega * t), atol=1e-12)
    # small delta eps k recovers the KdV relation: waves travel left
    assert omega / k < 0


def test_conserved_quantities():
    assert pde.conserved(pde.Field(12.0, np.zeros(64), 0.0, 0.1, 1.0)) == (0.0, 0.0)
    mass, l2 = pde.conserved(sech2_field())
    # sech^2 is not periodic on [-6, 6): the slope jump at the seam leaves an
    # end correction of order dx^2 |u'(6)| / 6, about 1e-10 here
    assert mass == pytest.approx(MASS_L12, rel=1e-8)
    assert l2 ** 2 == pytest.approx(L2SQ_L12, rel=1e-8)


def test_step_guards():
    f = sech2_field(n=256)
    with pytest.raises(DomainError):
        pde.step(f, 0.1)
    with pytest.raises(DomainError):
        pde.simulate(f, 1e-3, 0.0105)
    with pytest.raises(DomainError):
        pde.simulate(f, 1e-3, 0.01, [0.5])
    with pytest.raises(ConvergenceError):
        pde._check_growth(1.0, np.array([20.0]))


def test_pre_catastrophe_burgers_agreement(sech2):
    f = sech2_field(n=1024)
    t = 0.3
    traj = pde.simulate(f, 2e-4, t, [t])
    ub = burgers_eval(sech2, f.x, t)
    err = math.sqrt(np.sum((traj.snapshots[t].values - ub) ** 2) * f.L / f.n_x)
    assert err <= 0.05
    dm, dl = traj.drift()
    assert dm < 1e-12 and dl < 1e-8


def test_oscillations_shrink_with_eps(sech2):
    counts = {}
    for eps in (0.1, 0.05):
        f = sech2_field(n=1024, eps=eps)
        traj = pde.simulate(f, 2e-4, 1.5, [1.5])
        v = traj.snapshots[1.5].values
        counts[eps] = pde.count_local_extrema(v[f.x >= sech2.x_max])
    assert counts[0.05] >= 5
    assert counts[0.05] >= 1.5 * counts[0.1]


def test_single_soliton_from_ensemble_translates(data):
    d = data(1)
    L, n = 80.0, 1024
    x = pde.grid(L, n)
    f = pde.Field(L, ensemble.ensemble_field(d, x, 0.0), 0.0, d.eps_N, d.delta)
    traj = pde.simulate(f, 1e-3, 2.0, [2.0])
    exact = ensemble.ensemble_field(d, x, 2.0)
    rel = np.linalg.norm(traj.snapshots[2.0].values - exact) / np.linalg.norm(exact)
    assert rel <= 1e-3


def test_fourier_interpolation():
    L, n = 12.0, 64
    x = pde.grid(L, n)
    g = lambda s: np.cos(2 * math.pi * 3 * s / L) + 0.5 * np.sin(2 * math.pi * 7 * s / L)
    f = pde.Field(L, g(x), 0.0, 0.1, 1.0)
    assert np.allclose(pde.fourier_interpolate(f, x), f.values, atol=1e-13)
    off = np.array([-5.91, 0.123, 4.4])
    assert np.allclose(pde.fourier_interpolate(f, off), g(off), atol=1e-13)


def test_count_extrema():
    x = np.linspace(0, 4 * math.pi, 400)
    assert pde.count_local_extrema(np.sin(x)) == 4
    assert pde.count_local_extrema(np.sin(x) + 1e-6 * np.sin(300 * x)) == 4
    assert pde.count_local_extrema([1.0, 2.0]) == 0
