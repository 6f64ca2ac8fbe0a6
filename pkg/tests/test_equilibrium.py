import math

import numpy as np
import pytest

from ilwsse import ensemble, equilibrium as eq
from ilwsse.errors import DomainError
from ilwsse.profile import burgers_eval
from ilwsse.scattering import tail_theta_kappa, weyl_density
from ilwsse.specfun import g_inverse, kappa_max, zeta_of_kappa

DELTA = 0.5
# mpmath.findroot of y + 0.6 sech^2(y) = 0.5, then sech^2(y)
BURGERS_05_03 = 0.991093473636441545373779034346


@pytest.fixture(scope="module")
def wyl(sech2):
    return eq.wyl_density_sampled(sech2, DELTA)


@pytest.fixture(scope="module")
def km():
    return kappa_max(1.0, DELTA)


def test_potential_vanishes_on_real_axis(wyl):
    assert eq.potential_L(wyl, 0.7) == 0.0


def test_potential_decays_like_inverse_distance(wyl):
    a = eq.potential_L(wyl, 100j) * 100
    b = eq.potential_L(wyl, 1000j) * 1000
    assert a > 0 and b == pytest.approx(a, rel=2e-2)


def test_potential_equals_tail_sum(sech2, wyl):
    for k in (0.15, 0.6, 1.1):
        lhs = eq.potential_L(wyl, zeta_of_kappa(k, DELTA))
        rhs = tail_theta_kappa(sech2, k, "+", DELTA) + tail_theta_kappa(sech2, k, "-", DELTA)
        assert lhs == pytest.approx(rhs, abs=1e-6)


def test_zero_density_functionals(sech2, km):
    zero = eq.sample_density(lambda k: 0.0, [(0.0, km, "zero")], DELTA, km, 16)
    assert eq.functional_P(zero) == 0.0
    assert eq.functional_Q(zero) == 0.0
    assert eq.functional_E(zero, 0.3, 0.1, sech2) == 0.0


def test_quadrupole_of_weyl_density(wyl):
    target = -(math.pi / (4 * DELTA)) * 4.0 / 3.0
    assert eq.functional_Q(wyl) == pytest.approx(target, rel=1e-6)


def test_energy_kernel_positive_definite(wyl, km):
    rng = np.random.default_rng(3)
    for _ in range(4):
        c1, c2 = rng.uniform(0, 1, 3), rng.uniform(0, 1, 3)
        a1 = lambda k, c=c1: (c[0] + c[1] * np.cos(3 * k + c[2])) / 2 + 0.25
        a2 = lambda k, c=c2: (c[0] + c[1] * np.cos(3 * k + c[2])) / 2 + 0.25
        diff = eq.sample_density(lambda k: float((a1(k) - a2(k)) * wyl(k)),
                                 [(0.0, km, "smooth")], DELTA, km, 24)
        energy = diff.integrate(lambda ks: np.array(
            [eq.potential_L(diff, zeta_of_kappa(float(k), DELTA)) for k in ks]))
        assert energy >= -1e-10


def test_energy_convex_on_random_pair(sech2, wyl, km):
    r1 = eq.sample_density(lambda k: 0.8 * float(wyl(k)), [(0.0, km, "smooth")], DELTA, km, 24)
    r2 = eq.sample_density(lambda k: 0.2 * float(wyl(k)) * (1 + math.sin(k)),
                           [(0.0, km, "smooth")], DELTA, km, 24)
    mid = eq.sample_density(lambda k: 0.5 * (float(r1(k)) + float(r2(k))),
                            [(0.0, km, "smooth")], DELTA, km, 24)
    E = lambda r: eq.functional_E(r, 0.2, 0.0, sech2)
    assert E(mid) <= 0.5 * (E(r1) + E(r2)) + 1e-9


def test_min_density_limits(sech2, km):
    k = 0.5
    assert eq.min_density(sech2, k, -25.0, 0.0, DELTA) == pytest.approx(
        weyl_density(sech2, k, DELTA), rel=1e-9)
    assert eq.min_density(sech2, k, 25.0, 0.0, DELTA) == 0.0
    inner = eq.min_density(sech2, 0.1, 0.0, 0.0, DELTA)
    assert 0 < inner < weyl_density(sech2, 0.1, DELTA)


def test_min_density_admissible_across_plane(sech2):
    for x, t in ((-1.0, 0.0), (0.5, 0.2), (1.5, 0.5), (3.0, 0.3)):
        rho = eq.min_density_sampled(sech2, x, t, DELTA, 24)
        wyl = np.array([weyl_density(sech2, float(k), DELTA) for k in rho.kappa_nodes])
        assert np.all(rho.values >= -1e-12)
        assert np.all(rho.values <= wyl * (1 + 1e-10) + 1e-12)


def test_min_density_rejects_late_time(sech2):
    with pytest.raises(DomainError):
        eq.min_density(sech2, 0.3, 0.0, 0.7, DELTA)


def test_min_potential_limits(sech2, wyl):
    k = 0.6
    assert eq.min_potential(sech2, k, 40.0, 0.0, DELTA) == pytest.approx(0.0, abs=1e-12)
    lhs = eq.min_potential(sech2, k, -40.0, 0.0, DELTA)
    assert lhs == pytest.approx(eq.potential_L(wyl, zeta_of_kappa(k, DELTA)), abs=1e-6)


@pytest.mark.parametrize("x,t,k", [(0.3, 0.2, 0.5), (-1.5, 0.2, 1.0), (2.0, 0.1, 0.4)])
def test_min_potential_matches_sampled_minimizer(sech2, x, t, k):
    rho = eq.min_density_sampled(sech2, x, t, DELTA)
    assert eq.min_potential(sech2, k, x, t, DELTA) == pytest.approx(
        eq.potential_L(rho, zeta_of_kappa(k, DELTA)), abs=1e-6)


def test_min_potential_x_derivative_is_local(sech2):
    # beyond the right turning point, d/dx of the potential is minus the integrand
    k, x, t, h = 1.0, 1.8, 0.2, 1e-3
    z = complex(zeta_of_kappa(k, DELTA))
    U = float(burgers_eval(sech2, x, t))
    integrand = (z - g_inverse(-1, U, z, DELTA) - U).imag
    fd = (eq.min_potential(sech2, k, x + h, t, DELTA)
          - eq.min_potential(sech2, k, x - h, t, DELTA)) / (2 * h)
    assert fd == pytest.approx(-integrand, abs=1e-6)


@pytest.mark.parametrize("x,t,expected", [
    (0.0, 0.0, {"band"}),
    (20.0, 0.0, {"void"}),
    (1.0, 0.3, {"band", "void"}),
    (-1.0, 0.3, {"band", "saturation"}),
])
def test_variational_conditions(sech2, x, t, expected):
    rep = eq.verify_variational(sech2, x, t, DELTA, grid=16)
    assert rep["passed"]
    assert set(rep["regions"]) == expected


def test_far_right_band_collapses(sech2):
    rep = eq.verify_variational(sech2, 20.0, 0.0, DELTA, grid=16)
    assert rep["kappa_edge"] < 1e-3


def test_distributional_limit_values(sech2):
    assert eq.distributional_limit(sech2, 0.7, 0.0, DELTA)["value"] == pytest.approx(
        float(sech2.u0(np.array(0.7))), abs=1e-15)
    assert eq.distributional_limit(sech2, 0.5, 0.3, DELTA)["value"] == pytest.approx(
        BURGERS_05_03, abs=1e-12)


def test_weak_limit_of_eigenvalue_sums(data, wyl):
    errors_k, errors_q = [], []
    target_k = eq.functional_P(wyl)
    target_q = eq.functional_Q(wyl)
    for N in (8, 16, 32):
        d = data(N)
        errors_k.append(abs(ensemble.dipole_total(d) - target_k))
        errors_q.append(abs(ensemble.quadrupole_total(d) - target_q))
    assert errors_k[0] > errors_k[1] > errors_k[2]
    assert errors_q[0] > errors_q[1] > errors_q[2]
