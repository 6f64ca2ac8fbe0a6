import cmath
import math
import warnings

import numpy as np
import pytest

from ilwsse.errors import DomainError, SingularityError
from ilwsse.specfun import (G, ImaginaryResidualWarning, amplitude, g_inverse, kappa_max,
                            lambert_w, lambert_w_array, level_E, quadratrix, zeta_max,
                            zeta_of_kappa)

# Reference values computed with mpmath.lambertw at 40 digits.
W0_1 = 0.5671432904097838729999686622
WM1_M01 = -3.577152063957297141358513990
W2_1P2I = complex(-1.686913877937539655667268473, 11.96263143532281326195187646)
WM3_M5I = complex(-1.325791171320447013269712926, -18.77907347549143883350777569)


def test_lambert_trivial_values():
    assert lambert_w(0, 0) == 0
    assert abs(lambert_w(0, -math.exp(-1)) + 1) < 1e-7
    assert abs(lambert_w(-1, -math.exp(-1)) + 1) < 1e-7


@pytest.mark.parametrize("branch,z,expected", [
    (0, 1.0, W0_1),
    (-1, -0.1, WM1_M01),
    (2, 1 + 2j, W2_1P2I),
    (-3, -5j, WM3_M5I),
])
def test_lambert_reference_values(branch, z, expected):
    assert abs(lambert_w(branch, z) - expected) <= 1e-14 * max(1, abs(expected))


def test_lambert_branch_point_zero_rejected():
    with pytest.raises(DomainError):
        lambert_w(1, 0)


def test_lambert_round_trip_grid():
    rng = np.random.default_rng(1)
    mag = 10 ** rng.uniform(-6, 3, 2000)
    z = mag * np.exp(1j * rng.uniform(-math.pi, math.pi, mag.size))
    for n in range(-3, 4):
        w = lambert_w_array(n, z)
        assert np.max(np.abs(w * np.exp(w) - z) / (1 + np.abs(z))) <= 1e-12


def test_lambert_conjugation_off_axis():
    rng = np.random.default_rng(2)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    for n in (-2, -1, 0, 1, 2):
        a = lambert_w_array(-n, np.conj(z))
        b = np.conj(lambert_w_array(n, z))
        assert np.max(np.abs(a - b)) < 1e-12


def test_lambert_pairs_on_negative_axis():
    # on the cut (values from above) branches n and -1-n are conjugate
    x = -np.linspace(0.4, 30.0, 40)
    for n in (0, 1, 2):
        a = lambert_w_array(-1 - n, x)
        b = np.conj(lambert_w_array(n, x))
        assert np.max(np.abs(a - b)) < 1e-12


def test_lambert_on_cut_continuous_from_above():
    x = -2.0
    above = lambert_w(0, complex(x, 1e-14))
    assert abs(lambert_w(0, x) - above) < 1e-10


def test_lambert_branch_point_series():
    # w = -1 + p - p^2/3 with p = +/- sqrt(2(e z + 1))
    d = 1e-6
    z = -math.exp(-1) + d
    p = math.sqrt(2 * (math.e * z + 1))
    for n, sign in ((0, 1), (-1, -1)):
        w = lambert_w(n, z)
        series = -1 + sign * p - p * p / 3
        assert abs(w - series) < 10 * p ** 3


def test_quadratrix_examples():
    assert quadratrix(0.0, 0.7).zeta == pytest.approx(1 / 1.4, abs=1e-15)
    d = 0.8
    assert abs(quadratrix(math.pi / (4 * d), d).zeta - 1j * math.pi / (4 * d)) < 1e-14
    # 0.5 cot(0.5) from mpmath
    assert abs(quadratrix(0.5, 0.5).zeta - complex(0.9152438608562259596, 0.5)) < 1e-15


def test_quadratrix_argument_property():
    d = 0.5
    for k in np.linspace(0.01, 0.99 * math.pi / (2 * d), 40):
        z = quadratrix(float(k), d).zeta
        assert abs(cmath.phase(2 * d * z) - 2 * d * k) < 1e-12


def test_quadratrix_derivative_matches_difference():
    d, k, h = 0.5, 0.7, 1e-5
    fd = (zeta_of_kappa(k + h, d) - zeta_of_kappa(k - h, d)) / (2 * h)
    assert abs(quadratrix(k, d).zeta_prime - fd) < 1e-8
    assert abs(quadratrix(0.0, d).zeta_prime - 1j) < 1e-12


def test_quadratrix_domain():
    with pytest.raises(DomainError):
        quadratrix(math.pi, 0.5)


def test_level_E_values():
    d = 0.5
    assert abs(level_E(1 / (2 * d), d)) < 1e-15
    assert level_E(zeta_max(1.0, d), d) == pytest.approx(1.0, abs=1e-12)
    km = kappa_max(1.0, d)
    mid = level_E(zeta_of_kappa(km / 2, d), d)
    assert 0 < mid < 1
    with pytest.raises(DomainError):
        level_E(0, d)


def test_level_E_flags_points_off_the_curve():
    with pytest.warns(ImaginaryResidualWarning):
        level_E(1 + 1j, 0.5)


def test_level_E_monotone_along_arc():
    d = 0.5
    ks = np.linspace(0, kappa_max(1.0, d), 30)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        levels = [level_E(zeta_of_kappa(float(k), d), d) for k in ks]
    assert np.all(np.diff(levels) > 0)


def test_g_inverse_named_values():
    d = 0.5
    z = quadratrix(0.8, d).zeta
    assert abs(g_inverse(-1, 0.0, z, d) - z) < 1e-13
    assert abs(g_inverse(0, 0.0, z, d) - z.conjugate()) < 1e-13
    eta = g_inverse(-1, 0.3, z, d)
    assert abs(G(eta, z, d) - 0.3) < 1e-11


def test_amplitude_singular_at_turning_point():
    d = 0.5
    z = quadratrix(0.8, d).zeta
    E = level_E(z, d)
    for n in (0, -1):
        with pytest.raises(SingularityError):
            amplitude(n, E, z, d)


def test_amplitude_regular_branches():
    d = 0.5
    z = quadratrix(0.6, d).zeta
    for U in np.linspace(0, 1, 11):
        assert np.isfinite(amplitude(-2, float(U), z, d))
    w = -2 * d * z.conjugate()  # W_0 at U = 0 on the quadratrix
    assert abs(amplitude(0, 0.0, z, d) - cmath.sqrt(-w / (1 + w))) < 1e-13
