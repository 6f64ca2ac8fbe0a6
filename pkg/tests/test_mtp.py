import math

import numpy as np
import pytest
from scipy.special import airy, gamma

from ilwsse import mtp
from ilwsse.errors import DomainError, ValidationError

EPS, H = 0.05, 1.0

# Contour integrals evaluated with mpmath (40 digits) along hand-built
# polylines with the same endpoints at -infinity.
PSI_ORACLE = {
    ("-inf", 0j): -1.328044347802894024 - 1.089554553869048599j,
    ("-inf", 0.1 - 0.01j): -0.384074542992948541 + 2.054730320395695676j,
    ("-1/2", 0j): -0.000246375181030401 - 1.876367077326136732j,
    ("-1/2", 0.1 - 0.01j): -0.484237284256760898 + 1.047097258516365038j,
}
# psi_{-5/2} + psi_{-1/2} at Z = 0.1 - 0.01i along one concatenated polyline
PSI_SUM_ORACLE = -2.13953212174551977397e141 - 2.92496439409186327315e141j
# root of k + exp(-k-1) = -10 near 5 pi i (mpmath findroot, 40 digits)
SADDLE_M10_N2 = -3.761530081577637981 + 14.542407787876068002j


@pytest.mark.parametrize("text,value", [("-inf", -math.inf), ("-5/2", -2.5), ("3/2", 1.5),
                                        (-0.5, -0.5), ("-4.5", -4.5)])
def test_parse_nu_accepts(text, value):
    assert mtp.parse_nu(text) == value


@pytest.mark.parametrize("bad", ["1", "0.5", "abc", 2.0, math.inf])
def test_parse_nu_rejects(bad):
    with pytest.raises(ValidationError):
        mtp.parse_nu(bad)


def test_saddles_coalesce_at_fold():
    pts = mtp.saddle_points(0.0).points
    assert pts[0] == pts[-1] == -1.0


def test_saddle_large_positive_X():
    k0 = mtp.saddle_points(10.0, branches=(0,)).points[0]
    a = math.exp(-11.0)
    # series W0(-a) = -a - a^2 - 3a^3/2 - ...
    assert abs(k0 - (10.0 - a - a * a - 1.5 * a ** 3)) < 1e-14


def test_saddle_far_branch_matches_root():
    s = mtp.saddle_points(-10.0, branches=(2, -3))
    assert abs(s.points[2] - SADDLE_M10_N2) < 1e-12
    # the lower half plane mirror
    assert abs(s.points[-3] - SADDLE_M10_N2.conjugate()) < 1e-12
    # only loosely near the large-|k| estimate 5 pi i - (log 11 + 1)
    assert abs(s.points[2].imag - 5 * math.pi) < 0.1 * 5 * math.pi


def test_saddle_residuals_small():
    for X in np.linspace(-8, 8, 17):
        for X_t in (X, X + 0.7j):
            res = mtp.saddle_points(X_t, branches=(-2, -1, 0, 1)).residuals()
            assert max(res.values()) < 1e-12 * max(1.0, abs(X_t))


@pytest.mark.parametrize("key", sorted(PSI_ORACLE, key=str))
def test_psi_matches_independent_quadrature(key):
    nu, Z = key
    r = mtp.psi_fundamental(nu, Z, EPS, H)
    ref = PSI_ORACLE[key]
    assert abs(r.value - ref) <= 1e-9 * abs(ref)
    assert r.error < 1e-8


def test_psi_additive_over_contours():
    Z = 0.1 - 0.01j
    total = (mtp.psi_fundamental(-2.5, Z, EPS, H).value
             + mtp.psi_fundamental(-0.5, Z, EPS, H).value)
    assert abs(total - PSI_SUM_ORACLE) <= 1e-9 * abs(PSI_SUM_ORACLE)


@pytest.mark.parametrize("nu", ["-inf", -4.5, -2.5, -0.5, 1.5])
@pytest.mark.parametrize("X", [-0.6, 0.0, 0.45])
def test_model_equation_residual(nu, X):
    assert mtp.model_residual(nu, X, EPS, H)["relative"] < 1e-6


def test_airy_form_at_origin():
    # at chi = 0 the Airy factor reduces to Ai(0) = 3^(-2/3)/Gamma(2/3)
    ai0 = 3 ** (-2.0 / 3.0) / gamma(2.0 / 3.0)
    assert abs(airy(0.0)[0] - ai0) < 1e-15
    pref = 2 * math.pi * (2 * H * EPS) ** (1.0 / 3.0)
    expected = pref * ai0 * np.exp(1j / (2 * H * EPS) + 0.5)
    assert abs(mtp.psi_formula("-inf", 0.0, EPS, H, 0.6) - expected) < 1e-12 * abs(expected)


def test_closed_form_requires_known_nu():
    with pytest.raises(ValidationError):
        mtp.psi_formula_log(0.0, 0.0, EPS, H, 0.6)


def test_alpha_outside_window_rejected():
    with pytest.raises(DomainError):
        mtp.airy_compare("-inf", [0.0], EPS, H, 0.7)


def test_exponential_branch_within_tenth():
    res = mtp.airy_compare(-2.5, np.linspace(-1, 1, 9), EPS, H, 0.6)
    assert res["max_relative_error"] <= 0.1


def test_airy_error_decreases_with_eps():
    chi = np.linspace(-1, 1, 9)
    errs = [mtp.airy_compare("-inf", chi, e, H, 0.6)["max_relative_error"]
            for e in (0.1, 0.05, 0.02)]
    assert errs[0] > errs[1] > errs[2]


def test_airy_branch_within_stated_tolerance():
    # The documented example asks for a deviation of at most 0.15 at eps = 0.05.
    # The measured deviation is about 0.3; see the decision log.  Kept as a
    # genuine failing check rather than relaxed.
    res = mtp.airy_compare("-inf", np.linspace(-1, 1, 9), EPS, H, 0.6)
    assert res["max_relative_error"] <= 0.15
