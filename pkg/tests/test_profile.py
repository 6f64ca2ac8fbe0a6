import math

import numpy as np
import pytest
from scipy.integrate import quad

from ilwsse.errors import DomainError, UsageError, ValidationError
from ilwsse.profile import (build_profile, burgers_eval, catastrophe_time, load_profile_spec,
                            parse_profile_arg, profile_from_functions, turning_points,
                            turning_points_level)
from ilwsse.specfun import zeta_max

# mpmath.findroot of y + 0.6 sech^2(y) = 0.5, then sech^2(y)
BURGERS_05_03 = 0.991093473636441545373779034346


def test_sech2_geometry(sech2):
    assert sech2.u_max == pytest.approx(1.0, abs=1e-14)
    assert abs(sech2.x_max) < 1e-10
    assert sech2.decay_certificate > 0


def test_shifted_scaled_profile():
    p = build_profile("sech2", amplitude=0.5, center=1.0)
    assert p.u_max == pytest.approx(0.5, abs=1e-14)
    assert p.x_max == pytest.approx(1.0, abs=1e-10)


def test_parse_profile_argument():
    p = parse_profile_arg("sech2:amplitude=0.5,center=1")
    assert p.spec["amplitude"] == 0.5
    with pytest.raises(UsageError):
        parse_profile_arg("sech2:amplitude")
    with pytest.raises(UsageError):
        parse_profile_arg("nosuch")


def test_two_lobe_profile_rejected():
    u = lambda x: np.exp(-(x - 2) ** 2) + np.exp(-(x + 2) ** 2)
    du = lambda x: -2 * (x - 2) * np.exp(-(x - 2) ** 2) - 2 * (x + 2) * np.exp(-(x + 2) ** 2)
    with pytest.raises(ValidationError, match="single-lobe"):
        profile_from_functions(u, du)


def test_negative_amplitude_rejected():
    with pytest.raises(ValidationError):
        build_profile("sech2", amplitude=-1.0)


def test_tabulated_profile_matches_analytic():
    x = np.linspace(-25, 25, 2001)
    p = build_profile({"kind": "tabulated", "x": x.tolist(), "u": (1 / np.cosh(x) ** 2).tolist()})
    assert p.u_max == pytest.approx(1.0, abs=1e-6)
    assert abs(p.x_max) < 1e-3


def test_profile_spec_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"kind": "gaussian", "amplitude": 0.8, "width": 1.5}')
    p = load_profile_spec(path)
    assert p.u_max == pytest.approx(0.8)
    (tmp_path / "bad.json").write_text("[1, 2]")
    with pytest.raises(UsageError):
        load_profile_spec(tmp_path / "bad.json")


def test_turning_points_sech2_closed_form(sech2):
    for E in (0.1, 0.5, 0.9):
        tp = turning_points_level(sech2, E)
        expected = math.acosh(1 / math.sqrt(E))
        assert tp.x_minus == pytest.approx(-expected, abs=1e-12)
        assert tp.x_plus == pytest.approx(expected, abs=1e-12)


def test_turning_points_coincide_at_top(sech2):
    tp = turning_points(sech2, zeta_max(1.0, 0.5), 0.5)
    assert abs(tp.x_minus) < 1e-6 and abs(tp.x_plus) < 1e-6


def test_turning_points_out_of_range(sech2):
    with pytest.raises(DomainError):
        turning_points_level(sech2, 1.5)


def test_catastrophe_times():
    assert catastrophe_time(build_profile("sech2")) == pytest.approx(3 * math.sqrt(3) / 8, abs=1e-12)
    half = build_profile("sech2", amplitude=0.5)
    assert catastrophe_time(half) == pytest.approx(3 * math.sqrt(3) / 4, abs=1e-11)
    shifted = build_profile("sech2", center=5.0)
    assert catastrophe_time(shifted) == pytest.approx(3 * math.sqrt(3) / 8, abs=1e-11)


def test_burgers_values(sech2):
    xs = np.linspace(-4, 4, 9)
    assert np.allclose(burgers_eval(sech2, xs, 0.0), sech2.u0(xs), atol=1e-15)
    assert abs(burgers_eval(sech2, 40.0, 0.5)) < 1e-30
    assert burgers_eval(sech2, 0.5, 0.3) == pytest.approx(BURGERS_05_03, abs=1e-12)


def test_burgers_rejects_late_times(sech2):
    with pytest.raises(DomainError):
        burgers_eval(sech2, 0.0, 0.7)


def test_burgers_max_and_mass_conserved(sech2):
    for t in (0.1, 0.3, 0.6):
        xs = np.linspace(-2, 3, 20001)
        assert np.max(burgers_eval(sech2, xs, t)) == pytest.approx(1.0, abs=1e-6)
        mass = quad(lambda x: float(burgers_eval(sech2, x, t)), -30, 30, limit=400,
                    points=[2 * t - 0.5, 2 * t, 2 * t + 0.5])[0]
        assert mass == pytest.approx(2.0, abs=1e-8)
