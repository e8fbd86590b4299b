import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglab.errors import (EvaluationFailure, NonPositiveBase, PoleArgument,
                           SlowDecay, ToleranceNotMet)
from maglab.kernels import (contour_residue, gamma, integrate_decaying,
                            integrate_finite, log_gamma, principal_pow,
                            recip_gamma)

# frozen from mpmath at 30 digits
LOGGAMMA = [
    (0.5, 0.57236494292470008707),
    (3 + 4j, -1.7566267846037841105 + 4.7426644380346579282j),
    (-2.5, -0.056243716497674050673 - 9.4247779607693797154j),
    (10 + 0.1j, 12.801301658068891718 + 0.22517710048500950365j),
    (-3.5 + 2j, -6.4200913945756578534 - 9.7119076581964872305j),
]
RGAMMA = [
    (-3.5 + 2j, -588.92007591760767871 - 173.90194396123683527j),
    (0.1, 0.10511370061117778683),
    (-4.5, -16.661223639144677849),
]


@pytest.mark.parametrize("z,expected", LOGGAMMA)
def test_log_gamma_frozen(z, expected):
    assert abs(log_gamma(z) - expected) <= 1e-13 * max(1, abs(expected))


@pytest.mark.parametrize("z,expected", RGAMMA)
def test_recip_gamma_frozen(z, expected):
    assert abs(recip_gamma(z) - expected) <= 1e-13 * abs(expected)


def test_gamma_half_integer():
    assert abs(gamma(2.5) - 0.75 * math.sqrt(math.pi)) < 1e-14


@pytest.mark.parametrize("z", [0, -1, -7, -1 + 1e-15])
def test_log_gamma_poles(z):
    with pytest.raises(PoleArgument):
        log_gamma(z)


@pytest.mark.parametrize("z", [0, -1, -2, -30])
def test_recip_gamma_zero_at_poles(z):
    assert recip_gamma(z) == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 20), st.floats(-20, 20))
def test_log_gamma_recurrence(x, y):
    z = complex(x, y)
    diff = log_gamma(z + 1) - log_gamma(z) - cmath.log(z)
    k = diff.imag / (2 * math.pi)
    assert abs(diff.real) < 1e-11
    assert abs(k - round(k)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.floats(-8, 8), st.floats(-6, 6))
def test_recip_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    ref = complex(mp.rgamma(mp.mpc(x, y)))
    assert abs(recip_gamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_principal_pow():
    assert abs(principal_pow(2.0, 0.5) - math.sqrt(2)) < 1e-15
    assert abs(principal_pow(math.e, 1j) - cmath.exp(1j)) < 1e-15
    with pytest.raises(NonPositiveBase):
        principal_pow(-1.0, 0.5)
    with pytest.raises(NonPositiveBase):
        principal_pow(0.0, 2)


def test_integrate_polynomial():
    r = integrate_finite(lambda t: t * t / 2, 0, 2)
    assert abs(r.value - 4 / 3) < 1e-14
    assert r.evaluations > 0 and r.error_estimate >= 0


def test_integrate_reversed_interval():
    r = integrate_finite(np.cos, 1.0, 0.0)
    assert abs(r.value + math.sin(1.0)) < 1e-14


@pytest.mark.parametrize("e", [-0.5, -0.9, -0.95, 0.5, 1.3])
def test_integrate_left_singularity(e):
    r = integrate_finite(lambda t: t ** e, 0.0, 1.0, left_exponent=e, atol=1e-12, rtol=1e-12)
    assert abs(r.value - 1 / (e + 1)) <= 1e-10 / (e + 1)


def test_integrate_both_endpoints():
    # int_0^2 (4 - t^2)^(-1/2) dt = pi/2
    r = integrate_finite(lambda t: (4 - t * t) ** -0.5, 0.0, 2.0, right_exponent=-0.5)
    assert abs(r.value - math.pi / 2) < 1e-10


def test_integrate_complex_integrand():
    r = integrate_finite(lambda t: np.exp(1j * t), 0.0, math.pi)
    assert abs(r.value - 2j) < 1e-12


def test_integrate_tolerance_not_met():
    with pytest.raises(ToleranceNotMet) as info:
        integrate_finite(lambda t: np.sin(1 / t), 1e-6, 1.0, atol=1e-15, rtol=1e-15, limit=20)
    assert info.value.estimate is not None


def test_integrate_nonfinite():
    with pytest.raises(EvaluationFailure):
        integrate_finite(lambda t: np.where(t > 0.3, np.nan, t), 0.0, 1.0)


def test_decaying_power():
    r = integrate_decaying(lambda R: R ** -3.0, 1.0, 3.0, kind="power")
    assert abs(r.value - 0.5) < 1e-10


def test_decaying_exponential():
    r = integrate_decaying(lambda R: np.exp(-2 * R), 0.0, 2.0, kind="exp")
    assert abs(r.value - 0.5) < 1e-10


def test_slow_decay():
    with pytest.raises(SlowDecay):
        integrate_decaying(lambda R: 1 / R, 1.0, 1.0, kind="power")


def test_contour_residue_gamma():
    res = contour_residue(gamma, -1.0, radius=0.2)
    assert abs(res - (-1.0)) < 1e-12
    res = contour_residue(gamma, -2.0, radius=0.2)
    assert abs(res - 0.5) < 1e-12


def test_contour_residue_holomorphic():
    assert abs(contour_residue(cmath.exp, 0.3 + 1j)) < 1e-14


def test_contour_residue_failure():
    def bad(z):
        raise ZeroDivisionError
    with pytest.raises(EvaluationFailure):
        contour_residue(bad, 0.0)
