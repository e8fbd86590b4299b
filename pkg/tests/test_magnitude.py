import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglab.errors import NotNormalized, NotPositiveDefinite, SingularKernel
from maglab.magnitude import (finite_mag_nu, finite_magnitude, finite_spectrum,
                              finite_weight, little_m, little_m_many, mag_nu_radial,
                              magnitude_radial)
from maglab.spaces import (FiniteMetricSpace, finite_from_points, padic_profile,
                           sphere_profile, two_point_homogeneous_profile)

# frozen from mpmath quadrature at 30 digits
CHORDAL_M = {
    1: {1: 0.34215154434462160567, 10: 0.031912486554480390343},
    3: {1: 0.27938231715807744797, 10: 0.0012537528971251883502},
    4: {1: 0.27026323694271340569, 10: 0.000427500176275010675},
}
PADIC_M = {
    2: {1: 0.54804279152957048927, 10: 0.072134058463599570531, 100: 0.0072134897741249514749},
    3: {1: 0.50679214187759768709, 10: 0.060656499722782457186, 100: 0.0060611539141748767646},
}


@pytest.mark.parametrize("n", sorted(CHORDAL_M))
def test_chordal_m_frozen(n):
    prof = sphere_profile(n)
    for R, ref in CHORDAL_M[n].items():
        assert abs(little_m(prof, R) - ref) <= 1e-11 * ref


@pytest.mark.parametrize("p", sorted(PADIC_M))
def test_padic_m_frozen(p):
    prof = padic_profile(p)
    for R, ref in PADIC_M[p].items():
        assert abs(little_m(prof, R) - ref) <= 1e-12 * ref


@pytest.mark.parametrize("R", [0.01, 0.3, 1, 7, 50, 1e3, 1e5])
def test_chordal_s2_closed_form(R):
    ref = -math.expm1(-2 * R) / (2 * R * R) - math.exp(-2 * R) / R
    got = little_m(sphere_profile(2), R)
    assert abs(got - ref) <= 1e-10 * ref


def test_little_m_many_matches_scalar():
    prof = padic_profile(3)
    Rs = np.array([0.5, 2.0, 40.0])
    assert np.allclose(little_m_many(prof, Rs), [little_m(prof, R) for R in Rs], rtol=1e-14)


def test_little_m_rejects_nonpositive():
    with pytest.raises(ValueError):
        little_m(sphere_profile(2), 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 200.0))
def test_padic_functional_equation(R):
    p = 2
    prof = padic_profile(p)
    lhs = little_m(prof, p * R)
    rhs = little_m(prof, R) / p + (p - 1) * math.exp(-p * R) / p
    assert abs(lhs - rhs) <= 1e-13 * lhs


def test_unnormalized_mag_nu():
    prof = sphere_profile(2, "geodesic", normalized=False)
    val = mag_nu_radial(prof, 1.0, -1)
    assert abs(val.real - 3.8343) < 5e-4 and val.imag == 0


def test_radial_mag_nu_complex_nu():
    prof = sphere_profile(2)
    lam = little_m(prof, 2.0)
    val = mag_nu_radial(prof, 2.0, 0.5 + 1j)
    assert abs(val - lam ** (0.5 + 1j)) < 1e-14


def test_magnitude_radial_needs_probability():
    with pytest.raises(NotNormalized):
        magnitude_radial(sphere_profile(2, normalized=False), 1.0)
    assert abs(magnitude_radial(two_point_homogeneous_profile(), 1.0) - math.e) < 1e-12


def test_finite_weight_solves_system():
    sp = finite_from_points(np.random.default_rng(1).normal(size=(7, 3)))
    w = finite_weight(sp, 0.8)
    E = np.exp(-0.8 * sp.dist)
    assert np.allclose(E @ w.weights, 1, atol=1e-12)
    assert w.residual < 1e-12 and w.condition >= 1


def test_finite_weight_with_measure():
    sp = FiniteMetricSpace((0, 1, 2), [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [1, 2, 0.5])
    w = finite_weight(sp, 1.3)
    E = np.exp(-1.3 * sp.dist)
    assert np.allclose(E @ (w.weights * sp.measure), 1, atol=1e-12)


def test_singular_kernel():
    sp = FiniteMetricSpace((0, 1), [[0, 1e-17], [1e-17, 0]], None)
    with pytest.raises(SingularKernel) as info:
        finite_weight(sp, 1.0)
    assert info.value.condition is None or info.value.condition > 1e15


def test_finite_mag_nu_special_values():
    sp = finite_from_points(np.random.default_rng(2).normal(size=(5, 2)))
    R = 1.5
    E = np.exp(-R * sp.dist)
    ones = np.ones(5)
    assert abs(finite_mag_nu(sp, R, 1) - ones @ E @ ones) < 1e-12
    assert abs(finite_mag_nu(sp, R, 0) - 5) < 1e-12
    assert abs(finite_mag_nu(sp, R, -1) - finite_magnitude(sp, R)) < 1e-10


def test_not_positive_definite():
    # K_{3,3} with d = 1 across, 2 within: not positive definite at small R
    d = np.full((6, 6), 2.0)
    d[:3, 3:] = d[3:, :3] = 1.0
    np.fill_diagonal(d, 0.0)
    sp = FiniteMetricSpace(tuple(range(6)), d, None)
    lam = finite_spectrum(sp, 0.1).eigenvalues
    if lam.min() > 0:
        pytest.skip("kernel happens to be positive definite")
    with pytest.raises(NotPositiveDefinite) as info:
        finite_mag_nu(sp, 0.1, 0.5)
    assert info.value.min_eigenvalue < 0
    finite_mag_nu(sp, 0.1, 2)


def test_spectrum_sorted():
    sp = finite_from_points(np.arange(6.0)[:, None])
    lam = finite_spectrum(sp, 1.0).eigenvalues
    assert np.all(np.diff(lam) <= 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.2, 3.0), st.floats(-2, 2), st.floats(-2, 2))
def test_matrix_power_semigroup(seed, R, a, b):
    sp = finite_from_points(np.random.default_rng(seed).normal(size=(6, 2)))
    spec = finite_spectrum(sp, R)
    lhs = spec.matrix_power(a) @ spec.matrix_power(b)
    rhs = spec.matrix_power(a + b)
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)
