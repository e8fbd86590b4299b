import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglab.beta import (MellinContinuation, beta_direct, beta_evaluator, beta_finite,
                         beta_padic_closed, beta_sphere_closed, beta_via_mellin,
                         closed_form_evaluator, default_expansion, mellin_transform,
                         padic_pole, padic_residue, scan_poles)
from maglab.errors import (BoundaryPole, InsufficientDepth, NotPrime, OutsideStrip,
                           PoleArgument)
from maglab.formal import AsymptoticExpansion
from maglab.kernels import gamma as cgamma
from maglab.spaces import (FiniteMetricSpace, padic_profile, sphere_profile,
                           two_point_homogeneous_profile)

# frozen from mpmath quadrature at 30 digits (chordal, normalized)
CHORDAL_B = {
    1: {0.5: 1.078705202376758707,
        1 + 1j: 1.0785034287470302945 + 0.47442957663478499699j},
    3: {0.5: 1.1506188825352092942,
        1 + 1j: 1.2238456180973126418 + 0.45915255081102152293j},
}


@pytest.mark.parametrize("n", sorted(CHORDAL_B))
def test_beta_direct_frozen(n):
    prof = sphere_profile(n)
    for z, ref in CHORDAL_B[n].items():
        assert abs(beta_direct(prof, z) - ref) < 1e-10


def test_beta_direct_geodesic_s3():
    assert abs(beta_direct(sphere_profile(3, "geodesic"), 1) - math.pi / 2) < 1e-10


def test_beta_direct_chordal_s2_closed():
    prof = sphere_profile(2)
    for z in (0.3, -1.5, 2 + 3j):
        ref = cmath.exp((z + 1) * math.log(2)) / (z + 2)
        assert abs(beta_direct(prof, z) - ref) < 1e-9 * abs(ref)


def test_beta_direct_outside_strip():
    with pytest.raises(OutsideStrip):
        beta_direct(sphere_profile(2), -2.5)
    with pytest.raises(OutsideStrip):
        beta_direct(padic_profile(2), -1.0)


def test_beta_direct_padic():
    for z in (1, 0.5, 0.25 + 3j):
        assert abs(beta_direct(padic_profile(3), z) - beta_padic_closed(3, z)) < 1e-13


def test_beta_finite():
    sp = FiniteMetricSpace((0, 1, 2), [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [1, 2, 1])
    # pairs: (0,1),(1,2) mass 2 each way; (0,2) mass 1 each way
    z = 0.7 + 0.2j
    ref = 4 * 2 + 2 * cmath.exp(z * math.log(2))
    assert abs(beta_finite(sp, z) - ref) < 1e-13


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sphere_closed_proportional(n):
    # the closed form differs from the direct beta by a z-independent factor
    prof = sphere_profile(n)
    ratios = [beta_direct(prof, z) / beta_sphere_closed(n, z) for z in (0.5, 1.5, 2 + 1j)]
    assert np.allclose(ratios, ratios[0], rtol=1e-9)


def test_sphere_closed_poles():
    with pytest.raises(PoleArgument):
        beta_sphere_closed(2, -2)
    with pytest.raises(PoleArgument):
        beta_sphere_closed(3, -5)


def test_padic_closed():
    assert abs(beta_padic_closed(2, 1) - 1 / 1.5) < 1e-15
    with pytest.raises(PoleArgument):
        beta_padic_closed(3, padic_pole(3, 2))
    with pytest.raises(NotPrime):
        beta_padic_closed(4, 1)


@pytest.mark.parametrize("s", [0.5, 2.5, -1.5, 3 + 2j, -0.5 + 1j])
def test_mellin_two_point_is_gamma(s):
    f = mellin_transform(two_point_homogeneous_profile(), s)
    assert abs(f - cgamma(s)) <= 1e-10 * abs(cgamma(s))


def test_mellin_strip_errors():
    cont = MellinContinuation(sphere_profile(2), M=2)
    assert cont.strip == (-2.0, 2.0)
    with pytest.raises(InsufficientDepth):
        cont(-2.5)
    with pytest.raises(InsufficientDepth):
        cont(2.5)
    with pytest.raises(InsufficientDepth):
        MellinContinuation(sphere_profile(2), M=2, N=1)
    exp = AsymptoticExpansion(-2, (0.5,))
    with pytest.raises(InsufficientDepth):
        MellinContinuation(sphere_profile(2), M=2, N=3, m_expansion=exp)


def test_removable_point_needs_depth():
    with pytest.raises(InsufficientDepth):
        beta_via_mellin(sphere_profile(2), 2, M=3)
    val = beta_via_mellin(sphere_profile(2), 2, M=4)
    assert abs(val - 2) < 1e-9


@settings(max_examples=12, deadline=None)
@given(st.floats(-1.7, 1.7), st.floats(-3, 3))
def test_strip_consistency(x, y):
    # inside the convergence half-plane the continuation is the integral
    prof = sphere_profile(2)
    z = complex(x, y)
    assert abs(beta_via_mellin(prof, z) - beta_direct(prof, z)) < 1e-8 * (1 + abs(beta_direct(prof, z)))


@settings(max_examples=12, deadline=None)
@given(st.floats(-1.5, 0.4), st.floats(-2, 2), st.integers(3, 6))
def test_depth_independence(x, y, M):
    prof = sphere_profile(3)
    exp = default_expansion(prof, 6)
    z = complex(x, y) - 1.7
    a = beta_via_mellin(prof, z, M=2, N=4, m_expansion=exp)
    b = beta_via_mellin(prof, z, M=M, N=6, m_expansion=exp)
    assert abs(a - b) <= 1e-8 * (1 + abs(a))


def test_continued_chordal_s2():
    prof = sphere_profile(2)
    exp = default_expansion(prof, 4)
    for z in (-2.5, -3.3 + 1j, -4.6):
        ref = cmath.exp((z + 1) * math.log(2)) / (z + 2)
        got = beta_via_mellin(prof, z, M=2, N=4, m_expansion=exp)
        assert abs(got - ref) < 1e-8 * abs(ref)


@pytest.mark.parametrize("p", [2, 3])
def test_padic_mellin(p):
    prof = padic_profile(p)
    for z in (1, 0.5, 0.25 + 3j, -0.5 + 0.2j):
        assert abs(beta_via_mellin(prof, z) - beta_padic_closed(p, z)) < 1e-9


def test_evaluator_strips():
    ev = beta_evaluator(sphere_profile(2), M=4, m_expansion=default_expansion(sphere_profile(2), 3))
    assert ev.strip == (-6.0, 4.0)
    assert ev.params["method"] == "mellin"
    ev = beta_evaluator(padic_profile(2))
    assert ev.params["method"] == "self-similar"
    assert abs(ev(-3 + 0.5j) - beta_padic_closed(2, -3 + 0.5j)) < 1e-13


def test_closed_form_evaluator():
    ev = closed_form_evaluator("sphere:n=3")
    assert abs(ev(1.0) - beta_sphere_closed(3, 1.0)) == 0
    with pytest.raises(ValueError):
        closed_form_evaluator("sphere:n=2:metric=geodesic")


def test_scan_padic_closed():
    p = 3
    rep = scan_poles(closed_form_evaluator(padic_profile(p)), (-1.6, -0.3, -12.0, 12.0))
    want = [padic_pole(p, k) for k in range(-2, 3)]
    assert len(rep.entries) == len(want)
    for (loc, res), w in zip(sorted(rep.entries, key=lambda e: e[0].imag), want):
        assert abs(loc - w) < 1e-8
        assert abs(res - padic_residue(p)) < 1e-8


def test_scan_sphere_mellin():
    prof = sphere_profile(2)
    ev = beta_evaluator(prof, M=2, m_expansion=default_expansion(prof, 4))
    rep = scan_poles(ev, (-4.7, -0.3, -0.8, 0.8))
    assert len(rep.entries) == 1
    loc, res = rep.entries[0]
    assert abs(loc + 2) < 1e-8 and abs(res - 0.5) < 1e-8


def test_scan_holomorphic_is_empty():
    rep = scan_poles(np.exp, (-1, 1, -1, 1))
    assert rep.entries == []


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_scan_boundary_pole():
    with pytest.raises(BoundaryPole):
        scan_poles(lambda z: 1 / (z - 0.98), (-1, 1, -1, 1), spacing=0.25)


def test_scan_bad_rect():
    with pytest.raises(ValueError):
        scan_poles(np.exp, (1, -1, 0, 1))
