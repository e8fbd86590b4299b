"""Magnitude and the complex-power family M_X(R, nu).

Finite spaces: weight vectors, the symmetrised kernel
``S = D^(1/2) E D^(1/2)`` with ``E = exp(-R d)``, ``D = diag(measure)``,
and ``<Z^nu 1, 1> = v^T S^nu v`` with ``v = D^(1/2) 1``.

Radial (homogeneous) spaces: ``Z(R) 1 = lambda(R) 1`` where ``lambda`` is
the basepoint integral returned by :func:`little_m`, so
``M(R, nu) = total_mass * lambda(R)**nu``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (NotNormalized, NotPositiveDefinite, SingularKernel,
                     ToleranceNotMet)
from .kernels import integrate_finite, principal_pow
from .spaces import FiniteMetricSpace, RadialProfile

logger = logging.getLogger(__name__)

COND_WARN = 1e12
COND_FAIL = 1e15
PD_RATIO = 1e-12


def _laplace_with_error(profile: RadialProfile, R: float, tol: float):
    """sum_k m_k exp(-R t_k) + int exp(-R t) rho(t) dt, with an error bound."""
    loc, mass = profile.atom_arrays()
    value = float(np.dot(mass, np.exp(-R * loc))) if loc.size else 0.0
    err = 0.0
    if profile.tail_mass > 0:
        v, e = _tail(profile, R, tol)
        value += v
        err += e
    if profile.density is not None:
        rho = profile.density
        T = profile.support

        def f(t):
            return np.exp(-R * t) * rho(t)
        # the mass sits within a few multiples of 1/R of the origin; cut
        # there so the quadrature cannot step over it
        cut = 40.0 / R
        if cut < T:
            head = integrate_finite(f, 0.0, cut, left_exponent=profile.left_exponent,
                                    atol=0.0, rtol=tol)
            tail = integrate_finite(f, cut, T, right_exponent=profile.right_exponent,
                                    atol=abs(head.value) * tol, rtol=tol)
            value += head.value + tail.value
            err += head.error_estimate + tail.error_estimate
        else:
            res = integrate_finite(f, 0.0, T, left_exponent=profile.left_exponent,
                                   right_exponent=profile.right_exponent,
                                   atol=0.0, rtol=tol)
            value += res.value
            err += res.error_estimate
    return value, err


def _tail(profile: RadialProfile, R: float, tol: float):
    """Contribution of the mass inside tail_radius, with an error bound."""
    r, q = profile.tail_radius, profile.tail_mass
    if profile.self_similar and R * r > 1e-6:
        # the tail is the whole space scaled by r, carrying mass q
        v, e = _laplace_with_error(profile, R * r, tol)
        scale = q / profile.total_mass
        return scale * v, scale * e
    lo = q * math.exp(-R * r)
    return 0.5 * (lo + q), 0.5 * (q - lo)


def little_m(profile: RadialProfile, R: float, tol: float = 1e-13) -> float:
    """Basepoint integral lambda(R) = int exp(-R d(eH, y)) dmu(y).

    For a normalized profile this is m_X(R) = <Z_X(R) 1, 1>. ``tol`` is a
    relative quadrature tolerance.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    value, err = _laplace_with_error(profile, float(R), tol)
    if err > max(1e-11, 10 * tol) * max(abs(value), 1e-300):
        raise ToleranceNotMet(f"little_m at R={R}: error {err:.2e}", estimate=value, error=err)
    return value


def little_m_many(profile: RadialProfile, Rs, tol: float = 1e-13) -> np.ndarray:
    """Vectorised :func:`little_m` (atoms-only profiles avoid quadrature)."""
    Rs = np.asarray(Rs, dtype=float)
    if profile.density is None:
        loc, mass = profile.atom_arrays()
        out = np.exp(-np.multiply.outer(Rs, loc)) @ mass if loc.size else np.zeros_like(Rs)
        if profile.tail_mass > 0:
            r, q = profile.tail_radius, profile.tail_mass
            if profile.self_similar and np.any(Rs * r > 1e-6):
                big = Rs * r > 1e-6
                tail = 0.5 * q * (1.0 + np.exp(-Rs * r))
                tail[big] = q / profile.total_mass * little_m_many(profile, Rs[big] * r, tol)
                return out + tail
            out = out + 0.5 * q * (1.0 + np.exp(-Rs * r))
        return out
    return np.array([little_m(profile, R, tol) for R in Rs.ravel()]).reshape(Rs.shape)


def mag_nu_radial(profile: RadialProfile, R: float, nu) -> complex:
    """M_X(R, nu) = total_mass * lambda(R)**nu (principal real-base power)."""
    lam = little_m(profile, R)
    return profile.total_mass * principal_pow(lam, nu)


def magnitude_radial(profile: RadialProfile, R: float) -> float:
    """Speyer's homogeneous magnitude 1/m_X(R); needs a probability profile."""
    if not profile.normalized:
        raise NotNormalized(f"total mass {profile.total_mass} != 1")
    return 1.0 / little_m(profile, R)


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    R: float
    residual: float
    condition: float


@dataclass(frozen=True)
class KernelSpectrum:
    eigenvalues: np.ndarray   # descending
    basis: np.ndarray         # columns are orthonormal eigenvectors
    R: float
    measure: np.ndarray

    def matrix_power(self, nu) -> np.ndarray:
        """S**nu from the eigendecomposition (principal branch)."""
        lam = self.eigenvalues
        powers = _eigen_powers(lam, nu)
        return (self.basis * powers) @ self.basis.T


def _kernel(space: FiniteMetricSpace, R: float) -> np.ndarray:
    return np.exp(-R * space.dist)


def finite_weight(space: FiniteMetricSpace, R: float, refine: int = 2) -> WeightVector:
    """Solve sum_y exp(-R d(x,y)) w(y) mu(y) = 1 for all x."""
    E = _kernel(space, R)
    cond = float(np.linalg.cond(E))
    if not np.isfinite(cond) or cond > COND_FAIL:
        raise SingularKernel(f"kernel is numerically singular (cond={cond:.3e})", condition=cond)
    if cond > COND_WARN:
        logger.warning("kernel condition number %.3e at R=%g", cond, R)
    ones = np.ones(space.size)
    try:
        fac = linalg.cho_factor(E)
        solve = lambda rhs: linalg.cho_solve(fac, rhs)  # noqa: E731
    except linalg.LinAlgError:
        # not positive definite: general LU factorisation
        lu = linalg.lu_factor(E)
        solve = lambda rhs: linalg.lu_solve(lu, rhs)  # noqa: E731
    u = solve(ones)
    for _ in range(refine):
        u = u + solve(ones - E @ u)
    residual = float(np.max(np.abs(E @ u - ones)))
    return WeightVector(u / space.measure, float(R), residual, cond)


def finite_magnitude(space: FiniteMetricSpace, R: float) -> float:
    """Magnitude sum_x w(x) mu(x); the plain weight sum for counting measure."""
    w = finite_weight(space, R)
    return float(np.dot(w.weights, space.measure))


def finite_spectrum(space: FiniteMetricSpace, R: float) -> KernelSpectrum:
    if not R > 0:
        raise ValueError("R must be positive")
    sq = np.sqrt(space.measure)
    S = sq[:, None] * _kernel(space, R) * sq[None, :]
    lam, Q = np.linalg.eigh(S)
    order = np.argsort(lam)[::-1]
    return KernelSpectrum(lam[order], Q[:, order], float(R), space.measure)


def _integer_nu(nu):
    c = complex(nu)
    if c.imag == 0 and float(c.real).is_integer():
        return int(c.real)
    return None


def _eigen_powers(lam: np.ndarray, nu) -> np.ndarray:
    k = _integer_nu(nu)
    top = float(np.max(np.abs(lam))) if lam.size else 0.0
    if k is not None:
        if k < 0 and np.any(np.abs(lam) <= PD_RATIO * top):
            raise SingularKernel("negative power of a kernel with a zero eigenvalue")
        if k == 0:
            # identity on the range of S
            return np.where(np.abs(lam) > PD_RATIO * top, 1.0, 0.0)
        return lam.astype(float) ** k
    if np.any(lam <= PD_RATIO * top):
        lmin = float(np.min(lam))
        raise NotPositiveDefinite(
            f"non-integer power needs a positive-definite kernel (min eigenvalue {lmin:.3e})",
            min_eigenvalue=lmin)
    out = np.array([principal_pow(x, nu) for x in lam])
    return out.real if complex(nu).imag == 0 else out


def finite_mag_nu(space: FiniteMetricSpace, R: float, nu) -> complex:
    """<Z(R)^nu 1, 1> for a finite space, from the spectrum of S."""
    spec = finite_spectrum(space, R)
    v = np.sqrt(space.measure)
    coef = spec.basis.T @ v
    return complex(np.sum(_eigen_powers(spec.eigenvalues, nu) * coef * coef))
