"""Scalar numerical primitives.

Complex log-Gamma and reciprocal Gamma, principal real-base powers,
adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals,
and residues by trapezoidal contour sums.

Integrands passed to the quadrature routines must accept a 1-D numpy array
and return an array of the same shape (real or complex).
"""
from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import (EvaluationFailure, NonPositiveBase, PoleArgument,
                     SlowDecay, ToleranceNotMet)

POLE_ATOL = 1e-14

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082,
                0.279705391489276667901467771423780,
                0.381830050505118944950369775488975,
                0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    error_estimate: float
    evaluations: int


def _is_nonpositive_integer(z, atol=POLE_ATOL):
    z = complex(z)
    if abs(z.imag) > atol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= atol


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z)."""
    if _is_nonpositive_integer(z):
        raise PoleArgument(f"Gamma has a pole at z={z}")
    return complex(special.loggamma(complex(z)))


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def recip_gamma(z) -> complex:
    """1/Gamma(z); entire, exactly zero at the non-positive integers."""
    if _is_nonpositive_integer(z):
        return 0j
    return complex(special.rgamma(complex(z)))


def principal_pow(a: float, nu) -> complex:
    """a**nu for a > 0, computed as exp(nu * log a) with the real logarithm."""
    if not a > 0:
        raise NonPositiveBase(f"base must be positive, got {a}")
    return cmath.exp(complex(nu) * math.log(a))


def _call(f, x):
    y = f(x)
    y = np.asarray(y)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return y


def _gk15(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = _call(f, c + h * _NODES)
    if not np.all(np.isfinite(fx)):
        raise EvaluationFailure(f"non-finite integrand value on [{a}, {b}]")
    k = h * np.dot(_KW, fx)
    g = h * np.dot(_GW, fx)
    err = abs(k - g)
    # roundoff floor
    err = max(err, 50 * np.finfo(float).eps * h * np.dot(_KW, np.abs(fx)))
    return k, err


def _adaptive(f, a, b, atol, rtol, limit):
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total, total_err = val, err
    nev = 15
    while total_err > max(atol, rtol * abs(total)):
        if len(heap) >= limit:
            raise ToleranceNotMet(
                f"quadrature on [{a}, {b}] stalled at error {total_err:.3e}",
                estimate=total, error=total_err)
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        nev += 30
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_e
    total = _scalar(sum(item[3] for item in heap))
    return QuadratureResult(total, float(total_err), nev)


def _scalar(v):
    v = complex(v)
    return v if v.imag != 0 else v.real


def _substitution_power(exponent):
    """Power k for t = a + u**k that makes u**(k*(e+1)-1) benign."""
    if exponent is None:
        return 1
    e = float(exponent)
    if e <= -1:
        raise ValueError(f"endpoint exponent {e} is not integrable")
    if e >= 0 and e.is_integer():
        return 1
    if (2 * e).is_integer():
        return 2
    return int(min(40, max(2, math.ceil(2.0 / (e + 1.0)))))


def integrate_finite(f: Callable, a: float, b: float, tol: float = 1e-10, *,
                     left_exponent=0.0, right_exponent=0.0,
                     atol=None, rtol=None, limit=2000) -> QuadratureResult:
    """Adaptive G7-K15 quadrature of ``f`` over ``[a, b]``.

    The default acceptance test is mixed, ``err <= tol * (1 + |value|)``;
    pass ``atol``/``rtol`` to override either part. Declared endpoint
    exponents (``f ~ (t-a)**left_exponent`` near ``a``, similarly at ``b``)
    trigger the substitution ``t = a + u**k`` on that half of the interval.
    """
    atol = tol if atol is None else atol
    rtol = tol if rtol is None else rtol
    if b < a:
        r = integrate_finite(f, b, a, tol, left_exponent=right_exponent,
                             right_exponent=left_exponent, atol=atol,
                             rtol=rtol, limit=limit)
        return QuadratureResult(-r.value, r.error_estimate, r.evaluations)
    kl = _substitution_power(left_exponent)
    kr = _substitution_power(right_exponent)
    if kl == 1 and kr == 1:
        return _adaptive(f, a, b, atol, rtol, limit)

    mid = 0.5 * (a + b)
    pieces = []
    if kl == 1:
        pieces.append((f, a, mid))
    else:
        def fl(u, k=kl):
            return f(a + u ** k) * (k * u ** (k - 1))
        pieces.append((fl, 0.0, (mid - a) ** (1.0 / kl)))
    if kr == 1:
        pieces.append((f, mid, b))
    else:
        def fr(u, k=kr):
            return f(b - u ** k) * (k * u ** (k - 1))
        pieces.append((fr, 0.0, (b - mid) ** (1.0 / kr)))

    # split the absolute budget between the two halves; if the halves
    # cancel, tighten the relative part once so the sum still meets it
    for attempt in range(2):
        results = [_adaptive(g, lo, hi, 0.5 * atol, rtol, limit)
                   for g, lo, hi in pieces]
        value = _scalar(sum(r.value for r in results))
        error = sum(r.error_estimate for r in results)
        nev = sum(r.evaluations for r in results)
        if error <= max(atol, rtol * abs(value)) or attempt == 1:
            break
        scale = sum(abs(r.value) for r in results)
        rtol = rtol * max(abs(value) / scale, 1e-3) if scale > 0 else rtol
    if error > max(atol, rtol * abs(value)) * 1.001:
        raise ToleranceNotMet("quadrature halves cancel beyond tolerance",
                              estimate=value, error=error)
    return QuadratureResult(value, error, nev)


def integrate_decaying(f: Callable, a: float, decay_rate: float,
                       tol: float = 1e-10, *, kind: str = "exp",
                       left_exponent=0.0, atol=None, rtol=None) -> QuadratureResult:
    """Integrate ``f`` over ``[a, inf)``.

    ``kind="exp"``: ``|f(R)| <= C exp(-decay_rate R)``; the interval is
    truncated where the tail bound ``|f(T)|/decay_rate`` drops below the
    tolerance. ``kind="power"``: ``|f(R)| <= C R**-decay_rate`` with
    ``decay_rate > 1``; the far part is mapped onto ``(0, 1]`` by ``R = c/v``.
    """
    atol = tol if atol is None else atol
    rtol = tol if rtol is None else rtol
    if kind == "power":
        q = float(decay_rate)
        if q <= 1:
            raise SlowDecay(f"polynomial decay exponent {q} <= 1 is not integrable")
        c = max(a + 1.0, 1.0)
        head = integrate_finite(f, a, c, left_exponent=left_exponent,
                                atol=0.5 * atol, rtol=rtol)

        def g(v):
            return f(c / v) * (c / v ** 2)
        far = integrate_finite(g, 0.0, 1.0, left_exponent=q - 2.0,
                               atol=0.5 * atol, rtol=rtol)
        return QuadratureResult(head.value + far.value,
                                head.error_estimate + far.error_estimate,
                                head.evaluations + far.evaluations)
    if kind != "exp":
        raise ValueError(f"unknown decay kind {kind!r}")
    rate = float(decay_rate)
    if rate <= 0:
        raise SlowDecay("exponential decay rate must be positive")
    length = 10.0 / rate
    probe = np.linspace(0.0, 1.0, 9)
    for _ in range(60):
        t = a + length * (1.0 + 0.25 * probe)
        tail = np.max(np.abs(_call(f, t))) / rate
        if tail <= 0.01 * atol:
            break
        length *= 2.0
    else:
        raise ToleranceNotMet("could not find a truncation point", estimate=None)
    r = integrate_finite(f, a, a + length, left_exponent=left_exponent,
                         atol=atol, rtol=rtol)
    return QuadratureResult(r.value, r.error_estimate + float(tail), r.evaluations)


def contour_residue(f: Callable, z0, radius: float = 0.1, nodes: int = 64) -> complex:
    """(1/2 pi i) times the integral of ``f`` around the circle |z - z0| = radius."""
    z0 = complex(z0)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    total = 0j
    for wk in w:
        try:
            v = complex(f(z0 + wk))
        except Exception as exc:  # any evaluator failure on the contour
            raise EvaluationFailure(f"evaluation failed at {z0 + wk}: {exc}") from exc
        if not cmath.isfinite(v):
            raise EvaluationFailure(f"non-finite value at {z0 + wk}")
        total += v * wk
    return total / nodes
