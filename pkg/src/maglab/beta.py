"""The Brylinski beta function B_X(z) = int d(eH, y)^z dmu(y).

Direct evaluation inside the convergence half-plane, closed forms for
spheres and p-adic integers, analytic continuation through the Mellin
transform of m_X, and pole scanning by the argument principle.

Mellin convention: ``f(s) = int_0^inf m(R) R^(s-1) dR = Gamma(s) B(-s)``.
The continuation computes ``f`` by subtracting the Taylor polynomial of
``m`` near 0 and its large-R expansion near infinity, then divides by
``Gamma(-z)`` to return ``B(z)``.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (BoundaryPole, EvaluationFailure, InsufficientDepth,
                     OutsideStrip, PoleArgument)
from .formal import AsymptoticExpansion, PoleReport, taylor_coeffs, watson_expansion
from .kernels import contour_residue, integrate_finite, log_gamma, recip_gamma
from .magnitude import little_m_many
from .spaces import FiniteMetricSpace, RadialProfile, is_prime

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# direct evaluation and closed forms

def _atom_sum(profile: RadialProfile, z: complex) -> complex:
    loc, mass = profile.atom_arrays()
    if not loc.size:
        return 0j
    return complex(np.sum(mass * np.exp(z * np.log(loc))))


def beta_direct(profile: RadialProfile, z, tol: float = 1e-10) -> complex:
    """B(z) as a convergent integral; requires Re z above the abscissa."""
    z = complex(z)
    if not z.real > profile.beta_abscissa:
        raise OutsideStrip(
            f"Re z = {z.real} is outside the convergence half-plane "
            f"Re z > {profile.beta_abscissa}; use beta_via_mellin")
    value = _atom_sum(profile, z)
    if profile.density is not None:
        rho = profile.density
        res = integrate_finite(lambda t: np.exp(z * np.log(t)) * rho(t), 0.0, profile.support,
                               left_exponent=profile.left_exponent + z.real,
                               right_exponent=profile.right_exponent,
                               atol=tol, rtol=tol)
        value += res.value
    if profile.tail_mass > 0:
        if profile.self_similar:
            # the tail is a copy of the whole space scaled by tail_radius
            q = profile.tail_mass / profile.total_mass
            value = value / (1.0 - q * cmath.exp(z * math.log(profile.tail_radius)))
        else:
            value += profile.tail_mass * cmath.exp(z * math.log(profile.tail_radius)) / 2
    return value


def beta_finite(space: FiniteMetricSpace, z) -> complex:
    """sum over pairs with d > 0 of d^z mu(x) mu(y) (holomorphic in z)."""
    z = complex(z)
    d = space.dist
    mask = d > 0
    mu = np.outer(space.measure, space.measure)
    return complex(np.sum(mu[mask] * np.exp(z * np.log(d[mask]))))


def _nonpositive_int(w, atol=1e-12):
    w = complex(w)
    r = round(w.real)
    return abs(w.imag) <= atol and r <= 0 and abs(w.real - r) <= atol


def beta_sphere_closed(n: int, z) -> complex:
    """2^(z+n) pi^(-1/2) Gamma((z+n)/2) Gamma((n+1)/2) / Gamma(z/2 + n)."""
    z = complex(z)
    a = (z + n) / 2
    pref = cmath.exp((z + n) * math.log(2.0)) / math.sqrt(math.pi) * math.gamma((n + 1) / 2)
    if n % 2 == 0:
        # Gamma(a)/Gamma(a + n/2) = 1 / (a (a+1) ... (a + n/2 - 1))
        prod = 1 + 0j
        for i in range(n // 2):
            prod *= a + i
        if abs(prod) == 0 or any(_nonpositive_int(a + i) for i in range(n // 2)):
            raise PoleArgument(f"z={z} is a pole of the sphere beta function")
        return pref / prod
    if _nonpositive_int(a):
        raise PoleArgument(f"z={z} is a pole of the sphere beta function")
    return pref * cmath.exp(log_gamma(a)) * recip_gamma(z / 2 + n)


def _padic_index(p: int, z: complex) -> float:
    return ((z + 1) * math.log(p) / (2j * math.pi))


def beta_padic_closed(p: int, z) -> complex:
    """(p - 1)/(p - p^(-z)) for the Haar probability measure on Z_p."""
    if not is_prime(p):
        from .errors import NotPrime
        raise NotPrime(f"{p} is not prime")
    z = complex(z)
    w = _padic_index(p, z)
    if abs(w - round(w.real)) < 1e-12:
        raise PoleArgument(f"z={z} is a pole of the p-adic beta function")
    return (p - 1) / (p - cmath.exp(-z * math.log(p)))


def padic_pole(p: int, k: int) -> complex:
    return complex(-1.0, 2 * math.pi * k / math.log(p))


def padic_residue(p: int) -> float:
    return (p - 1) / (p * math.log(p))


# ---------------------------------------------------------------------------
# Mellin continuation

_GL_ORDER = 20
_PANEL = 0.25
_R0 = 0.25
_SERIES_EXTRA = 30
_MAX_FAR_PANELS = 400
_M_NOISE = 1e-13


def _decay(profile: RadialProfile):
    """('exp', None) if m decays exponentially, else ('power', exponent)."""
    if profile.decay_exponent is not None:
        return "power", float(profile.decay_exponent)
    loc, _ = profile.atom_arrays()
    if profile.density is None and profile.tail_mass == 0 and loc.size and loc.min() > 0:
        return "exp", None
    raise ValueError("profile does not declare its large-R decay")


class MellinContinuation:
    """Evaluator of f(s) = int_0^inf m(R) R^(s-1) dR on -M < Re s < N - gamma.

    The half-line is cut at 1 and at ``far_split``:

    * ``[0, 1]``: m minus its Taylor polynomial of degree < M; on ``[0, r0]``
      the remainder is integrated term by term (m is entire), on ``[r0, 1]``
      by Gauss-Legendre panels in ``v = -log R``;
    * ``[1, far_split]``: m itself, panels in ``u = log R``;
    * ``[far_split, inf)``: m minus the first N expansion terms, panels in u
      until the remainder is below tolerance or at the noise floor of m.

    Values of m at the quadrature nodes are cached, so repeated evaluations
    in s cost only exponentials.
    """

    def __init__(self, profile: RadialProfile, M: int = 2, N: int | None = None,
                 m_expansion: AsymptoticExpansion | None = None,
                 tol: float = 1e-12, far_split: float | None = None):
        if M < 0:
            raise ValueError("M must be >= 0")
        self.profile = profile
        self.M = int(M)
        self.expansion = m_expansion
        if m_expansion is not None:
            N = len(m_expansion.coeffs) if N is None else int(N)
            if N > len(m_expansion.coeffs):
                raise InsufficientDepth(
                    f"N={N} exceeds the {len(m_expansion.coeffs)} known expansion coefficients")
            self.gamma = float(complex(m_expansion.gamma).real)
            self.a = np.array([complex(c) for c in m_expansion.coeffs[:N]])
        else:
            N = 0 if N is None else int(N)
            if N > 0:
                raise InsufficientDepth("asymptotic depth N > 0 needs an m_expansion")
            self.gamma = 0.0
            self.a = np.zeros(0, dtype=complex)
        self.N = N
        self.tol = tol
        self.kind, self.decay = _decay(profile)
        if far_split is None:
            far_split = max(8.0, 1.5 * N)
        self.far_split = float(far_split)

        x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
        self._x, self._w = x, w
        J = self.M + _SERIES_EXTRA
        self.B = taylor_coeffs(profile, J)

        # near part, v in [0, log(1/r0)]
        vmax = math.log(1.0 / _R0)
        self._v, self._wv = self._panels(0.0, vmax)
        Rn = np.exp(-self._v)
        poly = sum(self.B[j] * Rn ** j for j in range(self.M)) if self.M else 0.0
        self._Dnear = self._m(Rn) - poly

        # middle part, u in [0, log far_split]
        self._umid, self._wmid = self._panels(0.0, math.log(self.far_split))
        self._mmid = self._m(np.exp(self._umid))

        # far panels are generated lazily
        self._far: list = []

    # -- helpers ------------------------------------------------------------
    def _panels(self, lo, hi):
        count = max(1, math.ceil((hi - lo) / _PANEL))
        edges = np.linspace(lo, hi, count + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * self._x[None, :]).ravel()
        weights = (half[:, None] * self._w[None, :]).ravel()
        return nodes, weights

    def _m(self, R):
        return little_m_many(self.profile, R)

    def _far_panel(self, k):
        while len(self._far) <= k:
            i = len(self._far)
            lo = math.log(self.far_split) + i * _PANEL
            u, w = self._panels(lo, lo + _PANEL)
            R = np.exp(u)
            m = self._m(R)
            A = sum(self.a[j] * R ** (self.gamma - j) for j in range(self.N)) if self.N else 0.0
            D = m - A
            self._far.append((u, w, D, float(np.max(np.abs(m))), float(np.max(np.abs(D)))))
        return self._far[k]

    @property
    def strip(self):
        """Open interval of Re s on which the split formula is valid."""
        if self.N:
            hi = self.N - self.gamma
        elif self.kind == "exp":
            hi = math.inf
        else:
            hi = -self.decay
        return (-float(self.M), hi)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, s) -> complex:
        s = complex(s)
        lo, hi = self.strip
        if not s.real > lo:
            raise InsufficientDepth(f"Re s = {s.real} needs Taylor depth M > {-s.real}")
        if not s.real < hi:
            raise InsufficientDepth(f"Re s = {s.real} needs a deeper large-R expansion")
        M, N = self.M, self.N
        total = 0j
        # Taylor poles and the exact series on [0, r0]
        for j in range(M):
            total += self.B[j] / (s + j)
        for j in range(M, len(self.B)):
            total += self.B[j] * cmath.exp((j + s) * math.log(_R0)) / (j + s)
        total += np.sum(self._wv * self._Dnear * np.exp(-s * self._v))
        total += np.sum(self._wmid * self._mmid * np.exp(s * self._umid))
        # expansion poles
        log_split = math.log(self.far_split)
        for j in range(N):
            e = s + self.gamma - j
            total -= self.a[j] * cmath.exp(e * log_split) / e
        # far part
        kappa = (hi - s.real) if math.isfinite(hi) else 1.0
        for k in range(_MAX_FAR_PANELS):
            u, w, D, mmax, dmax = self._far_panel(k)
            total += np.sum(w * D * np.exp(s * u))
            scale = math.exp(u[-1] * s.real)
            if dmax * scale / kappa < self.tol or dmax <= _M_NOISE * mmax:
                break
        else:
            raise EvaluationFailure(f"far integral at s={s} did not settle")
        return complex(total)


@dataclass(frozen=True)
class MeromorphicEvaluator:
    """Callable z -> B(z) with its strip of validity in Re z."""

    func: Callable
    strip: tuple = (-math.inf, math.inf)
    params: dict = field(default_factory=dict)
    name: str = ""

    def __call__(self, z) -> complex:
        return complex(self.func(complex(z)))


def _near_nonnegative_int(z: complex, atol=1e-9):
    k = round(z.real)
    if k >= 0 and abs(z - k) <= atol:
        return k
    return None


def _beta_from_f(f: Callable, z: complex) -> complex:
    """B(z) = f(-z)/Gamma(-z); mean value on a circle at removable points."""
    k = _near_nonnegative_int(z)
    if k is None:
        return f(-z) * recip_gamma(-z)
    nodes = 32
    w = 0.25 * np.exp(2j * np.pi * (np.arange(nodes) + 0.5) / nodes)
    return complex(np.mean([f(-(k + wk)) * recip_gamma(-(k + wk)) for wk in w]))


_CONT_CACHE: dict = {}


def mellin_continuation(profile: RadialProfile, M: int, N: int | None = None,
                        m_expansion: AsymptoticExpansion | None = None) -> MellinContinuation:
    """Cached :class:`MellinContinuation` for (profile, M, N, expansion)."""
    key = (id(profile), M, N, id(m_expansion))
    hit = _CONT_CACHE.get(key)
    if hit is None or hit[0] is not profile or hit[1] is not m_expansion:
        hit = (profile, m_expansion, MellinContinuation(profile, M, N, m_expansion))
        _CONT_CACHE[key] = hit
        if len(_CONT_CACHE) > 64:
            _CONT_CACHE.pop(next(iter(_CONT_CACHE)))
    return hit[2]


def _auto_depth(re_s: float) -> int:
    return max(2, math.ceil(-re_s) + 2)


def mellin_transform(profile: RadialProfile, s, M: int | None = None, N: int | None = None,
                     m_expansion: AsymptoticExpansion | None = None) -> complex:
    """Continued Mellin transform f(s) of m."""
    s = complex(s)
    M = _auto_depth(s.real) if M is None else M
    return mellin_continuation(profile, M, N, m_expansion)(s)


def beta_via_mellin(profile: RadialProfile, z, M: int | None = None, N: int | None = None,
                    m_expansion: AsymptoticExpansion | None = None) -> complex:
    """B(z) = f(-z)/Gamma(-z) from the continued Mellin transform of m."""
    z = complex(z)
    if M is None:
        M = _auto_depth(-z.real)
    k = _near_nonnegative_int(z)
    if k is not None and M < k + 2:
        raise InsufficientDepth(f"z={z} needs Taylor depth M >= {k + 2}")
    cont = mellin_continuation(profile, M, N, m_expansion)
    return _beta_from_f(cont, z)


def default_expansion(profile: RadialProfile, N: int = 8) -> AsymptoticExpansion | None:
    """Closed-form large-R expansion of m where one is available."""
    if profile.density is not None and profile.series_at_zero and not profile.atoms:
        return watson_expansion(profile, N)
    return None


def beta_evaluator(profile: RadialProfile, M: int = 4, N: int | None = None,
                   m_expansion: AsymptoticExpansion | None = None) -> MeromorphicEvaluator:
    """Meromorphic continuation of B for a profile.

    Self-similar profiles (p-adic integers) are continued exactly by
    ``B = head / (1 - q r^z)``. Everything else goes through the Mellin
    transform; the strip in z is ``(gamma - N, M)``.
    """
    if profile.self_similar:
        q = profile.tail_mass / profile.total_mass
        lr = math.log(profile.tail_radius)

        def func(z):
            return _atom_sum(profile, z) / (1.0 - q * cmath.exp(z * lr))
        return MeromorphicEvaluator(func, (-math.inf, math.inf),
                                    {"method": "self-similar"}, profile.label)
    cont = mellin_continuation(profile, M, N, m_expansion)
    lo_s, hi_s = cont.strip
    return MeromorphicEvaluator(lambda z: _beta_from_f(cont, z), (-hi_s, -lo_s),
                                {"method": "mellin", "M": cont.M, "N": cont.N},
                                profile.label)


def closed_form_evaluator(selector: str | RadialProfile) -> MeromorphicEvaluator:
    """Closed-form B for sphere (chordal, normalized) and p-adic profiles."""
    label = selector.label if isinstance(selector, RadialProfile) else selector
    parts = dict(item.split("=", 1) for item in label.split(":")[1:])
    kind = label.split(":")[0]
    if kind == "padic":
        p = int(parts["p"])
        return MeromorphicEvaluator(lambda z: beta_padic_closed(p, z), params={"method": "closed"},
                                    name=label)
    if kind == "sphere" and parts.get("metric", "chordal") == "chordal":
        n = int(parts["n"])
        return MeromorphicEvaluator(lambda z: beta_sphere_closed(n, z), params={"method": "closed"},
                                    name=label)
    raise ValueError(f"no closed form for {label!r}")


# ---------------------------------------------------------------------------
# pole scanning

_JITTER = 0.1180339887  # golden-ratio offset for interior grid lines
_MAX_SPLIT = 14


def _safe(f, z):
    try:
        v = complex(f(z))
    except PoleArgument:
        return complex(math.inf)
    return v


def _edge_winding(f, za, zb, fa, fb, depth=0):
    """Change of arg f along the segment [za, zb], subdividing large steps."""
    if not (cmath.isfinite(fa) and cmath.isfinite(fb)) or fa == 0 or fb == 0:
        if depth >= _MAX_SPLIT:
            raise EvaluationFailure(f"pole or zero on the scan grid near {za}")
        zm = 0.5 * (za + zb)
        fm = _safe(f, zm)
        return (_edge_winding(f, za, zm, fa, fm, depth + 1)
                + _edge_winding(f, zm, zb, fm, fb, depth + 1))
    step = cmath.phase(fb / fa)
    if abs(step) > math.pi / 3 and depth < _MAX_SPLIT:
        zm = 0.5 * (za + zb)
        fm = _safe(f, zm)
        return (_edge_winding(f, za, zm, fa, fm, depth + 1)
                + _edge_winding(f, zm, zb, fm, fb, depth + 1))
    return step


def _grid_lines(lo, hi, spacing):
    count = max(1, math.ceil((hi - lo) / spacing - 1e-9))
    h = (hi - lo) / count
    inner = [lo + (i + _JITTER) * h for i in range(1, count)]
    return np.array([lo] + inner + [hi])


def _refine(f, z0, zscale, its=40):
    """Secant iteration on 1/f starting from z0."""
    g = lambda z: 1.0 / _safe(f, z)  # noqa: E731
    z1 = z0 + 1e-3 * zscale
    g0, g1 = g(z0), g(z1)
    for _ in range(its):
        if g1 == g0:
            break
        z2 = z1 - g1 * (z1 - z0) / (g1 - g0)
        if not cmath.isfinite(z2):
            break
        z0, g0 = z1, g1
        z1 = z2
        g1 = g(z1) if cmath.isfinite(_safe(f, z1)) else 0j
        if abs(z1 - z0) <= 1e-13 * (1 + abs(z1)) or g1 == 0:
            break
    return z1


def scan_poles(evaluator: Callable, rect, spacing: float = 0.5,
               residue_nodes: int = 64) -> PoleReport:
    """Simple poles of ``evaluator`` in rect = (re_min, re_max, im_min, im_max)."""
    a, b, c, d = (float(x) for x in rect)
    if not (a < b and c < d):
        raise ValueError("empty scan rectangle")
    xs = _grid_lines(a, b, spacing)
    ys = _grid_lines(c, d, spacing)
    F = np.empty((len(xs), len(ys)), dtype=complex)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            F[i, j] = _safe(evaluator, complex(x, y))

    def z(i, j):
        return complex(xs[i], ys[j])

    horiz, vert = {}, {}

    def h_edge(i, j):  # (i,j) -> (i+1,j)
        if (i, j) not in horiz:
            horiz[i, j] = _edge_winding(evaluator, z(i, j), z(i + 1, j), F[i, j], F[i + 1, j])
        return horiz[i, j]

    def v_edge(i, j):  # (i,j) -> (i,j+1)
        if (i, j) not in vert:
            vert[i, j] = _edge_winding(evaluator, z(i, j), z(i, j + 1), F[i, j], F[i, j + 1])
        return vert[i, j]

    hx = (b - a) / max(1, len(xs) - 1)
    hy = (d - c) / max(1, len(ys) - 1)
    hmin = min(hx, hy)
    radius = min(0.1, hmin / 4)
    found = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            wind = (h_edge(i, j) + v_edge(i + 1, j) - h_edge(i, j + 1) - v_edge(i, j)) / (2 * math.pi)
            count = round(wind)
            if count > -1:
                continue
            centre = 0.5 * (z(i, j) + z(i + 1, j + 1))
            r = 0.55 * abs(z(i + 1, j + 1) - z(i, j))
            nodes = 64
            ws = r * np.exp(2j * np.pi * np.arange(nodes) / nodes)
            fv = np.array([_safe(evaluator, centre + w) for w in ws])
            if np.all(np.isfinite(fv)):
                m0 = np.sum(fv * ws)
                m1 = np.sum(fv * ws * (centre + ws))
                guess = m1 / m0 if m0 != 0 else centre
            else:
                guess = centre
            if not (abs(guess - centre) <= r):
                guess = centre
            pole = _refine(evaluator, guess, hmin)
            if not (a <= pole.real <= b and c <= pole.imag <= d):
                pole = guess
            edge_gap = min(pole.real - a, b - pole.real, pole.imag - c, d - pole.imag)
            if edge_gap < radius:
                raise BoundaryPole(f"pole near {pole} is too close to the scan boundary")
            res = contour_residue(evaluator, pole, radius=radius, nodes=residue_nodes)
            found.append((complex(pole), complex(res)))
    found.sort(key=lambda e: (round(e[0].real, 6), round(e[0].imag, 6)))
    merged = []
    for pole, res in found:
        if merged and abs(merged[-1][0] - pole) < 1e-6 * (1 + abs(pole)):
            continue
        merged.append((pole, res))
    meta = {"grid": [len(xs), len(ys)], "spacing": spacing, "rect": [a, b, c, d]}
    meta.update(getattr(evaluator, "params", {}) or {})
    strip = getattr(evaluator, "strip", (a, b))
    return PoleReport(merged, (max(a, strip[0]), min(b, strip[1])), [], meta)
