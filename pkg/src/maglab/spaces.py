"""Metric measure spaces: finite spaces and radial distance profiles.

A homogeneous space enters every computation only through the law of
``d(basepoint, y)`` under the invariant measure. :class:`RadialProfile`
stores that law as a density on ``[0, support]`` plus point masses, with
an optional self-similar tail (used for the p-adic integers).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotPrime, ParseError, SchemaError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    labels: tuple
    dist: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {d.shape}")
        n = d.shape[0]
        if len(self.labels) != n:
            raise DimensionMismatch("labels and distance matrix disagree in size")
        mu = np.ones(n) if self.measure is None else np.array(self.measure, dtype=float)
        if mu.shape != (n,):
            raise DimensionMismatch("measure must have one weight per point")
        if np.any(mu <= 0):
            raise ValueError("measure weights must be positive")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite and non-negative")
        d.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "measure", mu)

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Law of the distance to a basepoint: density + atoms + tail.

    ``density`` is vectorised, supported on ``[0, support]`` and behaves
    like ``t**left_exponent`` at 0 and ``(support - t)**right_exponent`` at
    the far end. ``series_at_zero`` (optional) holds exact rationals ``c_k``
    with ``density(t) = series_factor * sum_k c_k t**(left_exponent + k)``
    near 0. A self-similar tail carries ``tail_mass`` inside radius
    ``tail_radius`` and is a scaled copy of the whole profile.
    """

    density: Callable | None = None
    support: float = 0.0
    left_exponent: float = 0.0
    right_exponent: float = 0.0
    atoms: tuple = ()
    tail_mass: float = 0.0
    tail_radius: float = 0.0
    self_similar: bool = False
    total_mass: float = 1.0
    dim: int | None = None
    vol: float | None = None
    decay_exponent: float | None = None
    series_at_zero: tuple = ()
    series_factor: float = 1.0
    label: str = ""

    @property
    def normalized(self) -> bool:
        return abs(self.total_mass - 1.0) <= 1e-12

    @property
    def diameter(self) -> float:
        """Largest distance carrying mass."""
        t = [loc for loc, _ in self.atoms]
        if self.density is not None:
            t.append(self.support)
        if self.tail_mass > 0:
            t.append(self.tail_radius)
        return max(t) if t else 0.0

    @property
    def beta_abscissa(self) -> float:
        """B(z) = int t**z is a convergent integral for Re z above this value."""
        bounds = []
        if self.density is not None:
            bounds.append(-(self.left_exponent + 1.0))
        if self.tail_mass > 0:
            if self.self_similar:
                dim = math.log(self.tail_mass / self.total_mass) / math.log(self.tail_radius)
                bounds.append(-dim)
            else:
                bounds.append(0.0)
        return max(bounds) if bounds else -math.inf

    def atom_arrays(self):
        if not self.atoms:
            return np.zeros(0), np.zeros(0)
        loc, mass = zip(*self.atoms)
        return np.array(loc, dtype=float), np.array(mass, dtype=float)


def sphere_volume(n: int) -> float:
    """Surface volume of the unit sphere S^n in R^(n+1)."""
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def _sphere_norm(n: int) -> float:
    # int_0^pi sin^(n-1) = int_0^2 t^(n-1) (1 - t^2/4)^((n-2)/2) dt
    return math.sqrt(math.pi) * math.gamma(n / 2) / math.gamma((n + 1) / 2)


def _binom(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out = out * (a - i) / (i + 1)
    return out


def _sinc_power_series(power: int, terms: int) -> list[Fraction]:
    """Coefficients of (sin x / x)**power in powers of x."""
    base = [Fraction(0)] * terms
    for i in range(0, terms, 2):
        base[i] = Fraction((-1) ** (i // 2), math.factorial(i + 1))
    out = [Fraction(1)] + [Fraction(0)] * (terms - 1)
    for _ in range(power):
        out = [sum(out[k] * base[j - k] for k in range(j + 1)) for j in range(terms)]
    return out


def sphere_profile(n: int, metric: str = "chordal", normalized: bool = True,
                   series_terms: int = 40) -> RadialProfile:
    """Distance law on the unit sphere S^n (chordal or geodesic metric)."""
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    z = _sphere_norm(n)
    vol = sphere_volume(n)
    scale = 1.0 / z if normalized else vol / z
    if metric == "geodesic":
        def density(theta):
            return scale * np.sin(theta) ** (n - 1)
        support, right = math.pi, float(n - 1)
        series = tuple(_sinc_power_series(n - 1, series_terms))
    elif metric == "chordal":
        half = (n - 2) / 2

        def density(t):
            return scale * t ** (n - 1) * np.maximum(1.0 - 0.25 * t * t, 0.0) ** half
        support = 2.0
        right = 0.0 if half >= 0 and float(half).is_integer() else half
        a = Fraction(n - 2, 2)
        series = tuple(_binom(a, k // 2) * Fraction(-1, 4) ** (k // 2) if k % 2 == 0
                       else Fraction(0) for k in range(series_terms))
    else:
        raise ValueError(f"unknown sphere metric {metric!r}")
    return RadialProfile(
        density=density, support=support, left_exponent=float(n - 1),
        right_exponent=right, total_mass=1.0 if normalized else vol, dim=n,
        vol=vol, decay_exponent=-float(n), series_at_zero=series,
        series_factor=scale,
        label=f"sphere:n={n}:metric={metric}:normalized={str(normalized).lower()}")


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def padic_atoms(p: int, kmax: int) -> list[tuple[Fraction, Fraction]]:
    """Exact atoms (p^-k, p^-k - p^-(k+1)), k = 0..kmax, of the p-adic distance law."""
    return [(Fraction(1, p ** k), Fraction(1, p ** k) - Fraction(1, p ** (k + 1)))
            for k in range(kmax + 1)]


def padic_profile(p: int, kmax: int = 0, tail_tol: float = 1e-18) -> RadialProfile:
    """Distance law of Z_p under Haar probability measure.

    ``kmax`` is raised until the tail mass ``p**-(kmax+1)`` is at most
    ``tail_tol``. The tail is the ball ``p^(kmax+1) Z_p``, a scaled copy of
    the whole space, which lets series evaluations close it exactly.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    while Fraction(1, p ** (kmax + 1)) > tail_tol:
        kmax += 1
    atoms = tuple((float(t), float(m)) for t, m in padic_atoms(p, kmax))
    tail = float(Fraction(1, p ** (kmax + 1)))
    return RadialProfile(atoms=atoms, tail_mass=tail, tail_radius=tail,
                         self_similar=True, total_mass=1.0, decay_exponent=-1.0,
                         label=f"padic:p={p}")


def two_point_homogeneous_profile() -> RadialProfile:
    """Single atom at distance 1; m(R) = exp(-R), B(z) = 1."""
    return RadialProfile(atoms=((1.0, 1.0),), total_mass=1.0, label="twopoint")


def finite_from_points(coords: Sequence[Sequence[float]], measure=None,
                       labels=None) -> FiniteMetricSpace:
    rows = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coords]
    if len({r.shape for r in rows}) > 1:
        raise DimensionMismatch("all points must have the same dimension")
    x = np.array(rows)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    labels = tuple(range(len(rows))) if labels is None else tuple(labels)
    return FiniteMetricSpace(labels, dist, measure)


@dataclass
class MetricReport:
    symmetry: list = field(default_factory=list)
    diagonal: list = field(default_factory=list)
    separation: list = field(default_factory=list)
    triangle: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.symmetry or self.diagonal or self.separation or self.triangle)

    def as_dict(self):
        return {"symmetry": self.symmetry, "diagonal": self.diagonal,
                "separation": self.separation, "triangle": self.triangle}


def validate_metric(space: FiniteMetricSpace, atol: float = 1e-12) -> MetricReport:
    """List metric-axiom violations (0-based indices).

    A triangle entry ``(x, y, z)`` means ``d(x, z) > d(x, y) + d(y, z)``.
    """
    d = space.dist
    n = space.size
    rep = MetricReport()
    scale = atol * max(1.0, float(d.max(initial=0.0)))
    ii, jj = np.nonzero(np.abs(d - d.T) > scale)
    rep.symmetry = [(int(i), int(j)) for i, j in zip(ii, jj) if i < j]
    rep.diagonal = [int(i) for i in np.nonzero(np.abs(np.diag(d)) > scale)[0]]
    off = ~np.eye(n, dtype=bool)
    ii, jj = np.nonzero((d <= scale) & off)
    rep.separation = [(int(i), int(j)) for i, j in zip(ii, jj) if i < j]
    for y in range(n):
        via = d[:, y][:, None] + d[y, :][None, :]
        bad = np.argwhere(d > via + scale)
        rep.triangle.extend((int(x), y, int(z)) for x, z in bad if x != y and z != y)
    rep.triangle.sort()
    return rep


def finite_from_mapping(data: dict) -> FiniteMetricSpace:
    """Build a space from the file schema ``{labels, dist, measure?}``."""
    if not isinstance(data, dict):
        raise SchemaError("finite space file must hold a mapping")
    if "dist" not in data:
        raise SchemaError("missing required field 'dist'")
    dist = data["dist"]
    try:
        d = np.array(dist, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'dist' is not a numeric matrix: {exc}") from exc
    if d.ndim == 1:
        # row-major flattening
        n = math.isqrt(d.size)
        if n * n != d.size:
            raise SchemaError("flat 'dist' length is not a perfect square")
        d = d.reshape(n, n)
    labels = data.get("labels", list(range(1, d.shape[0] + 1)))
    try:
        return FiniteMetricSpace(labels, d, data.get("measure"))
    except (DimensionMismatch, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def load_finite_space(path) -> FiniteMetricSpace:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return finite_from_mapping(data)


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_space_selector(text: str) -> RadialProfile:
    """Parse ``sphere:n=2:metric=chordal:normalized=true``, ``padic:p=3``, ``twopoint``."""
    parts = text.strip().split(":")
    kind, opts = parts[0], {}
    for item in parts[1:]:
        if "=" not in item:
            raise ParseError(f"bad selector option {item!r} in {text!r}")
        key, val = item.split("=", 1)
        opts[key] = val
    try:
        if kind == "sphere":
            n = int(opts.pop("n"))
            metric = opts.pop("metric", "chordal")
            normalized = _BOOL[opts.pop("normalized", "true").lower()]
            prof = sphere_profile(n, metric, normalized)
        elif kind == "padic":
            prof = padic_profile(int(opts.pop("p")))
        elif kind == "twopoint":
            prof = two_point_homogeneous_profile()
        else:
            raise ParseError(f"unknown space kind {kind!r}")
    except KeyError as exc:
        raise ParseError(f"selector {text!r}: missing or bad option {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, (ParseError, NotPrime)):
            raise
        raise ParseError(f"selector {text!r}: {exc}") from exc
    if opts:
        raise ParseError(f"selector {text!r}: unknown options {sorted(opts)}")
    return prof
