"""Exact formal machinery for asymptotic expansions.

* partition polynomials ``g_j(nu, t_1..t_j)``, the coefficients of
  ``(1 + sum_l t_l x^l)^nu``, with exact rational coefficients;
* powers of expansions ``f ~ sum_j a_j R^(gamma - j)`` and the
  conversions between the magnitude side (nu = -1) and any nu;
* Taylor coefficients B_j of m_X at R = 0;
* the dictionary between expansion coefficients and beta-function poles.

Leading coefficients raised to rational powers are kept exact as
:class:`Surd` values, so ``(e**nu)**(1/nu) == e`` holds exactly for
rational input.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from .errors import OffLattice, OrderExceeded, ZeroLeadingCoefficient
from .kernels import recip_gamma
from .spaces import RadialProfile

logger = logging.getLogger(__name__)

EXACT = (int, Fraction)


# ---------------------------------------------------------------------------
# exact surds c * N**(1/q)

def _iroot(n: int, q: int) -> int | None:
    """Exact integer q-th root of n >= 0, or None."""
    if n < 2:
        return n
    x = int(round(math.exp(math.log(n) / q)))
    for cand in (x - 1, x, x + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    # big integers: Newton iteration
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x ** q == n else None


_SMALL_PRIMES = [p for p in range(2, 200) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


class Surd:
    """The real number ``coef * radicand**(1/index)`` (radicand > 1 integer)."""

    __slots__ = ("coef", "radicand", "index")

    def __init__(self, coef, radicand, index):
        self.coef = Fraction(coef)
        self.radicand = int(radicand)
        self.index = int(index)

    @staticmethod
    def make(coef, radicand, index):
        """Canonical form; returns a Fraction when the radical is rational."""
        coef = Fraction(coef)
        rad = Fraction(radicand)
        if rad <= 0:
            raise ValueError("radicand must be positive")
        q = int(index)
        if coef == 0:
            return Fraction(0)
        # clear the denominator: (a/b)^(1/q) = (a b^(q-1))^(1/q) / b
        n = rad.numerator * rad.denominator ** (q - 1)
        coef /= rad.denominator
        for p in _SMALL_PRIMES:
            pq = p ** q
            while n % pq == 0:
                n //= pq
                coef *= p
        r = _iroot(n, q)
        if r is not None:
            return coef * r
        # lower the index when the radicand is a perfect power
        for d in range(q, 1, -1):
            if q % d == 0:
                r = _iroot(n, d)
                if r is not None:
                    return Surd.make(coef, r, q // d)
        return Surd(coef, n, q)

    def _key(self):
        return (self.coef, self.radicand, self.index)

    def __float__(self):
        return float(self.coef) * math.exp(math.log(self.radicand) / self.index)

    def __complex__(self):
        return complex(float(self))

    def __hash__(self):
        return hash(self._key())

    def __eq__(self, other):
        if isinstance(other, Surd):
            return self._key() == other._key()
        if isinstance(other, EXACT):
            return False
        return NotImplemented if not isinstance(other, (float, complex)) else float(self) == other

    def __neg__(self):
        return Surd(-self.coef, self.radicand, self.index)

    def __abs__(self):
        return Surd(abs(self.coef), self.radicand, self.index)

    def __mul__(self, other):
        if isinstance(other, EXACT):
            return Surd.make(self.coef * other, self.radicand, self.index)
        if isinstance(other, Surd):
            L = math.lcm(self.index, other.index)
            rad = self.radicand ** (L // self.index) * other.radicand ** (L // other.index)
            return Surd.make(self.coef * other.coef, rad, L)
        if isinstance(other, (float, complex, np.floating, np.complexfloating)):
            return float(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        q, n = self.index, self.radicand
        return Surd.make(1 / (self.coef * n), n ** (q - 1), q)

    def __truediv__(self, other):
        if isinstance(other, EXACT):
            return Surd.make(self.coef / Fraction(other), self.radicand, self.index)
        if isinstance(other, Surd):
            return self * other.inverse()
        if isinstance(other, (float, complex)):
            return float(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, EXACT):
            return self.inverse() * other
        return other / float(self)

    def __add__(self, other):
        if isinstance(other, EXACT) and other == 0:
            return self
        if isinstance(other, Surd) and (other.radicand, other.index) == (self.radicand, self.index):
            return Surd.make(self.coef + other.coef, self.radicand, self.index)
        return float(self) + (float(other) if isinstance(other, (Surd, Fraction, int)) else other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __pow__(self, k):
        k = Fraction(k) if isinstance(k, EXACT) else k
        if isinstance(k, Fraction):
            if k.denominator == 1:
                e = int(k)
                base = self if e >= 0 else self.inverse()
                out = Fraction(1)
                for _ in range(abs(e)):
                    out = out * base
                return out
            if self.coef < 0:
                return cmath.exp(k * cmath.log(float(self)))
            return rational_power(self.coef, k) * rational_power(self.radicand, k / self.index)
        return complex(self) ** k

    def __repr__(self):
        return f"Surd({self.coef}, {self.radicand}, {self.index})"

    def __str__(self):
        return f"{self.coef}*{self.radicand}^(1/{self.index})"


def rational_power(x, e):
    """Exact ``x**e`` for rational x > 0 and rational e (Fraction or Surd)."""
    x, e = Fraction(x), Fraction(e)
    if e.denominator == 1:
        return x ** int(e)
    if x <= 0:
        raise ValueError("rational_power needs a positive base")
    u, w = e.numerator, e.denominator
    return Surd.make(1, x ** u, w)


def parse_exact(text: str):
    """Inverse of :func:`exact_str` (Fraction, Surd, float, or complex)."""
    text = text.strip()
    if "^(1/" in text:
        coef, rest = text.split("*", 1)
        rad, idx = rest.split("^(1/")
        return Surd.make(Fraction(coef), int(rad), int(idx.rstrip(")")))
    try:
        return Fraction(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return complex(text.replace("i", "j"))


def exact_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, Surd)):
        return str(x)
    return format(x, ".17g")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Surd))


# ---------------------------------------------------------------------------
# nu-polynomials and the g_j table

@dataclass(frozen=True)
class NuPolynomial:
    """Polynomial in nu with Fraction coefficients, ascending degree."""

    coeffs: tuple = ()

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def falling_factorial(cls, k: int) -> "NuPolynomial":
        """nu (nu - 1) ... (nu - k + 1)."""
        c = [Fraction(1)]
        for i in range(k):
            # multiply by (nu - i)
            nxt = [Fraction(0)] * (len(c) + 1)
            for d, a in enumerate(c):
                nxt[d + 1] += a
                nxt[d] -= i * a
            c = nxt
        return cls(tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def scaled(self, factor) -> "NuPolynomial":
        return NuPolynomial(tuple(a * Fraction(factor) for a in self.coeffs))

    def __call__(self, nu):
        out = 0
        for a in reversed(self.coeffs):
            out = out * nu + a
        return out


@dataclass(frozen=True)
class GTerm:
    k: tuple            # multiplicities (k_1, ..., k_j), sum_l l k_l = j
    parts: int          # sum_l k_l
    denominator: int    # prod_l k_l!
    poly: NuPolynomial  # falling_factorial(parts) / denominator

    def text(self) -> str:
        if self.parts == 0:
            return "1"
        ff = "*".join(["nu"] + [f"(nu-{i})" for i in range(1, self.parts)])
        coef = ff if self.denominator == 1 else f"{ff}/{self.denominator}"
        mons = []
        for l, kl in enumerate(self.k, start=1):
            if kl == 1:
                mons.append(f"t{l}")
            elif kl > 1:
                mons.append(f"t{l}^{kl}")
        return "*".join([coef] + mons)


@dataclass(frozen=True)
class GTable:
    max_j: int
    rows: tuple   # rows[j] = tuple of GTerm

    def terms(self, j: int):
        if j > self.max_j:
            raise OrderExceeded(f"table holds g_j for j <= {self.max_j}, asked for {j}")
        return self.rows[j]

    def text(self, j: int) -> str:
        if j == 0:
            return "1"
        return " + ".join(term.text() for term in self.terms(j))


def partitions(j: int) -> list[tuple]:
    """Multiplicity vectors k with sum_l l k_l = j, lexicographically descending.

    Descending order lists the t_1-heavy terms first, e.g. g_2 starts with t1^2.
    """
    if j == 0:
        return [()]
    out = []

    def rec(l, remaining, prefix):
        if l > j:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for kl in range(remaining // l + 1):
            rec(l + 1, remaining - l * kl, prefix + [kl])

    rec(1, j, [])
    return sorted(out, reverse=True)


@lru_cache(maxsize=None)
def gj_table(J: int) -> GTable:
    """Exact table of g_0..g_J from the explicit partition sum."""
    if J < 0:
        raise ValueError("J must be >= 0")
    rows = []
    for j in range(J + 1):
        terms = []
        for k in partitions(j):
            parts = sum(k)
            den = math.prod(math.factorial(x) for x in k)
            poly = NuPolynomial.falling_factorial(parts).scaled(Fraction(1, den))
            terms.append(GTerm(k, parts, den, poly))
        rows.append(tuple(terms))
    return GTable(J, tuple(rows))


def _monomial(k, t):
    out = 1
    for l, kl in enumerate(k):
        if kl:
            out = out * t[l] ** kl
    return out


def eval_g(table: GTable, j: int, nu, t: Sequence):
    """g_j(nu, t_1, ..., t_j); exact for rational nu and t."""
    if j > table.max_j:
        raise OrderExceeded(f"j={j} exceeds table order {table.max_j}")
    if len(t) < j:
        raise OrderExceeded(f"g_{j} needs {j} arguments, got {len(t)}")
    if j == 0:
        return 1
    total = 0
    for term in table.rows[j]:
        total = total + term.poly(nu) * _monomial(term.k, t)
    return total


def g_map(table: GTable, nu, t: Sequence) -> tuple:
    """G_{j,nu}: (t_1..t_j) -> (g_1(nu, t), ..., g_j(nu, t))."""
    return tuple(eval_g(table, k, nu, t) for k in range(1, len(t) + 1))


def g_by_series(nu, t: Sequence, J: int) -> list:
    """Cross-check: coefficients of (1+T)^nu = sum_K binom(nu, K) T^K, T = sum t_l x^l."""
    T = [0] + list(t[:J]) + [0] * max(0, J - len(t))
    out = [1] + [0] * J
    power = [1] + [0] * J       # T^K
    binom = 1
    for K in range(1, J + 1):
        power = [sum(power[i] * T[n - i] for i in range(n + 1)) for n in range(J + 1)]
        binom = binom * (nu - (K - 1)) / K
        out = [o + binom * p for o, p in zip(out, power)]
    return out


# ---------------------------------------------------------------------------
# asymptotic expansions

@dataclass(frozen=True)
class AsymptoticExpansion:
    """f(R) ~ sum_j coeffs[j] R^(gamma - j), known through order len(coeffs) - 1."""

    gamma: object
    coeffs: tuple = ()
    branch_flag: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def floats(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs])

    def evaluate(self, R):
        R = np.asarray(R, dtype=float)
        g = complex(self.gamma)
        out = sum(complex(c) * R ** (g - j) for j, c in enumerate(self.coeffs))
        return out

    def as_dict(self) -> dict:
        return {"gamma": exact_str(self.gamma) if is_exact(self.gamma) else float(self.gamma),
                "coeffs": [_coeff_json(c) for c in self.coeffs],
                "branch_flag": self.branch_flag}

    @classmethod
    def from_dict(cls, data) -> "AsymptoticExpansion":
        g = data["gamma"]
        gamma = parse_exact(g) if isinstance(g, str) else g
        coeffs = []
        for c in data["coeffs"]:
            if isinstance(c, dict):
                coeffs.append(complex(c["re"], c["im"]))
            elif isinstance(c, str):
                coeffs.append(parse_exact(c))
            else:
                coeffs.append(c)
        return cls(gamma, tuple(coeffs), bool(data.get("branch_flag", False)))


def _coeff_json(c):
    if is_exact(c):
        return exact_str(c)
    c = complex(c)
    if c.imag == 0:
        return c.real
    return {"re": c.real, "im": c.imag}


def _as_exponent(nu):
    if isinstance(nu, EXACT):
        return Fraction(nu)
    if isinstance(nu, str):
        return parse_exact(nu)
    return nu


def _power_scalar(a, nu):
    """a**nu: exact where possible, else principal branch. Returns (value, flagged)."""
    if isinstance(nu, Fraction) and nu.denominator == 1:
        k = int(nu)
        if isinstance(a, (Fraction, int)):
            if a == 0 and k < 0:
                raise ZeroLeadingCoefficient("zero leading coefficient")
            return Fraction(a) ** k, False
        if isinstance(a, Surd):
            return a ** k, False
        return complex(a) ** k if isinstance(a, complex) else float(a) ** k, False
    if isinstance(nu, Fraction):
        if isinstance(a, (Fraction, int)) and a > 0:
            return rational_power(a, nu), False
        if isinstance(a, Surd) and a.coef > 0:
            return a ** nu, False
    ac = complex(a)
    nuc = complex(nu)
    if ac.imag == 0 and ac.real > 0:
        val = cmath.exp(nuc * math.log(ac.real))
        return (val.real if nuc.imag == 0 else val), False
    logger.warning("principal branch used for (%s)**(%s)", a, nu)
    return cmath.exp(nuc * cmath.log(ac)), True


def power_expansion(exp: AsymptoticExpansion, nu) -> AsymptoticExpansion:
    """Expansion of f**nu: alpha_j = a_0^nu g_j(nu, a_1/a_0, ..., a_j/a_0)."""
    nu = _as_exponent(nu)
    if not exp.coeffs or exp.coeffs[0] == 0:
        raise ZeroLeadingCoefficient("power of an expansion needs a_0 != 0")
    a0 = exp.coeffs[0]
    t = [a / a0 for a in exp.coeffs[1:]]
    lead, flag = _power_scalar(a0, nu)
    table = gj_table(max(exp.order, 0))
    coeffs = [lead] + [lead * g for g in g_map(table, nu, t)]
    return AsymptoticExpansion(exp.gamma * nu, tuple(coeffs), exp.branch_flag or flag)


def shift_nu(alpha: AsymptoticExpansion, nu_from, delta) -> AsymptoticExpansion:
    """Expansion of M(R, nu_from + delta) from that of M(R, nu_from).

    Since M(R, nu) = m(R)**nu, this is the power (nu_from + delta)/nu_from.
    """
    nu_from, delta = _as_exponent(nu_from), _as_exponent(delta)
    if nu_from == 0:
        raise ZeroLeadingCoefficient("cannot shift away from nu = 0")
    return power_expansion(alpha, (nu_from + delta) / nu_from)


def magnitude_to_alpha(c: AsymptoticExpansion, nu) -> AsymptoticExpansion:
    """From the magnitude expansion (nu = -1 member) to the nu member: power -nu."""
    nu = _as_exponent(nu)
    return power_expansion(c, -nu)


def alpha_to_magnitude(alpha: AsymptoticExpansion, nu) -> AsymptoticExpansion:
    """From the nu member back to the magnitude expansion: power -1/nu."""
    nu = _as_exponent(nu)
    if nu == 0:
        raise ZeroLeadingCoefficient("the nu = 0 member carries no information")
    return power_expansion(alpha, -1 / nu if isinstance(nu, Fraction) else -1.0 / nu)


# ---------------------------------------------------------------------------
# Taylor coefficients at R = 0

def _density_moments(profile: RadialProfile, J: int, nodes: int) -> np.ndarray:
    T = profile.support
    e0, e1 = profile.left_exponent, profile.right_exponent
    x, w = special.roots_jacobi(nodes, e1, e0)
    t = 0.5 * T * (1.0 + x)
    smooth = profile.density(t) / (t ** e0 * (T - t) ** e1)
    scale = (0.5 * T) ** (1.0 + e0 + e1)
    powers = t[None, :] ** np.arange(J + 1)[:, None]
    return scale * (powers @ (w * smooth))


def distance_moments(profile: RadialProfile, J: int) -> np.ndarray:
    """int d(eH, y)^j dmu(y) for j = 0..J (Gauss-Jacobi on the density)."""
    mom = np.zeros(J + 1)
    if profile.density is not None:
        mom += _density_moments(profile, J, nodes=60 + J)
    loc, mass = profile.atom_arrays()
    if loc.size:
        mom += (loc[None, :] ** np.arange(J + 1)[:, None]) @ mass
    if profile.tail_mass > 0:
        r = profile.tail_radius ** np.arange(J + 1)
        if profile.self_similar:
            q = profile.tail_mass / profile.total_mass
            mom = mom / (1.0 - q * r)
        else:
            mom += 0.5 * profile.tail_mass * r
    return mom


def taylor_coeffs(profile: RadialProfile, J: int) -> np.ndarray:
    """B_j = (-1)^j / j! * int d(eH, y)^j dmu(y), j = 0..J."""
    if J < 0:
        raise ValueError("J must be >= 0")
    mom = distance_moments(profile, J)
    j = np.arange(J + 1)
    return (-1.0) ** j * mom / special.factorial(j)


def watson_expansion(profile: RadialProfile, N: int) -> AsymptoticExpansion:
    """Large-R expansion of little_m from the density's series at 0.

    With density = factor * sum_k c_k t^(e + k) near 0 (and no atoms), the
    Laplace transform has a_k = factor * c_k * Gamma(e + k + 1) and
    gamma = -(e + 1).
    """
    if profile.atoms or profile.tail_mass or not profile.series_at_zero:
        raise ValueError("profile has no density series at zero")
    if N + 1 > len(profile.series_at_zero):
        raise OrderExceeded(f"series known to order {len(profile.series_at_zero) - 1}")
    e = profile.left_exponent
    coeffs = [profile.series_factor * float(profile.series_at_zero[k]) * math.gamma(e + k + 1)
              for k in range(N + 1)]
    g = -(e + 1)
    gamma = int(g) if float(g).is_integer() else g
    return AsymptoticExpansion(gamma, tuple(coeffs))


# ---------------------------------------------------------------------------
# poles and residues

@dataclass
class PoleReport:
    entries: list                      # (location, residue) pairs
    strip: tuple = (-math.inf, math.inf)
    omitted: list = field(default_factory=list)   # lattice points with zero residue
    meta: dict = field(default_factory=dict)

    def locations(self):
        return [loc for loc, _ in self.entries]

    def as_dict(self) -> dict:
        def num(x):
            if is_exact(x):
                return {"re": float(x), "im": 0.0, "exact": exact_str(x)}
            x = complex(x)
            return {"re": x.real, "im": x.imag}
        ents = []
        for loc, res in self.entries:
            a, b = num(loc), num(res)
            e = {"re": a["re"], "im": a["im"], "res_re": b["re"], "res_im": b["im"]}
            if "exact" in b:
                e["res_exact"] = b["exact"]
            ents.append(e)
        return {"entries": ents,
                "strip": [_finite_or_str(self.strip[0]), _finite_or_str(self.strip[1])],
                "omitted": [complex(z).real if complex(z).imag == 0 else str(z) for z in self.omitted],
                "meta": self.meta}


def _finite_or_str(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _integer_value(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else None
    if isinstance(x, int):
        return x
    xf = complex(x)
    if xf.imag == 0 and float(xf.real).is_integer():
        return int(xf.real)
    return None


def residues_from_expansion(exp: AsymptoticExpansion) -> PoleReport:
    """Poles of B_X at gamma - j with residue a_j / Gamma(j - gamma)."""
    entries, omitted = [], []
    g_int = _integer_value(exp.gamma)
    for j, a in enumerate(exp.coeffs):
        loc = exp.gamma - j
        if g_int is not None:
            k = j - g_int
            if k <= 0:
                res = 0
            elif is_exact(a):
                res = a / math.factorial(k - 1)
            else:
                res = complex(a) / math.factorial(k - 1)
        else:
            res = complex(a) * recip_gamma(j - complex(exp.gamma))
        if res == 0:
            omitted.append(loc)
            logger.info("no pole at %s: zero residue", loc)
            continue
        entries.append((loc, res))
    re_lo = float(complex(exp.gamma).real) - len(exp.coeffs)
    return PoleReport(entries, (re_lo, math.inf), omitted, {"source": "expansion"})


def expansion_from_residues(report: PoleReport, gamma, tol: float = 1e-9) -> AsymptoticExpansion:
    """a_j = residue(gamma - j) * Gamma(j - gamma)."""
    found = {}
    g_int = _integer_value(gamma)
    for loc, res in report.entries:
        jf = complex(gamma) - complex(loc)
        j = int(round(jf.real))
        if j < 0 or abs(jf - j) > tol * (1 + abs(complex(gamma))):
            raise OffLattice(f"pole {loc} is not on {gamma} - N")
        if g_int is not None:
            k = j - g_int
            if k <= 0:
                raise OffLattice(f"pole {loc} sits where 1/Gamma vanishes")
            a = res * math.factorial(k - 1) if is_exact(res) else complex(res) * math.factorial(k - 1)
        else:
            a = complex(res) * complex(special.gamma(j - complex(gamma)))
        found[j] = a
    if not found:
        return AsymptoticExpansion(gamma, ())
    coeffs = tuple(found.get(j, 0) for j in range(max(found) + 1))
    return AsymptoticExpansion(gamma, coeffs)
