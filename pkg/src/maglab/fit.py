"""Numerical oracle for large-R asymptotic expansions.

``detect_gamma`` reads the leading exponent off log-log slopes,
``fit_expansion`` recovers the coefficients with two independent methods
(least squares in 1/R and peeling with Richardson extrapolation), and
``verify_thm2`` runs the full chain: expansion of m, expansions of the
powers m^nu, and poles of the continued beta function.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .beta import beta_evaluator, scan_poles
from .errors import (DisagreeingMethods, IllConditioned, MaglabError,
                     NonPowerLaw)
from .formal import (AsymptoticExpansion, power_expansion,
                     residues_from_expansion)
from .magnitude import little_m_many
from .spaces import RadialProfile

logger = logging.getLogger(__name__)

DRIFT_TOL = 1e-7
COND_REPORT = 1e10
COND_FAIL = 1e15


def sample(sampler: Callable, R: np.ndarray) -> np.ndarray:
    """Evaluate a sampler on a grid, vectorised when the sampler allows it."""
    R = np.asarray(R, dtype=float)
    try:
        out = np.asarray(sampler(R))
        if out.shape == R.shape:
            return out
    except Exception:
        pass
    return np.array([sampler(float(r)) for r in R])


def _grid(grid, default=(8.0, 2.0, 12)) -> np.ndarray:
    if grid is None:
        grid = default
    if isinstance(grid, dict):
        grid = (grid.get("start", default[0]), grid.get("ratio", default[1]),
                grid.get("points", default[2]))
    if isinstance(grid, tuple) and len(grid) == 3:
        start, ratio, points = grid
        return float(start) * float(ratio) ** np.arange(int(points))
    R = np.asarray(grid, dtype=float)
    if R.ndim != 1 or R.size < 3 or np.any(R <= 0):
        raise ValueError("grid needs at least 3 positive points")
    return np.sort(R)


def _superpolynomial(R, f) -> bool:
    a = np.abs(f)
    if np.any(a[-3:] == 0):
        return True
    slopes = np.diff(np.log(a)) / np.diff(np.log(R))
    return bool(slopes[-1] < -60 and slopes[-1] < 2 * slopes[0])


def detect_gamma(sampler: Callable, R_range=(32.0, 1e5), points: int = 97,
                 degree: int = 6, drift_tol: float = DRIFT_TOL) -> float:
    """Leading exponent gamma of f(R) ~ a_0 R^gamma.

    Local log-log slopes on a geometric grid behave like gamma + sum_j e_j R^-j;
    a polynomial fit in 1/R extrapolates them to R = infinity. A residual
    above ``drift_tol`` means the slope does not settle (log-periodic data).
    """
    if isinstance(R_range, tuple) and len(R_range) == 2:
        R = np.geomspace(R_range[0], R_range[1], points)
    else:
        R = np.sort(np.asarray(R_range, dtype=float))
    f = sample(sampler, R)
    if np.any(~np.isfinite(f)):
        raise NonPowerLaw("sampler returned non-finite values", kind="oscillatory")
    if _superpolynomial(R, f):
        raise NonPowerLaw("decays faster than any power of R", kind="superpolynomial")
    y = np.log(np.abs(f))
    x = np.log(R)
    slopes = np.diff(y) / np.diff(x)
    Rk = R[:-1]
    xi = Rk[0] / Rk
    V = np.vander(xi, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, slopes, rcond=None)
    resid = slopes - V @ coef
    drift = float(np.sqrt(np.mean(resid ** 2)))
    if drift > drift_tol:
        raise NonPowerLaw(f"log-log slope drifts (rms {drift:.2e}); no power law",
                          kind="oscillatory", drift=drift)
    g = float(coef[0])
    half = round(2 * g) / 2
    if abs(g - half) <= 1e-3:
        return float(half)
    return g


@dataclass
class FitReport:
    expansion: AsymptoticExpansion
    errors: np.ndarray
    grid: np.ndarray
    condition: float
    peel: np.ndarray = field(default=None)
    peel_errors: np.ndarray = field(default=None)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "gamma": float(self.expansion.gamma),
            "coeffs": [float(c.real) if isinstance(c, complex) and c.imag == 0 else c
                       for c in self.expansion.coeffs],
            "errors": [float(e) for e in self.errors],
            "grid": [float(r) for r in self.grid],
            "condition": float(self.condition),
            "peel": None if self.peel is None else [float(c) for c in self.peel],
            "peel_errors": None if self.peel_errors is None else [float(e) for e in self.peel_errors],
            "notes": list(self.notes),
        }


def _lsq(R, y, degree):
    x0 = 1.0 / R[0]
    xi = (1.0 / R) / x0
    V = np.vander(xi, degree + 1, increasing=True)
    scale = np.linalg.norm(V, axis=0)
    Vs = V / scale
    coef, *_ = np.linalg.lstsq(Vs, y, rcond=None)
    cond = float(np.linalg.cond(Vs))
    b = coef / scale
    return b / x0 ** np.arange(degree + 1), cond


def _richardson(values, ratio):
    """Extrapolate values ~ a + c_1 h + c_2 h^2 + ..., h shrinking by ``ratio``.

    Returns the table entry whose change from the previous column (and from
    its neighbour in the same column) is smallest, with that change as the
    error estimate.
    """
    prev = list(values)
    best = prev[-1]
    best_err = abs(prev[-1] - prev[-2]) if len(prev) > 1 else math.inf
    for m in range(1, len(values)):
        fac = ratio ** m - 1.0
        # row[k] is built from prev[k] and prev[k + 1]
        row = [prev[k + 1] + (prev[k + 1] - prev[k]) / fac for k in range(len(prev) - 1)]
        for k, val in enumerate(row):
            err = abs(val - prev[k + 1])
            if k:
                err = max(err, abs(val - row[k - 1]))
            if err < best_err:
                best, best_err = val, err
        prev = row
    return best, best_err


def _peel(R, f, gamma, N, ratio):
    """Sequential peeling; errors include those inherited from a_0..a_(j-1)."""
    coeffs, errs = [], []
    for j in range(N + 1):
        rem = f - sum(coeffs[i] * R ** (gamma - i) for i in range(j))
        r = rem * R ** (j - gamma)
        val, err = _richardson(list(r), ratio)
        inherited = sum(errs[i] * R[-1] ** (j - i) for i in range(j))
        coeffs.append(val)
        errs.append(err + inherited)
    return np.array(coeffs), np.array(errs)


def fit_expansion(sampler: Callable, gamma, N: int, grid=None, degree: int | None = None,
                  agree_factor: float = 10.0) -> FitReport:
    """Coefficients a_0..a_N of f(R) ~ sum_j a_j R^(gamma - j)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    R = _grid(grid)
    f = sample(sampler, R).astype(float)
    if _superpolynomial(R, f):
        zero = AsymptoticExpansion(gamma, tuple(0.0 for _ in range(N + 1)))
        return FitReport(zero, np.full(N + 1, np.finfo(float).tiny), R, 1.0,
                         notes=["superpolynomial decay: every lattice coefficient is zero"])
    g = float(gamma)
    y = f * R ** (-g)
    if degree is None:
        degree = min(R.size - 3, max(N + 4, 8))
    if degree < N + 1 or degree > R.size - 1:
        raise IllConditioned(f"degree {degree} does not fit {R.size} points for N={N}")
    a_hi, cond = _lsq(R, y, degree)
    a_lo, _ = _lsq(R, y, degree - 1)
    if cond > COND_FAIL:
        raise IllConditioned(f"Vandermonde condition {cond:.2e}")
    notes = []
    if cond > COND_REPORT:
        notes.append(f"condition {cond:.2e}")
    scale = max(abs(a_hi[0]), 1e-300)
    floor = 1e-14 * scale * R[0] ** np.arange(N + 1)
    spread = np.abs(a_hi[:N + 1] - a_lo[:N + 1])
    if degree + 1 <= R.size - 1:
        a_up, _ = _lsq(R, y, degree + 1)
        spread = np.maximum(spread, np.abs(a_hi[:N + 1] - a_up[:N + 1]))
    err = spread + floor

    # peel on a sub-grid with ratio >= 2 so Richardson stays stable
    step = max(1, math.ceil(math.log(2.0) / math.log(R[1] / R[0]) - 1e-9))
    sub = slice(0, None, step)
    peel, peel_err = _peel(R[sub], f[sub], g, N, float(R[step] / R[0]))
    gap = np.abs(peel - a_hi[:N + 1])
    limit = agree_factor * (err + peel_err) + 1e-12 * scale
    bad = np.nonzero(gap > limit)[0]
    if bad.size:
        j = int(bad[0])
        raise DisagreeingMethods(
            f"a_{j}: least squares {a_hi[j]:.12g} vs peeling {peel[j]:.12g} "
            f"(gap {gap[j]:.2e}, allowed {limit[j]:.2e})")
    exp = AsymptoticExpansion(gamma, tuple(float(c) for c in a_hi[:N + 1]))
    return FitReport(exp, err, R, cond, peel, peel_err, notes)


def profile_grid(profile: RadialProfile, points: int = 24, span: float = 32.0) -> np.ndarray:
    """Geometric grid starting where exp(-diameter R) terms are below 1e-30."""
    start = max(8.0, 80.0 / profile.diameter) if profile.diameter > 0 else 8.0
    return np.geomspace(start, start * span, points)


def m_sampler(profile: RadialProfile) -> Callable:
    return lambda R: little_m_many(profile, R)


def power_sampler(profile: RadialProfile, nu) -> Callable:
    """R -> m(R)^nu, real for real nu (m > 0)."""
    def f(R):
        return little_m_many(profile, R) ** float(nu)
    return f


@dataclass
class LinkResult:
    link: str
    passed: bool
    discrepancy: float | None = None
    detail: str = ""

    def as_dict(self):
        return {"link": self.link, "passed": self.passed,
                "discrepancy": self.discrepancy, "detail": self.detail}


@dataclass
class Thm2Report:
    links: list
    gamma: float | None = None
    expansion: AsymptoticExpansion | None = None

    @property
    def passed(self) -> bool:
        return all(l.passed for l in self.links)

    def as_dict(self):
        return {"passed": self.passed,
                "gamma": self.gamma,
                "expansion": None if self.expansion is None else self.expansion.as_dict(),
                "links": [l.as_dict() for l in self.links]}


def _propagated_errors(exp: AsymptoticExpansion, errs, nu) -> np.ndarray:
    """First-order error of power_expansion(exp, nu) from coefficient errors."""
    base = np.array([complex(c) for c in power_expansion(exp, nu).coeffs])
    out = np.zeros(base.size)
    for i, e in enumerate(errs):
        bumped = list(exp.coeffs)
        bumped[i] = complex(bumped[i]) + float(e)
        moved = np.array([complex(c) for c in
                          power_expansion(AsymptoticExpansion(exp.gamma, bumped), nu).coeffs])
        out += np.abs(moved - base)
    return out


def _coeff_gap(fitted: FitReport, predicted: AsymptoticExpansion, pred_err, tol):
    """Largest coefficient gap, and whether every gap is within tolerance or error bars."""
    a = np.array([complex(c) for c in fitted.expansion.coeffs])
    b = np.array([complex(c) for c in predicted.coeffs])
    k = min(a.size, b.size)
    scale = max(1.0, abs(b[0]))
    gap = np.abs(a[:k] - b[:k])
    allowed = np.maximum(tol * scale, 3.0 * (fitted.errors[:k] + pred_err[:k]))
    return float(np.max(gap) / scale), bool(np.all(gap <= allowed))


def verify_thm2(profile: RadialProfile, N: int = 4, nus: Sequence = (-1, 2, 0.5),
                tol: float = 1e-5, lattice_points: int = 3) -> Thm2Report:
    """Check the equivalence chain on one profile.

    (1) m has an expansion on gamma - N; (2)/(3) m^nu has the expansion
    predicted by power_expansion; (4) the continued beta function has poles
    at gamma - j with residues a_j / Gamma(j - gamma).
    """
    links = []
    try:
        gamma = detect_gamma(m_sampler(profile))
    except NonPowerLaw as exc:
        if exc.kind == "superpolynomial":
            links.append(LinkResult("(1) expansion of m", True, 0.0,
                                    "m decays faster than any power: all a_j = 0"))
            rep = scan_poles(beta_evaluator(profile, M=4), (-4.3, 3.3, -1.1, 1.1), 0.5)
            ok = not rep.entries
            links.append(LinkResult("(4) poles of beta", ok, float(len(rep.entries)),
                                    "empty pole lattice" if ok else f"unexpected poles {rep.entries}"))
            return Thm2Report(links, None, None)
        links.append(LinkResult("(1) expansion of m", False, exc.drift,
                                f"NonPowerLaw ({exc.kind}): {exc}"))
        return Thm2Report(links, None, None)

    grid = profile_grid(profile)
    fit = fit_expansion(m_sampler(profile), gamma, N, grid=grid)
    exp1 = fit.expansion
    links.append(LinkResult("(1) expansion of m", True, float(np.max(fit.errors)),
                            f"gamma={gamma}"))
    for nu in nus:
        name = f"(2)/(3) expansion of m^{nu}"
        try:
            fitted = fit_expansion(power_sampler(profile, nu), gamma * float(nu), N, grid=grid)
            predicted = power_expansion(exp1, nu)
            pred_err = _propagated_errors(exp1, fit.errors, nu)
            gap, ok = _coeff_gap(fitted, predicted, pred_err, tol)
            links.append(LinkResult(name, ok, gap, "agree within tolerance or error bars"))
        except MaglabError as exc:
            links.append(LinkResult(name, False, None, f"{exc.name}: {exc}"))

    name = "(4) poles of beta"
    try:
        ev = beta_evaluator(profile, M=4, m_expansion=exp1)
        lo = gamma - lattice_points + 0.5
        rect = (lo, gamma + 0.6, -0.9, 0.9)
        rep = scan_poles(ev, rect, 0.5)
        expected = {j: complex(r) for j in range(lattice_points)
                    for loc, r in residues_from_expansion(exp1).entries
                    if abs(complex(loc) - (gamma - j)) < 1e-9}
        worst = 0.0
        off = []
        scanned = {}
        for loc, res in rep.entries:
            j = round(gamma - loc.real)
            if abs(loc - (gamma - j)) > 1e-6:
                off.append(loc)
                continue
            scanned[j] = res
        for j in range(lattice_points):
            worst = max(worst, abs(scanned.get(j, 0j) - expected.get(j, 0j)))
        ok = worst <= tol and not off
        detail = f"{len(rep.entries)} poles" + (f", off lattice {off}" if off else "")
        links.append(LinkResult(name, ok, worst, detail))
    except MaglabError as exc:
        links.append(LinkResult(name, False, None, f"{exc.name}: {exc}"))
    return Thm2Report(links, gamma, exp1)
