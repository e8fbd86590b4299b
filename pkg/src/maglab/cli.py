"""Command-line front end.

Subcommands: ``mag``, ``beta``, ``expand``, ``convert``, ``gtable`` and
``verify-thm2``. Output is JSON (default) or CSV with floats written to 17
significant digits, so identical invocations give byte-identical output.
Exit status: 0 on success, 2 for unparseable input, 3 for domain errors;
failures print ``{"error": <name>, "message": ...}`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from fractions import Fraction

import numpy as np

from .beta import (beta_direct, beta_evaluator, beta_finite, beta_via_mellin,
                   default_expansion, scan_poles)
from .errors import MaglabError, MetricViolation, ParseError
from .fit import detect_gamma, fit_expansion, power_sampler, profile_grid, verify_thm2
from .formal import (AsymptoticExpansion, Surd, exact_str, gj_table,
                     parse_exact, power_expansion)
from .magnitude import finite_mag_nu, mag_nu_radial
from .spaces import (RadialProfile, load_finite_space, parse_space_selector,
                     validate_metric)

logger = logging.getLogger("maglab")

EXIT_PARSE = 2
EXIT_DOMAIN = 3


# ---------------------------------------------------------------------------
# deterministic serialization

def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits and complex as {re, im}."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return dumps({"re": c.real, "im": c.imag}, indent, _level)
    if isinstance(obj, (Fraction, Surd)):
        return json.dumps(exact_str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (Fraction, Surd)):
        return exact_str(x)
    return str(x)


def to_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing helpers

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def parse_complex(text: str) -> complex:
    t = text.strip().replace("i", "j").replace(" ", "")
    try:
        return complex(t)
    except ValueError as exc:
        raise ParseError(f"not a number: {text!r}") from exc


def parse_grid(text: str, real: bool = True) -> list:
    """``a,b,c`` or ``lin:a:b:n`` or ``geom:a:b:n``."""
    text = text.strip()
    if text.startswith(("lin:", "geom:")):
        parts = text.split(":")
        if len(parts) != 4:
            raise ParseError(f"grid {text!r} must be kind:start:stop:count")
        try:
            a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ParseError(f"bad grid {text!r}") from exc
        if n < 1:
            raise ParseError("grid needs at least one point")
        if parts[0] == "geom":
            if a <= 0 or b <= 0:
                raise ParseError("geometric grid needs positive bounds")
            vals = np.geomspace(a, b, n)
        else:
            vals = np.linspace(a, b, n)
        return [float(v) for v in vals]
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise ParseError("empty grid")
    if real:
        try:
            return [float(s) for s in items]
        except ValueError as exc:
            raise ParseError(f"bad grid {text!r}") from exc
    return [parse_complex(s) for s in items]


def parse_values(text: str) -> list:
    """Comma list of exact rationals, floats or complex numbers."""
    out = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        try:
            out.append(Fraction(item))
            continue
        except ValueError:
            pass
        out.append(parse_complex(item))
    if not out:
        raise ParseError("empty value list")
    return out


def _scalar_value(x):
    if isinstance(x, Fraction):
        return float(x)
    c = complex(x)
    return c.real if c.imag == 0 else c


def _default_tol(fallback: float) -> float:
    env = os.environ.get("MAGLAB_TOL")
    if env is None:
        return fallback
    try:
        return float(env)
    except ValueError as exc:
        raise ParseError(f"MAGLAB_TOL={env!r} is not a number") from exc


def _load_space(args):
    if getattr(args, "file", None):
        space = load_finite_space(args.file)
        report = validate_metric(space)
        if not report.ok:
            if args.strict:
                raise MetricViolation(f"not a metric: {report.as_dict()}")
            logger.warning("input is not a metric: %s", report.as_dict())
        return space
    if not getattr(args, "space", None):
        raise ParseError("give --space SELECTOR or --file PATH")
    return parse_space_selector(args.space)


def _radial(args) -> RadialProfile:
    space = _load_space(args)
    if not isinstance(space, RadialProfile):
        raise ParseError(f"{args.command} needs a radial space selector")
    return space


# ---------------------------------------------------------------------------
# subcommands

def cmd_mag(args):
    space = _load_space(args)
    Rs = parse_grid(args.R)
    nus = parse_values(args.nu)
    rows = []
    for R in Rs:
        for nu in nus:
            nv = _scalar_value(nu)
            if isinstance(space, RadialProfile):
                val = mag_nu_radial(space, R, nv)
            else:
                val = finite_mag_nu(space, R, nv)
            c = complex(val)
            rows.append({"R": R, "nu": float(complex(nv).real), "nu_im": complex(nv).imag,
                         "re": c.real, "im": c.imag})
    return {"command": "mag", "rows": rows}, ["R", "nu", "nu_im", "re", "im"]


def _depth(text):
    if text is None:
        return None, None
    try:
        M, N = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise ParseError(f"--depth expects M,N, got {text!r}") from exc
    if M < 0 or N < 0:
        raise ParseError("depths must be >= 0")
    return M, N


def cmd_beta(args):
    space = _load_space(args)
    M, N = _depth(args.depth)
    if args.poles:
        if not args.rect:
            raise ParseError("--poles needs --rect a,b,c,d")
        try:
            rect = tuple(float(x) for x in args.rect.split(","))
        except ValueError as exc:
            raise ParseError(f"bad rectangle {args.rect!r}") from exc
        if len(rect) != 4:
            raise ParseError("--rect needs four numbers re_min,re_max,im_min,im_max")
        if not isinstance(space, RadialProfile):
            # a finite space gives an entire function: nothing to find
            from .formal import PoleReport
            return {"command": "beta", "poles": PoleReport([], (rect[0], rect[1])).as_dict()}, None
        exp = None if space.self_similar else default_expansion(space, 8 if N is None else max(N, 1))
        ev = beta_evaluator(space, M=4 if M is None else M, N=N, m_expansion=exp)
        rep = scan_poles(ev, rect, args.spacing)
        return {"command": "beta", "poles": rep.as_dict()}, None
    if not args.z:
        raise ParseError("beta needs --z GRID or --poles")
    zs = parse_grid(args.z, real=False)
    tol = _default_tol(1e-10)
    rows = []
    for z in zs:
        if not isinstance(space, RadialProfile):
            val, how = beta_finite(space, z), "finite"
        elif z.real > space.beta_abscissa and args.method != "mellin":
            val, how = beta_direct(space, z, tol=tol), "direct"
        else:
            exp = None if space.density is None else default_expansion(space, 8 if N is None else max(N, 1))
            val, how = beta_via_mellin(space, z, M=M, N=N, m_expansion=exp), "mellin"
        rows.append({"z_re": z.real, "z_im": z.imag, "re": complex(val).real,
                     "im": complex(val).imag, "method": how})
    return {"command": "beta", "rows": rows}, ["z_re", "z_im", "re", "im", "method"]


def cmd_expand(args):
    profile = _radial(args)
    nu = _scalar_value(parse_values(args.nu)[0])
    sampler = power_sampler(profile, nu)
    grid = profile_grid(profile)
    gamma = float(args.gamma) if args.gamma is not None else detect_gamma(sampler)
    rep = fit_expansion(sampler, gamma, args.order, grid=grid)
    return {"command": "expand", "nu": nu, "fit": rep.as_dict()}, None


def cmd_convert(args):
    gamma = parse_exact(args.gamma)
    coeffs = parse_values(args.coeffs)
    src, dst = parse_values(args.from_nu)[0], parse_values(args.to_nu)[0]
    exp = AsymptoticExpansion(gamma, tuple(coeffs))
    if src == 0:
        from .errors import ZeroLeadingCoefficient
        raise ZeroLeadingCoefficient("cannot convert away from nu = 0")
    out = power_expansion(exp, dst / src)
    return {"command": "convert", "from_nu": src, "to_nu": dst,
            "expansion": out.as_dict()}, None


def cmd_gtable(args):
    if args.max_j < 0:
        raise ParseError("--max-j must be >= 0")
    table = gj_table(args.max_j)
    rows = []
    for j in range(args.max_j + 1):
        terms = [{"k": list(t.k), "nu_coefficients": [str(c) for c in t.poly.coeffs],
                  "text": t.text()} for t in table.rows[j]]
        rows.append({"j": j, "g": table.text(j), "terms": terms})
    return {"command": "gtable", "max_j": args.max_j, "table": rows}, None


def cmd_verify(args):
    profile = _radial(args)
    nus = [_scalar_value(v) for v in parse_values(args.nu)]
    tol = args.tol if args.tol is not None else _default_tol(1e-5)
    rep = verify_thm2(profile, args.order, nus, tol)
    return {"command": "verify-thm2", "report": rep.as_dict()}, None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maglab", description="Magnitude, beta functions and asymptotic expansions.")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def space_args(sp):
        sp.add_argument("--space", help="sphere:n=2:metric=chordal, padic:p=3, twopoint")
        sp.add_argument("--file", help="finite space JSON {labels, dist, measure?}")
        sp.add_argument("--strict", action="store_true", help="reject non-metric input")

    sp = sub.add_parser("mag", help="M_X(R, nu)")
    space_args(sp)
    sp.add_argument("--R", required=True)
    sp.add_argument("--nu", default="-1")
    sp.set_defaults(func=cmd_mag)

    sp = sub.add_parser("beta", help="beta function values or poles")
    space_args(sp)
    sp.add_argument("--z")
    sp.add_argument("--poles", action="store_true")
    sp.add_argument("--rect")
    sp.add_argument("--spacing", type=float, default=0.5)
    sp.add_argument("--depth", help="M,N continuation depths")
    sp.add_argument("--method", choices=["auto", "mellin"], default="auto")
    sp.set_defaults(func=cmd_beta)

    sp = sub.add_parser("expand", help="fit the large-R expansion of m^nu")
    space_args(sp)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--gamma")
    sp.add_argument("--nu", default="1")
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("convert", help="move an expansion between nu values")
    sp.add_argument("--gamma", required=True)
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--from-nu", dest="from_nu", required=True)
    sp.add_argument("--to-nu", dest="to_nu", required=True)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("gtable", help="partition polynomials g_0..g_J")
    sp.add_argument("--max-j", dest="max_j", type=int, required=True)
    sp.set_defaults(func=cmd_gtable)

    sp = sub.add_parser("verify-thm2", help="expansion, powers and poles on one space")
    space_args(sp)
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--nu", default="-1,2,1/2")
    sp.add_argument("--tol", type=float, default=None)
    sp.set_defaults(func=cmd_verify)
    return p


_VALUE_FLAGS = {"--R", "--z", "--nu", "--rect", "--coeffs", "--gamma", "--from-nu",
                "--to-nu", "--depth", "--tol", "--spacing"}


def _glue_values(argv: list) -> list:
    """Attach values such as ``-1.5,-0.5,-30,30`` that argparse would take for flags."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _fail(name: str, message: str, code: int, stderr) -> int:
    stderr.write(dumps({"error": name, "message": message}) + "\n")
    return code


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        args = build_parser().parse_args(_glue_values(argv))
        if not args.command:
            raise ParseError("missing subcommand")
        payload, columns = args.func(args)
        if args.format == "csv":
            if columns is None:
                raise ParseError(f"{args.command} output has no CSV form; use --format json")
            text = to_csv(payload["rows"], columns)
        else:
            text = dumps(payload) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 0
    except ParseError as exc:
        return _fail(exc.name, str(exc), EXIT_PARSE, stderr)
    except MaglabError as exc:
        return _fail(exc.name, str(exc), EXIT_DOMAIN, stderr)
    except (ValueError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_PARSE, stderr)


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
