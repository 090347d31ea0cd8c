"""Command-line front end: ``dampwall <command> [options]``.

Exit status is 0 on success, 1 when a check is falsified and 2 on usage
errors. Artifacts go to ``--out`` (or stdout); progress goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import re
import sys
import time
from fractions import Fraction

from . import artifacts, repro
from .algebra.series import RatSeries
from .factory import cr_search, verify_factorization
from .guess import (
    InsufficientTermsError,
    find_ode,
    fit_ode,
    fixed_source,
    guess_precurrence,
    physical_source,
)
from .percolation import closed_form, mean_size_series, specialize_mod, specialize_series
from .singular import (
    NoEstimate,
    SingularPoint,
    critical_exponent_estimate,
    indicial_exponents,
    nearest_to_origin,
    pade_scan,
    points_of,
    quartic,
    singular_points,
)

log = logging.getLogger("dampwall")

_EXACT = re.compile(r"^[+-]?\d+(/\d+)?$")


class UsageError(Exception):
    pass


def exact_rational(text: str) -> Fraction:
    """argparse type for r and points: "num/den" or an integer, never a float."""
    if not _EXACT.match(text.strip()):
        raise argparse.ArgumentTypeError(f"{text!r} is not an exact rational (use num/den)")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"{text!r} has a zero denominator") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _rows_text(rows) -> str:
    out = []
    for row in rows:
        mark = "PASS" if row["pass"] else "FAIL"
        rest = ", ".join(f"{k}={v}" for k, v in row.items() if k != "pass")
        out.append(f"{mark}  {rest}")
    return "\n".join(out) + "\n"


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    keys = sorted({k for row in rows for k in row})
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: row.get(k, "") for k in keys})
    return buf.getvalue()


def _emit_rows(args, rows) -> int:
    fmt = args.format or "json"
    if fmt == "json":
        _emit(args, artifacts.dumps(rows))
    elif fmt == "csv":
        _emit(args, _rows_csv(rows))
    else:
        _emit(args, _rows_text(rows))
    return 0 if all(row["pass"] for row in rows) else 1


def _seed(args) -> tuple[int, int]:
    return (args.m, args.y)


def _require_r(args) -> Fraction:
    if args.r is None:
        raise UsageError("--r is required")
    return args.r


def _load_series(path: str) -> RatSeries:
    data = artifacts.series_from_json(artifacts.read_json(path))
    if not isinstance(data, RatSeries):
        raise UsageError("expected a rational series file")
    return data


def _input_series(args) -> RatSeries:
    if args.input:
        return _load_series(args.input)
    r = _require_r(args)
    log.info("generating %d terms of S_(%d,%d)(p, %s p)", args.order + 1, args.m, args.y, r)
    return specialize_series(_seed(args), r, args.order)


def _source(args):
    if args.input:
        series = _load_series(args.input)
        mods = []
        from .algebra.modular import prime_sequence

        for q in prime_sequence(60):
            try:
                mods.append(series.to_mod(q))
            except ZeroDivisionError:
                continue
        return fixed_source(mods)
    return physical_source(_seed(args), _require_r(args))


def _operator(args):
    if getattr(args, "ode", None):
        return artifacts.operator_from_json(artifacts.read_json(args.ode))
    r = _require_r(args)
    log.info("searching for the minimal operator at r = %s", r)
    op, report = find_ode(physical_source(_seed(args), r))
    if op is None:
        raise RuntimeError(f"no operator found ({report.status})")
    log.info("found order %d, theta-degree %d with %d primes", report.order, report.degree,
             len(report.primes))
    return op


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_series(args) -> int:
    t = time.time()
    s = mean_size_series(_seed(args), args.order)
    log.info("generated %d orders in %.1fs", args.order + 1, time.time() - t)
    _emit(args, artifacts.dumps(artifacts.series_to_json(s)))
    return 0


def cmd_specialize(args) -> int:
    r = _require_r(args)
    if args.prime:
        s = specialize_mod(_seed(args), r, args.order, args.prime)
    else:
        s = specialize_series(_seed(args), r, args.order)
    _emit(args, artifacts.dumps(artifacts.series_to_json(s)))
    return 0


def cmd_guess_rec(args) -> int:
    series = _input_series(args)
    rec = guess_precurrence(series, max_order=args.max_order, max_degree=args.max_degree)
    if rec is None:
        log.error("no recurrence of order <= %d and degree <= %d", args.max_order, args.max_degree)
        return 1
    if args.format == "text":
        _emit(args, str(rec) + "\n")
    else:
        _emit(args, artifacts.dumps({"order": rec.order, "degree": rec.degree, "start": rec.start,
                                     "coeffs": [artifacts.poly_to_json(c) for c in rec.coeffs]}))
    return 0


def _emit_operator(args, op, report) -> int:
    if op is None:
        log.error("no operator: %s", report.status)
        return 1
    if args.format == "text":
        _emit(args, str(op) + "\n")
    else:
        _emit(args, artifacts.dumps(artifacts.operator_to_json(op, report.verified_order, report.primes)))
    return 0


def cmd_guess_ode(args) -> int:
    op, report = find_ode(_source(args), max_order=args.max_order, rhs_degree=args.rhs_degree,
                          nprimes=args.primes)
    log.info("search grid: %s", report.grid)
    return _emit_operator(args, op, report)


def cmd_reconstruct(args) -> int:
    op, report = fit_ode(_source(args), args.k, args.d, args.rhs_degree, max_primes=args.max_primes)
    log.info("primes used: %d, unlucky: %s", len(report.primes), report.unlucky)
    return _emit_operator(args, op, report)


def _point_json(pt: SingularPoint) -> dict:
    z = complex(pt.approx) if pt.approx is not None else None
    return {
        "label": pt.label,
        "value": None if pt.value is None else str(pt.value),
        "minpoly": None if pt.minpoly is None else artifacts.poly_to_json(pt.minpoly),
        "re": None if z is None else z.real,
        "im": None if z is None else z.imag,
        "multiplicity": pt.multiplicity,
    }


def cmd_singularities(args) -> int:
    r = _require_r(args)
    pts = singular_points(r)
    near = nearest_to_origin(pts)
    if args.format == "text":
        lines = [str(pt) for pt in pts]
        lines += [f"nearest {k}: {v}" for k, v in sorted(near.items())]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, artifacts.dumps({"r": str(r), "points": [_point_json(p) for p in pts],
                                     "nearest": {k: _point_json(v) for k, v in near.items()}}))
    return 0


def _parse_points(text: str, r) -> list[SingularPoint]:
    if text in ("inf", "infinity"):
        return [SingularPoint.infinity()]
    if text == "P4":
        return points_of(quartic(r), "P4")
    try:
        return [SingularPoint.rational(exact_rational(text))]
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None


def _fmt_exponent(e) -> str:
    if isinstance(e, Fraction):
        return str(e)
    z = complex(e)
    if abs(z.imag) < 1e-9:
        x = z.real
        return str(int(round(x))) if abs(x - round(x)) < 1e-9 else f"{x:.9g}"
    return f"{z.real:.9g}{z.imag:+.9g}i"


def cmd_exponents(args) -> int:
    r = _require_r(args)
    pts = _parse_points(args.point, r)
    op = _operator(args)
    lines, rows = [], []
    for pt in pts:
        es = indicial_exponents(op, pt)
        vals = sorted(es.exponents, key=lambda z: (complex(z).real, complex(z).imag))
        text = ", ".join(_fmt_exponent(v) for v in vals)
        lines.append(text if len(pts) == 1 else f"{pt}: {text}")
        rows.append({"point": str(pt), "exact": es.exact, "exponents": [_fmt_exponent(v) for v in vals]})
    if args.format == "json":
        _emit(args, artifacts.dumps(rows))
    else:
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_pade(args) -> int:
    series = _input_series(args)
    scan = pade_scan(series, window=(args.lo, args.hi), step=args.step, degree=args.degree)
    for note in scan.notes:
        log.warning("%s", note)
    log.info("[%d/%d] real poles in window: %s", scan.L, scan.M, scan.real_poles)
    if args.format == "json":
        _emit(args, artifacts.dumps({"L": scan.L, "M": scan.M, "real_poles": scan.real_poles,
                                     "all_real_poles": scan.all_real_poles}))
    else:
        _emit(args, scan.to_csv())
    return 0


def cmd_estimate_gamma(args) -> int:
    if args.wet:
        series = closed_form("wet", 1, order=args.order)
    else:
        series = _input_series(args)
    try:
        est = critical_exponent_estimate(series, p_c=args.pc)
    except NoEstimate as exc:
        log.error("%s", exc)
        return 1
    data = {"gamma": est.gamma, "p_c": est.p_c, "spread": est.spread, "sizes": est.sizes}
    if args.format == "text":
        _emit(args, f"gamma = {est.gamma:.6f} +/- {est.spread:.6f} at p_c = {est.p_c:.6f}\n")
    else:
        _emit(args, artifacts.dumps(data))
    return 0


def cmd_verify(args) -> int:
    r = _require_r(args)
    if r == 2:
        raise UsageError("r = 2 has a third-order operator; the factorization does not apply")
    op = _operator(args)
    log.info("searching for the removal coefficient c_r")
    cr = cr_search(r, seed=_seed(args))
    if cr.c_r is None:
        log.error("no removal coefficient found")
        return 1
    log.info("c_r = %s (tabulated numerator multiplier %s, ratio %s)", cr.c_r, cr.tabulated, cr.ratio)
    rows = verify_factorization(r, args.order, op, seed=_seed(args), c_r=cr.c_r)
    return _emit_rows(args, rows)


def cmd_repro(args) -> int:
    target = args.target
    if target == "table2":
        return _emit_rows(args, repro.table2(args.r or 3))
    if target == "table3":
        return _emit_rows(args, repro.table3())
    if target == "fig2":
        scan, rows = repro.fig2()
        for row in rows:
            log.info("%s %s", "PASS" if row["pass"] else "FAIL", row["check"])
        _emit(args, scan.to_csv())
        return 0 if all(row["pass"] for row in rows) else 1
    rec, rows = repro.eq_recurrence()
    if rec is not None:
        log.info("recurrence: %s", rec)
    return _emit_rows(args, rows)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampwall", description=__doc__.splitlines()[0])
    ap.add_argument("-q", "--quiet", action="store_true", help="suppress progress messages")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, order=100, r=True):
        p.add_argument("--m", type=_positive, default=1, help="seed width")
        p.add_argument("--y", type=int, default=1, help="seed midpoint height")
        if r:
            p.add_argument("--r", type=exact_rational, help="p_w = r p, given as num/den")
        p.add_argument("--order", type=int, default=order, help="truncation order N")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv", "text"))

    p = sub.add_parser("series", help="bivariate series in p and p_w")
    common(p, order=20, r=False)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("specialize", help="series at p_w = r p")
    common(p)
    p.add_argument("--prime", type=int, help="reduce modulo this prime")
    p.set_defaults(func=cmd_specialize)

    p = sub.add_parser("guess-rec", help="guess a P-recurrence")
    common(p, order=49)
    p.add_argument("--in", dest="input", help="rational series JSON")
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--max-degree", type=int, default=3)
    p.set_defaults(func=cmd_guess_rec)

    p = sub.add_parser("guess-ode", help="minimal linear ODE by modular guessing")
    common(p)
    p.add_argument("--in", dest="input", help="rational series JSON")
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--rhs-degree", type=int)
    p.add_argument("--primes", type=_positive, default=2, help="primes used in the search")
    p.set_defaults(func=cmd_guess_ode)

    p = sub.add_parser("reconstruct", help="exact operator of a given shape")
    common(p)
    p.add_argument("--in", dest="input", help="rational series JSON")
    p.add_argument("--k", type=_positive, required=True, help="order")
    p.add_argument("--d", type=int, required=True, help="theta-form degree")
    p.add_argument("--rhs-degree", type=int)
    p.add_argument("--max-primes", type=_positive, default=12)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("singularities", help="singular points of the order-4 operator")
    common(p)
    p.set_defaults(func=cmd_singularities)

    p = sub.add_parser("exponents", help="local exponents at a point")
    common(p)
    p.add_argument("--point", required=True, help="num/den, P4 or infinity")
    p.add_argument("--ode", help="operator JSON (default: search at r)")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("pade", help="diagonal Padé scan (CSV)")
    common(p)
    p.add_argument("--in", dest="input", help="rational series JSON")
    p.add_argument("--degree", type=int, help="M for [M/M] (default order/2)")
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=0.49)
    p.add_argument("--step", type=float, default=0.001)
    p.set_defaults(func=cmd_pade)

    p = sub.add_parser("estimate-gamma", help="Dlog-Padé critical exponent")
    common(p)
    p.add_argument("--in", dest="input", help="rational series JSON")
    p.add_argument("--wet", action="store_true", help="use the wet-wall closed form")
    p.add_argument("--pc", type=exact_rational, default=Fraction(1, 2))
    p.set_defaults(func=cmd_estimate_gamma)

    p = sub.add_parser("verify-factorization", help="check L4 = L2.LS (+) LR")
    common(p, order=160)
    p.add_argument("--ode", help="operator JSON (default: search at r)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("repro", help="reproduce a published table, figure or recurrence")
    p.add_argument("target", choices=sorted(repro.BUNDLES))
    p.add_argument("--r", type=exact_rational, help="r for table2 (default 3)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.set_defaults(func=cmd_repro)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "order", 0) is not None and getattr(args, "order", 0) < 0:
        parser.print_usage(sys.stderr)
        print("dampwall: error: --order must be non-negative", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, InsufficientTermsError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"dampwall: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
