"""Command-line front end: ``suplab <command> ...`` (or ``python -m suplab``).

Every command writes its resolved configuration first: JSON output has the
shape ``{"config": {...}, "result": ...}``; CSV output starts with a
``# config: {...}`` comment line.  Floats carry 15 significant digits.
Exit status is 0 on success, 1 on domain errors and 2 on usage errors.
Points are given as ``--z x,y``; write ``--z=-0.3,0.9`` when x < 0.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amplifier import amp_lower, build_support, build_x, convolve_y
from .atkin_lehner import ReductionError, al_reduce, check_gap
from .catalog import LABELS, get_form, DEFAULT_M
from .census import count_split, census_table, parabolic_sum
from .pretrace import ONE_DIMENSIONAL, spectral_residual
from .qseries import (
    EtaQuotient, HeckeCheckError, QuadratureError, TruncationError, deligne_ok, eta_expand,
    hecke_check, lam, load_coeff_table, to_table,
)
from .supnorm import fit_exponent, scan_sup

CENSUS_COLUMNS = ["z.x", "z.y", "N", "l", "delta", "m_star", "m_upper", "m_parab", "total"]
SCAN_COLUMNS = ["label", "N", "k", "sup", "normalized_sup"]

DOMAIN_ERRORS = (ValueError, KeyError, ArithmeticError, TruncationError, QuadratureError,
                 ReductionError, HeckeCheckError, OSError)


class UsageError(Exception):
    pass


def fmt(v):
    """Round floats to 15 significant digits, recursively."""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if not math.isfinite(v) else float(f"{v:.15g}")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {str(k): fmt(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [fmt(x) for x in v]
    if isinstance(v, complex):
        return {"re": fmt(v.real), "im": fmt(v.imag)}
    return v


def _point(text: str) -> complex:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}")
    return complex(x, y)


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected nx,ny but got {text!r}")
    return a, b


def _config(args) -> dict:
    skip = {"func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, complex):
            v = [v.real, v.imag]
        out[k] = v
    return fmt(out)


def _emit_json(args, result, stream):
    doc = {"config": _config(args), "result": fmt(result)}
    stream.write(json.dumps(doc, sort_keys=True) + "\n")


def _emit_csv(args, columns, rows, stream):
    stream.write("# config: " + json.dumps(_config(args), sort_keys=True) + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _form(args, M=None):
    M = M or getattr(args, "trunc", None) or DEFAULT_M
    if getattr(args, "coeffs", None):
        return load_coeff_table(args.coeffs).truncate(M)
    if getattr(args, "eta", None):
        return eta_expand(EtaQuotient.parse(args.eta), M, getattr(args, "level", None))
    if getattr(args, "form", None):
        return get_form(args.form, M)
    raise UsageError("a form is required: use --form, --eta or --coeffs")


# ---------------------------------------------------------------------------
# commands


def cmd_reduce(args, out):
    rp = al_reduce(args.z, args.level)
    gap = check_gap(rp.z, args.level)
    _emit_json(args, {
        "reduced": [rp.z.x, rp.z.y],
        "word": [{"kind": m.kind, "r": m.r, "matrix": list(m.matrix.entries)} for m in rp.word],
        "im_ok": gap.im_ok, "min_norm": gap.min_norm, "norm_ok": gap.norm_ok,
    }, out)


def cmd_census(args, out):
    z = args.z
    if args.lmax:
        table = census_table(z, args.level, args.delta, args.lmax)
        rows = [[z.real, z.imag, args.level, l, args.delta, s.m_star, s.m_upper, s.m_parab, s.total]
                for l, s in sorted(table.items())]
    else:
        s = count_split(z, args.level, args.l, args.delta)
        rows = [[z.real, z.imag, args.level, args.l, args.delta, s.m_star, s.m_upper, s.m_parab, s.total]]
    _emit_csv(args, CENSUS_COLUMNS, rows, out)


def cmd_parabolic(args, out):
    ps = parabolic_sum(args.z, args.level, args.l, args.weight, args.tail_tol)
    _emit_json(args, {"value": ps.value, "tail_bound": ps.tail_bound}, out)


def cmd_amplify(args, out):
    f = _form(args)
    lam_f = lambda n: lam(f, n)
    support = build_support(args.L, args.level if args.level else f.N)
    amp = convolve_y(build_x(lam_f, support))
    res = amp.as_dict()
    res["amp_lower"] = amp_lower(lam_f, support)
    _emit_json(args, res, out)


def cmd_form(args, out):
    if args.action == "expand":
        if not args.eta:
            raise UsageError("form expand needs --eta")
        f = _form(args)
        _emit_json(args, to_table(f), out)
    elif args.action in ("import", "export"):
        if args.action == "import" and not args.coeffs:
            raise UsageError("form import needs --coeffs")
        f = _form(args)
        table = json.dumps(to_table(f), sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(table)
        _emit_json(args, {"level": f.N, "weight": f.k, "M": f.M, "out": args.out}, out)
    else:
        f = _form(args)
        rep = hecke_check(f).as_dict()
        rep["deligne_ok"] = deligne_ok(f)
        _emit_json(args, rep, out)


def cmd_pretrace(args, out):
    if args.form or args.coeffs:
        f = _form(args)
    else:
        matches = [lab for lab in LABELS if get_form(lab, 200).N == args.level
                   and get_form(lab, 200).k == args.weight]
        if (args.level, args.weight) not in ONE_DIMENSIONAL or not matches:
            raise ValueError(f"no one-dimensional catalogue space for N={args.level}, k={args.weight}")
        f = get_form(matches[0])
    chk = spectral_residual(f, args.z, args.delta_max, tol=args.tol)
    _emit_json(args, chk._asdict(), out)


def cmd_scan(args, out):
    f = _form(args)
    nx, ny = args.grid
    rep = scan_sup(f, nx, ny, args.refine)
    _emit_json(args, rep.as_dict(), out)


def cmd_scan_table(args, out):
    rows = []
    for lab in args.forms.split(","):
        f = get_form(lab.strip())
        r = scan_sup(f, *args.grid, refine=args.refine)
        rows.append([lab.strip(), r.N, r.k, r.sup_value, r.normalized_sup])
    _emit_csv(args, SCAN_COLUMNS, rows, out)


def read_scan_table(text: str) -> list[tuple[float, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    try:
        return [(float(r["N"]), float(r["normalized_sup"])) for r in reader]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"table needs N and normalized_sup columns: {exc}") from exc


def cmd_fit(args, out):
    text = sys.stdin.read() if args.table == "-" else Path(args.table).read_text()
    slope, intercept, resid = fit_exponent(read_scan_table(text))
    _emit_json(args, {"slope": slope, "intercept": intercept, "residuals": list(resid)}, out)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="suplab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker cap (computation is serial; recorded)")
    common.add_argument("--out", default=None,
                        help="output path (default stdout); for 'form' the coefficient table is written here")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def point(sp, flag="--z", required=True):
        sp.add_argument(flag, type=_point, required=required, help="point x,y")

    sp = add("reduce", help="reduce a point to the A_0(N) fundamental domain")
    point(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.set_defaults(func=cmd_reduce)

    sp = add("census", help="count G_l(N) matrices with |u| <= delta",
                        description="CSV columns: " + ",".join(CENSUS_COLUMNS))
    point(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--l", type=int, default=1)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--lmax", type=int, default=None, help="one row per l <= lmax instead of --l")
    sp.set_defaults(func=cmd_census)

    sp = add("parabolic", help="sum of |u|^-k over parabolic matrices")
    point(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--tail-tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_parabolic)

    def form_args(sp, trunc=DEFAULT_M):
        sp.add_argument("--form", choices=LABELS, default=None)
        sp.add_argument("--eta", default=None, help='eta quotient, e.g. "1:4,5:4"')
        sp.add_argument("--coeffs", default=None, help="JSON coefficient table")
        sp.add_argument("--trunc", type=int, default=trunc)

    sp = add("amplify", help="amplifier x/y tables as JSON")
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--L", type=float, required=True)
    form_args(sp)
    sp.set_defaults(func=cmd_amplify)

    sp = add("form", help="expand, import, export or check q-expansions")
    sp.add_argument("action", choices=["expand", "import", "export", "check"])
    sp.add_argument("--level", type=int, default=None)
    form_args(sp)
    sp.set_defaults(func=cmd_form)

    sp = add("pretrace-check", help="geometric vs spectral side, JSON {geometric, spectral, residual}")
    point(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--delta-max", type=float, default=40.0)
    sp.add_argument("--tol", type=float, default=1e-6, help="Petersson quadrature tolerance")
    form_args(sp)
    sp.set_defaults(func=cmd_pretrace)

    sp = add("scan", help="sup-norm scan, JSON ScanReport")
    form_args(sp)
    sp.add_argument("--grid", type=_pair, default=(64, 64))
    sp.add_argument("--refine", type=int, default=3)
    sp.set_defaults(func=cmd_scan)

    sp = add("scan-table", help="CSV " + ",".join(SCAN_COLUMNS) + " for catalogue forms",
                        description="CSV columns: " + ",".join(SCAN_COLUMNS))
    sp.add_argument("--forms", default="5.4.a,6.4.a,7.4.a")
    sp.add_argument("--grid", type=_pair, default=(64, 64))
    sp.add_argument("--refine", type=int, default=3)
    sp.set_defaults(func=cmd_scan_table)

    sp = add("fit", help="log-log slope of normalized_sup against N")
    sp.add_argument("--table", default="-", help="CSV from scan-table ('-' for stdin)")
    sp.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out_path = args.out if args.command not in ("form",) else None
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"suplab: error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"suplab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if out_path:
        Path(out_path).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


dispatch = main

if __name__ == "__main__":
    sys.exit(main())
