"""fractalzeta command line.

Targets are catalog names with optional parameters (``sphere_rfd:N=3``),
strings (``string:a_string:a=1``) or paths to JSON specs: a list of
ratios gives a Moran polynomial, ratios plus generators give a spray and
an object with a ``kind`` gives a fractal string.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from functools import partial
from typing import Optional

import numpy as np

from . import acceptance as ac
from . import errors
from . import expr as ex
from . import measure as ms
from . import moran as mo
from . import spectral as sc
from . import spray as sp
from . import strings as st
from . import tube as tb
from .moran import Window
from .parallel import ENV_WORKERS, pmap, worker_count

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- formatting -------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(f"{obj.real:.17g}"), float(f"{obj.imag:.17g}")]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.17g}") if math.isfinite(v) else str(v)
    return obj


def dump_json(obj, out):
    json.dump(jsonify(obj), out, indent=2, sort_keys=True)
    out.write("\n")


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot read {text!r} as a complex number") from exc


def _num(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _params(text: str) -> dict:
    out = {}
    for part in filter(None, text.split(",")):
        if "=" not in part:
            raise UsageError(f"parameter {part!r} must look like key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = _num(v.strip())
    return out


# -- targets ----------------------------------------------------------------------

def load_target(spec: str):
    """(kind, object) with kind in catalog | string | poly | spray."""
    if os.path.isfile(spec):
        with open(spec) as fh:
            obj = json.load(fh)
        if isinstance(obj, dict) and "generators" in obj:
            return "spray", sp.SelfSimilarSpray.from_json(obj)
        if isinstance(obj, dict) and "kind" in obj:
            return "string", st.from_json(obj)
        ratios = obj["ratios"] if isinstance(obj, dict) else obj
        return "poly", mo.DirichletPolynomial.from_ratios(ratios)
    if spec.startswith("string:"):
        _, kind, *rest = spec.split(":", 2) + [""]
        return "string", st.make_string(kind, **_params(rest[0] if rest else ""))
    name, _, rest = spec.partition(":")
    if name not in sp.catalog_names():
        raise UsageError(f"unknown target {spec!r}; catalog: {', '.join(sp.catalog_names())}")
    return "catalog", sp.catalog_get(name, **_params(rest))


def _window(vals: Optional[list], default: Window) -> Window:
    if vals is None:
        return default
    return Window(*map(float, vals))


def _eps_grid(args, lo_default, hi_default):
    if args.eps:
        return [float(e) for e in args.eps]
    lo, hi, n = (args.eps_grid or [lo_default, hi_default, 60])
    return list(np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(n)))


# -- subcommands ------------------------------------------------------------------

def cmd_catalog(args, out):
    if args.name:
        kind, e = load_target(args.name)
        if kind != "catalog":
            raise UsageError("catalog shows catalog entries only")
        dump_json(e.to_json(), out)
        return EXIT_OK
    rows = []
    for n in sp.catalog_names():
        e = sp.catalog_get(n)
        rows.append((n, e.N, e.D, e.form, e.zeta is not None, e.conjectural))
    write_csv(rows, ["name", "N", "D", "form", "closed_form", "conjectural"], out)
    return EXIT_OK


def _zeta_value(kind, obj, z):
    if kind == "riemann":
        return sc.riemann_zeta(z)
    if kind == "catalog":
        if obj.zeta is None:
            raise UsageError(f"{obj.name} has no closed form")
        return complex(ex.evaluate(obj.zeta, z))
    if kind == "spray":
        return complex(ex.evaluate(sp.spray_zeta(obj), z))
    if kind == "poly":
        return complex(obj(np.asarray(z)))
    form = st.geometric_zeta(obj)
    if form.is_closed:  # the continuation reaches left of the abscissa
        return complex(ex.evaluate(form.closed, z))
    return complex(st.zeta_partial(obj, z).value)


def cmd_zeta(args, out):
    kind, obj = ("riemann", None) if args.target == "riemann" else load_target(args.target)
    rows = []
    for text in args.s:
        z = parse_complex(text)
        v = _zeta_value(kind, obj, z)
        rows.append((z.real, z.imag, v.real, v.imag))
    write_csv(rows, ["s_re", "s_im", "value_re", "value_im"], out)
    return EXIT_OK


def cmd_dims(args, out):
    kind, obj = load_target(args.target)
    if kind == "poly":
        win = _window(args.window, mo.default_window(obj))
        rs = mo.find_roots(obj, win) if win.size > 0 else mo.RootSet(win, [], 0)
        dump_json(rs.to_json(), out)
        return EXIT_OK
    if kind == "string":
        form = st.geometric_zeta(obj)
        if not form.is_closed:
            raise UsageError("this string has no closed-form zeta to take a divisor of")
        zeta = form.closed
        default = Window(-1.0, 1.0, -50.0, 50.0)
    elif kind == "spray":
        zeta = sp.spray_zeta(obj)
        default = mo.default_window(obj.poly)
    else:
        zeta = obj.zeta
        default = obj.default_window()
    win = _window(args.window, default)
    if win.size <= 0:
        d = sp.Divisor((), win)
    elif args.stated and kind == "catalog":
        d = obj.divisor(win)
    elif zeta is None:
        d = obj.divisor(win)
    else:
        d = sp.divisor_of(zeta, win, zeros=not args.poles_only)
    dump_json(d.to_json(), out)
    return EXIT_OK


def _series_for(kind, obj, K):
    if kind == "catalog":
        return tb.catalog_series(obj, K=K)
    if kind == "string" and obj.kind in ("cantor", "generalized_cantor"):
        return tb.catalog_series(sp.catalog_get("cantor_string"), K=K) if float(obj.params["a"]) == 1 / 3 \
            else _generic_string_series(obj, K)
    raise UsageError("tube series need a catalog entry or a Cantor-type string")


def _generic_string_series(obj, K):
    form = st.geometric_zeta(obj)
    a = float(obj.params["a"])
    D = math.log(2) / math.log(1 / a)
    p = 2 * math.pi / math.log(1 / a)
    win = Window(-0.5, 1.0, -(K + 0.5) * p, (K + 0.5) * p)
    d = sp.divisor_from_parts((), (sp.Line(D, p),), win)
    return tb.series_from_divisor(form.closed, d, 1, "string", eps_max=(1 - 2 * a) / 2, K=K)


def _eval_row(series, e):
    v, tail = tb.eval_series(series, e)
    return (e, v, tail)


def cmd_tube_predict(args, out):
    kind, obj = load_target(args.target)
    ser = _series_for(kind, obj, args.K)
    hi = ser.eps_max or 0.1
    eps = _eps_grid(args, hi * 1e-4, hi)
    rows = pmap(partial(_eval_row, ser), eps, workers=args.workers)
    write_csv(rows, ["epsilon", "V_formula", "tail_bound"], out)
    return EXIT_OK


RASTER_EPS_HI = {"gasket": 1 / (4 * math.sqrt(3)), "carpet": 1 / 12, "cantor_graph_rfd": 0.1,
                 "square_boundary": 0.25, "circle": 0.5}


def cmd_tube_measure(args, out):
    if args.spec not in ms.DEFAULT_BOX:
        raise UsageError(f"unknown raster spec {args.spec!r}; known: {', '.join(ms.DEFAULT_BOX)}")
    box = ms.DEFAULT_BOX[args.spec]
    lo = 3 * box[2] / (args.resolution // 2) * 1.01
    eps = _eps_grid(args, lo, RASTER_EPS_HI[args.spec])
    m = ms.measure_tube(args.spec, args.depth, args.resolution, eps, relative_to_omega=args.relative)
    write_csv(m.to_rows(), ["epsilon", "volume", "err"], out)
    return EXIT_OK


def _reference(kind, obj, args, eps):
    """Reference tube volumes and their provenance."""
    if kind == "string":
        return [st.tube_exact(obj, e) for e in eps], "exact"
    name = obj.name
    if name in ("cantor_string", "cantor_string_rfd"):
        cs = st.make_string("cantor")
        return [st.tube_exact(cs, e) for e in eps], "exact"
    if name == "sphere_rfd" and obj.N == 2:
        return [math.pi - math.pi * (1 - e) ** 2 for e in eps], "analytic"
    if name == "sphere":
        N, th = obj.N, math.pi ** (obj.N / 2) / math.gamma(obj.N / 2 + 1)
        return [th * ((1 + e) ** N - max(1 - e, 0.0) ** N) for e in eps], "analytic"
    if name == "unit_interval":
        return [1 + 2 * e for e in eps], "analytic"
    if name == "cantor_graph_rfd":
        return [ms.cantor_graph_tube_exact(e) for e in eps], "exact"
    if name in ("gasket", "carpet"):
        m = ms.measure_tube(name, args.depth, args.resolution, eps)
        return list(m.V), f"raster {args.resolution} depth {args.depth}"
    raise UsageError(f"no reference tube for {name}")


def cmd_tube_compare(args, out):
    kind, obj = load_target(args.target)
    ser = _series_for(kind, obj, args.K)
    hi = ser.eps_max or 0.1
    eps = _eps_grid(args, hi * 1e-3, hi)
    ref, how = _reference(kind, obj, args, eps)
    pred = [r[1] for r in pmap(partial(_eval_row, ser), eps, workers=args.workers)]
    rows = [(e, p, r, abs(p - r) / abs(r)) for e, p, r in zip(eps, pred, ref)]
    write_csv(rows, ["epsilon", "V_formula", "V_reference", "rel_err"], out)
    worst = max(r[3] for r in rows)
    print(f"reference: {how}; max relative error {worst:.3e}", file=sys.stderr)
    if args.tol is not None and worst > args.tol:
        return EXIT_FAIL
    return EXIT_OK


def cmd_classify(args, out):
    kind, obj = load_target(args.target)
    if kind == "string" and obj.kind == "a_string":
        v = ac.astring_verdict(float(obj.params["a"]))
    elif kind == "catalog":
        if obj.conjectural:
            raise UsageError(f"{obj.name} has only a conjectural divisor")
        win = _window(args.window, obj.default_window())
        v = tb.measurability(obj.divisor(win), obj.D, obj.zeta, obj.N, obj.form)
    else:
        raise UsageError("classify needs a catalog entry or an a-string")
    dump_json(v.to_json(), out)
    return EXIT_OK


def _spectral_row(string, x):
    n = sc.frequency_count(string, x)
    return x, n


def cmd_spectral(args, out):
    kind, obj = load_target(args.target)
    if kind != "string":
        raise UsageError("spectral needs a string target such as string:a_string:a=1")
    if args.x:
        xs = [float(x) for x in args.x]
    else:
        lo, hi, n = args.x_grid or [1e2, 1e6, 40]
        xs = list(np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(n)))
    D = args.D
    if D is None:
        if obj.kind == "a_string":
            D = 1 / (float(obj.params["a"]) + 1)
        elif obj.kind in ("cantor", "generalized_cantor"):
            D = math.log(2) / math.log(1 / float(obj.params["a"]))
        elif obj.kind == "lapma":
            D = float(obj.params["D"])
        else:
            raise UsageError("give --D for this string")
    counts = pmap(partial(_spectral_row, obj), xs, workers=args.workers)
    rows = []
    for x, n in counts:
        w = sc.weyl_term(obj, x)
        rows.append((x, n, w, (w - n) / x ** D))
    write_csv(rows, ["x", "N_nu", "W", "ratio"], out)
    return EXIT_OK


def cmd_divisor_sum(args, out):
    divs = []
    for t in (args.a, args.b):
        kind, obj = load_target(t)
        if kind != "catalog":
            raise UsageError("divisor-sum takes catalog entries")
        divs.append(obj)
    a, b = divs
    win = _window(args.window, None) if args.window else None
    p = a.period or b.period or 10.0
    src = Window(-1.0, max(a.N, b.N), -(args.periods + 1) * p, (args.periods + 1) * p)
    if win is None:
        win = Window(-1.0, float(a.N + b.N), -args.periods * p, args.periods * p)
    total = sp.minkowski_sum(a.divisor(src), b.divisor(src), win)
    res = {"sum": total.to_json()}
    if args.compare:
        kind, obj = load_target(args.compare)
        res["comparison"] = sp.product_conjecture_check(a.divisor(src), b.divisor(src),
                                                        obj.divisor(win), win)
    dump_json(res, out)
    return EXIT_OK


def cmd_report(args, out):
    ids = None
    if args.only:
        try:
            ids = [int(x) for x in args.only.split(",") if x]
        except ValueError as exc:
            raise UsageError("--only takes comma separated criterion numbers") from exc
        known = {c for c, *_ in ac.CRITERIA}
        if not set(ids) <= known:
            raise UsageError(f"unknown criteria {sorted(set(ids) - known)}")
    results = ac.run_all(ids, workers=args.workers)
    for r in results:
        print(r.line(), file=out)
    failed = [r.cid for r in results if not r.passed]
    if failed:
        print("failed criteria: " + ",".join(map(str, failed)), file=out)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "report.json"), "w") as fh:
            dump_json({"criteria": [r.to_json() for r in results], "failed": failed}, fh)
        with open(os.path.join(args.out_dir, "report.csv"), "w") as fh:
            rows = [(r.cid, i.name, i.error, i.tol, i.passed) for r in results for i in r.items]
            write_csv(rows, ["criterion", "item", "error", "tol", "passed"], fh)
    return EXIT_FAIL if failed else EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fractalzeta",
                                description="Complex dimensions, zeta functions and tube formulas "
                                            "of fractal strings and sets.")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${ENV_WORKERS} or 1)")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list catalog entries or show one as JSON")
    c.add_argument("name", nargs="?")
    c.set_defaults(fn=cmd_catalog)

    c = sub.add_parser("zeta", help="evaluate a zeta function (or 'riemann') at points")
    c.add_argument("target")
    c.add_argument("s", nargs="+", help="points such as 2.5 or 1.8+0.7j")
    c.set_defaults(fn=cmd_zeta)

    def window_opt(c):
        c.add_argument("--window", nargs=4, metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"))

    c = sub.add_parser("dims", help="divisor (complex dimensions) in a window as JSON")
    c.add_argument("target")
    window_opt(c)
    c.add_argument("--stated", action="store_true", help="use the catalog's stated divisor")
    c.add_argument("--poles-only", action="store_true")
    c.set_defaults(fn=cmd_dims)

    def eps_opts(c):
        c.add_argument("--eps", nargs="+", help="explicit epsilon values")
        c.add_argument("--eps-grid", nargs=3, metavar=("LO", "HI", "N"), help="log-spaced grid")

    c = sub.add_parser("tube-predict", help="tube formula values as CSV")
    c.add_argument("target")
    c.add_argument("--K", type=int, default=tb.DEFAULT_K)
    eps_opts(c)
    c.set_defaults(fn=cmd_tube_predict)

    def raster_opts(c):
        c.add_argument("--depth", type=int, default=10)
        c.add_argument("--resolution", type=int, default=4096, help="cells per box side")

    c = sub.add_parser("tube-measure", help="raster tube volumes as CSV")
    c.add_argument("spec", help=", ".join(ms.DEFAULT_BOX))
    raster_opts(c)
    c.add_argument("--relative", action="store_true", help="measure inside Omega only")
    eps_opts(c)
    c.set_defaults(fn=cmd_tube_measure)

    c = sub.add_parser("tube-compare", help="tube formula against a reference, as CSV")
    c.add_argument("target")
    c.add_argument("--K", type=int, default=tb.DEFAULT_K)
    c.add_argument("--tol", type=float, help="exit 1 if the max relative error exceeds this")
    raster_opts(c)
    eps_opts(c)
    c.set_defaults(fn=cmd_tube_compare)

    c = sub.add_parser("classify", help="measurability and fractality verdict as JSON")
    c.add_argument("target")
    window_opt(c)
    c.set_defaults(fn=cmd_classify)

    c = sub.add_parser("spectral", help="frequency counts and the second-term ratio as CSV")
    c.add_argument("target")
    c.add_argument("--x", nargs="+")
    c.add_argument("--x-grid", nargs=3, metavar=("LO", "HI", "N"))
    c.add_argument("--D", type=float)
    c.set_defaults(fn=cmd_spectral)

    c = sub.add_parser("divisor-sum", help="Minkowski sum of two catalog divisors as JSON")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--periods", type=float, default=5.0)
    c.add_argument("--compare", help="catalog entry whose stated divisor is compared")
    window_opt(c)
    c.set_defaults(fn=cmd_divisor_sum)

    c = sub.add_parser("report", help="run the acceptance criteria")
    c.add_argument("--only", help="comma separated criterion numbers")
    c.add_argument("--out-dir", help="write report.json and report.csv here")
    c.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        args.workers = worker_count(args.workers)
    except ValueError as exc:
        print(f"fractalzeta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    buf = io.StringIO()
    try:
        code = args.fn(args, buf)
    except (UsageError, KeyError, ValueError, errors.FractalZetaError) as exc:
        # every library error here comes from the request (a pole, a bad window, ...)
        msg = exc.args[0] if exc.args else exc
        tag = f"{type(exc).__name__}: " if isinstance(exc, errors.FractalZetaError) else ""
        print(f"fractalzeta: {tag}{msg}", file=sys.stderr)
        return EXIT_USAGE
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
