"""The fourteen reproduction criteria as callable checks.

Each check returns a Result whose items hold the individual comparisons.
Both the `report` subcommand and the acceptance tests run these.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import expr as ex
from . import measure as ms
from . import moran as mo
from . import spectral as sc
from . import spray as sp
from . import strings as st
from . import tube as tb
from .moran import Window
from .parallel import pmap

LOG2, LOG3 = math.log(2), math.log(3)


@dataclass
class Item:
    name: str
    value: object
    target: object
    error: float
    tol: float
    passed: bool

    def to_json(self):
        def j(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        return {"name": self.name, "value": j(self.value), "target": j(self.target),
                "error": float(self.error), "tol": self.tol, "passed": bool(self.passed)}


@dataclass
class Result:
    cid: int
    title: str
    items: list = field(default_factory=list)
    seconds: float = 0.0
    budget: float | None = None

    @property
    def passed(self) -> bool:
        ok = all(i.passed for i in self.items)
        return ok and (self.budget is None or self.seconds < self.budget)

    def add(self, name, value, target, tol, rel=False, error=None):
        if error is None:
            err = abs(complex(value) - complex(target))
            if rel:
                err /= abs(complex(target))
        else:
            err = error
        self.items.append(Item(name, value, target, float(err), tol, bool(err <= tol)))

    def check(self, name, ok, value=None, target=None):
        self.items.append(Item(name, value, target, 0.0 if ok else 1.0, 0.0, bool(ok)))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bad = [i.name for i in self.items if not i.passed]
        extra = f" (failed: {', '.join(bad)})" if bad else ""
        if self.budget is not None and self.seconds >= self.budget:
            extra += f" (over time budget {self.budget}s)"
        return f"criterion {self.cid:2d} {status} {self.title} [{self.seconds:.2f}s]{extra}"

    def to_json(self):
        return {"id": self.cid, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget,
                "items": [i.to_json() for i in self.items]}


def _timed(fn, cid, title, budget=None):
    r = Result(cid, title, budget=budget)
    t0 = time.perf_counter()
    fn(r)
    r.seconds = time.perf_counter() - t0
    return r


# -- 1, 2: Cantor string ------------------------------------------------------

def _c1(r: Result):
    cs = st.make_string("cantor")
    ser = tb.catalog_series(sp.catalog_get("cantor_string"), K=200)
    worst = 0.0
    for e in np.logspace(-5, math.log10(1 / 6), 200):
        e = min(float(e), 1 / 6)
        v = tb.eval_series(ser, e)[0]
        ref = st.tube_exact(cs, e)
        worst = max(worst, abs(v - ref) / ref)
    r.add("max relative error, K=200", worst, 0.0, 1e-4, error=worst)


def _c2(r: Result):
    cs = st.make_string("cantor")
    D = LOG2 / LOG3
    lo, hi = ms.contents(lambda e: st.tube_exact(cs, e), D, 1)
    r.add("lower content", lo, 2.4950, 1e-3)
    r.add("upper content", hi, 2.5830, 1e-3)


# -- 3, 4: Moran equations ----------------------------------------------------

def _c3(r: Result):
    poly = mo.DirichletPolynomial.from_ratios([Fraction(1, 3), Fraction(1, 3)])
    p = 2 * math.pi / LOG3
    win = Window(0.0, 1.0, -40 * math.pi / LOG3, 40 * math.pi / LOG3)
    rs = mo.find_roots(poly, win)
    r.add("root count", len(rs.roots), 41, 0)
    r.add("winding count", rs.certified_count, 41, 0)
    r.check("all simple", all(m == 1 for _, m in rs.roots))
    D = LOG2 / LOG3
    worst = max(min(abs(w - complex(D, k * p)) for k in range(-20, 21)) for w, _ in rs.roots)
    r.add("max distance to D + ikp", worst, 0.0, 1e-10, error=worst)


def brute_bisection(f, lo, hi, iters=200):
    """Plain bisection on a sign change, kept apart from the library solver."""
    flo = f(lo)
    for _ in range(iters):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0 or mid in (lo, hi):
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def _c4(r: Result):
    poly = mo.DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    b = mo.real_dimension(poly, "bisection")
    n = mo.real_dimension(poly, "newton")
    oracle = brute_bisection(lambda x: 2.0 ** -x + 3.0 ** -x - 1.0, 0.0, 1.0)
    r.add("bisection vs Newton", b, n, 1e-12)
    r.add("vs brute-force oracle", n, oracle, 1e-10)


# -- 5, 6: residues -----------------------------------------------------------

RESIDUE_TARGETS = (("gasket", {}), ("carpet", {}), ("carpet3d", {}), ("cantor_graph_rfd", {}),
                   ("half_square", {}), ("sphere_rfd", {"N": 2}), ("sphere_rfd", {"N": 3}))


def residue_errors(name, params):
    """[(pole, computed, stored, relative error)] for one catalog entry."""
    e = sp.catalog_get(name, **params)
    out = []
    for w, stored, label in e.residue_table(kmax=5):
        got = ex.residue(e.zeta, complex(w))
        stored = complex(stored)
        err = abs(got - stored) / abs(stored) if stored != 0 else abs(got)
        out.append((complex(w), got, stored, err))
    return out


def _c5(r: Result):
    for name, params in RESIDUE_TARGETS:
        rows = residue_errors(name, params)
        worst = max(err for *_, err in rows)
        tag = name + "".join(f" {k}={v}" for k, v in params.items())
        r.add(f"{tag} ({len(rows)} residues)", worst, 0.0, 1e-10, error=worst)


def _c6(r: Result):
    e = sp.catalog_get("half_square")
    cm2, cm1 = ex.laurent_coeffs(e.zeta, ex.ContourSpec(1.0, 0.1), -2, -1)
    r.add("c_-2", cm2, 1 / (4 * LOG2), 1e-9)
    r.add("c_-1", cm1, (29 * LOG2 - 2) / (8 * LOG2), 1e-9)


# -- 7: sprays ----------------------------------------------------------------

def carpet_spray():
    return sp.SelfSimilarSpray((Fraction(1, 3),) * 8, (sp.MonophaseGenerator.square(1 / 3),), 2)


def gasket_spray():
    return sp.SelfSimilarSpray((Fraction(1, 2),) * 3, (sp.MonophaseGenerator.triangle(0.5),), 2)


def _c7(r: Result):
    rng = np.random.default_rng(7)
    pts = rng.uniform(2.0, 3.0, 10) + 1j * rng.uniform(-20, 20, 10)
    for name, spray in (("carpet", carpet_spray()), ("gasket", gasket_spray())):
        ref = sp.catalog_get(name).extra["first_term"]
        z = sp.spray_zeta(spray)
        worst = max(abs(ex.evaluate(z, w) - ex.evaluate(ref, w)) / abs(ex.evaluate(ref, w)) for w in pts)
        r.add(f"{name} spray vs closed form", worst, 0.0, 1e-12, error=worst)
        fe = max(sp.functional_equation_residual(spray, w) for w in pts)
        r.add(f"{name} functional equation", fe, 0.0, 1e-12, error=fe)


# -- 8: quadrature ------------------------------------------------------------

def _power_integral(z: complex, a: float, b: float, extra=None) -> complex:
    """int_a^b t**(z-1) * extra(t) dt with the algebraic endpoint weight at 0."""
    sig, tau = z.real, z.imag
    f = extra or (lambda t: 1.0)
    kw = dict(weight="alg", wvar=(sig - 1, 0.0), epsabs=0, epsrel=1e-12, limit=400)
    re = integrate.quad(lambda t: math.cos(tau * math.log(t)) * f(t) if t > 0 else 0.0, a, b, **kw)[0]
    if tau == 0:
        return complex(re, 0.0)
    im = integrate.quad(lambda t: math.sin(tau * math.log(t)) * f(t) if t > 0 else 0.0, a, b, **kw)[0]
    return complex(re, im)


def interval_zeta_quadrature(z: complex, ell: float) -> complex:
    """zeta of (ends of I, I) = int_I d(x, ends)**(s-1) dx = 2 int_0^{l/2} t**(s-1) dt."""
    return 2 * _power_integral(z, 0.0, ell / 2)


def disk_rfd_quadrature(z: complex) -> complex:
    """int_B d(x, circle)**(s-2) dx = 2 pi int_0^1 t**(s-2) (1-t) dt."""
    return 2 * math.pi * _power_integral(z - 1, 0.0, 1.0, lambda t: 1 - t)


def sphere1_tube_quadrature(z: complex, delta: float) -> complex:
    """int_0^delta t**(s-2) V(t) dt with V(t) = 4t for the two-point sphere in R."""
    return 4 * _power_integral(z, 0.0, delta)


def gasket_raster_zeta(zs, delta=0.2, resolution=4096, depth=10):
    D = LOG3 / LOG2
    box = (-0.25, -0.25, 1.5)
    eps = np.logspace(math.log10(3 * box[2] / (resolution // 2) * 1.01), math.log10(delta), 600)
    m = ms.measure_tube("gasket", depth, resolution, eps, box=box)
    return [ms.zeta_from_tube(m.eps, m.V, complex(z), 2, D, delta) for z in zs]


def _c8(r: Result):
    for z, ell in ((1.5 + 2j, 1.3), (0.7 + 0j, 1.0), (2.5 - 4j, 0.4)):
        got = interval_zeta_quadrature(z, ell)
        ref = 2 ** (1 - z) * ell ** z / z
        r.add(f"(i) interval l={ell} s={z}", got, ref, 1e-10, rel=True)
    disk = sp.catalog_get("sphere_rfd", N=2).zeta
    for z in (1.5 + 0j, 2.3 + 3j, 1.2 - 1j):
        r.add(f"(ii) disk s={z}", disk_rfd_quadrature(z), ex.evaluate(disk, z), 1e-10, rel=True)
    for z, delta in ((0.5 + 1j, 0.5), (2.0 + 0j, 0.3)):
        ref = ex.evaluate(sp.catalog_get("sphere", N=1, delta=delta).zeta, z)
        r.add(f"(iii) sphere N=1 delta={delta} s={z}", sphere1_tube_quadrature(z, delta), ref, 1e-10,
              rel=True)
    zs = (2.0, 1.8 + 0.7j)
    ref_e = sp.catalog_get("gasket", delta=0.2)
    for z, got in zip(zs, gasket_raster_zeta(zs)):
        r.add(f"(iv) gasket raster s={z}", got, ex.evaluate(ref_e.zeta, z), 1e-2, rel=True)


# -- 9: gasket raster -----------------------------------------------------------

def _c9(r: Result):
    eps = [0.02, 0.05, 0.1]
    ser = tb.catalog_series(sp.catalog_get("gasket"), K=100)
    m = ms.measure_tube("gasket", 10, 4096, eps)
    for e, v in zip(m.eps, m.V):
        r.add(f"eps={e}", tb.eval_series(ser, float(e))[0], v, 0.02, rel=True)


# -- 10: Minkowski sums -----------------------------------------------------------

def _c10(r: Result):
    C = sp.catalog_get("cantor_string_rfd")
    I = sp.catalog_get("unit_interval")
    for other, target in ((I, "cantor_grill"), (C, "cantor_dust")):
        t = sp.catalog_get(target)
        p = t.period
        win = Window(-1.0, 2.0, -5 * p, 5 * p)
        got = sp.minkowski_sum(C.divisor(Window(-1.0, 1.0, -6 * p, 6 * p)),
                               other.divisor(Window(-1.0, 1.0, -6 * p, 6 * p)), win)
        stated = t.divisor(win)
        r.check(f"sum vs {target} ({len(stated)} points)", got.same_as(stated), len(got), len(stated))


# -- 11: average content -----------------------------------------------------------

def _c11(r: Result):
    D = LOG2 / LOG3
    cs = st.make_string("cantor")
    v = ms.average_content(lambda e: st.tube_exact(cs, e), D, 1, period=LOG3)
    r.add("Cantor string", v, 2 ** (1 - D) / (D * (1 - D)) / (2 * LOG3), 1e-3)
    a = st.make_string("a_string", a=1)
    v = ms.average_content(lambda e: st.tube_exact(a, e), 0.5, 1)
    r.add("a-string(1)", v, 2 * math.sqrt(2), 1e-2)


# -- 12: spectral second term -----------------------------------------------------------

def _c12(r: Result):
    a = st.make_string("a_string", a=1)
    target = 0.5 * 2 ** -0.5 * -sc.riemann_zeta(0.5).real * 2 * math.sqrt(2)
    chk = sc.second_term_check(a, [1e6, 1e7, 1e8], D=0.5, content=2 * math.sqrt(2))
    for x, _, _, ratio, _ in chk.rows:
        r.add(f"x={x:.0e}", ratio, target, 0.05, rel=True)


# -- 13: classification -----------------------------------------------------------

def astring_verdict(a: float = 1.0) -> tb.Verdict:
    D = 1 / (a + 1)
    res = st.rfd_residue(D * a ** D, D)
    div = sp.Divisor(((complex(D), -1), (0j, -1)), Window(-1.0, 1.0, -20.0, 20.0))
    return tb.measurability(div, D, N=1, residue_at_D=res)


def _c13(r: Result):
    g = tb.classify_entry(sp.catalog_get("gasket"))
    r.check("gasket not measurable", g.measurable == "no", g.measurable, "no")
    r.check("gasket critically fractal", g.fractal and g.critical)
    c = tb.classify_entry(sp.catalog_get("cantor_graph_rfd"))
    r.check("Cantor graph measurable", c.measurable == "yes", c.measurable, "yes")
    r.add("Cantor graph content", c.content, 2.0, 1e-10)
    r.check("Cantor graph subcritical at log_3 2",
            c.subcritical and any(abs(d - LOG2 / LOG3) < 1e-9 for d in c.fractal_dims))
    h = tb.classify_entry(sp.catalog_get("half_square"))
    r.check("half square degenerate", h.measurable == "degenerate", h.measurable, "degenerate")
    r.add("half square h-content", h.h_content, 1 / (4 * LOG2), 1e-9)
    for N in (2, 3):
        v = tb.classify_entry(sp.catalog_get("sphere_rfd", N=N))
        th = math.pi ** (N / 2) / math.gamma(N / 2 + 1)
        r.check(f"sphere RFD N={N} measurable", v.measurable == "yes", v.measurable, "yes")
        r.add(f"sphere RFD N={N} content", v.content, N * th, 1e-10)
        r.check(f"sphere RFD N={N} not fractal", not v.fractal)
    a = astring_verdict(1.0)
    r.check("a-string measurable", a.measurable == "yes", a.measurable, "yes")
    r.add("a-string content", a.content, 2 * math.sqrt(2), 1e-12)


# -- 14: property suites -----------------------------------------------------------

def _square(x):
    return x * x


def _c14(r: Result):
    names = [n for n in sp.catalog_names() if n not in ("n_gasket", "n_carpet")]
    r.check("catalog divisors closed under conjugation",
            all(sp.catalog_get(n).divisor().conjugation_closed() for n in names))
    worst_im, worst_pair = 0.0, 0.0
    for n in ("cantor_string", "gasket", "carpet", "cantor_graph_rfd", "half_square"):
        ser = tb.catalog_series(sp.catalog_get(n), K=20)
        for e in (1e-4, 1e-3, 1e-2):
            if ser.eps_max and e > ser.eps_max:
                continue
            cv = tb.eval_series_complex(ser, e)
            v = tb.eval_series(ser, e)[0]
            worst_im = max(worst_im, abs(cv.imag) / max(abs(cv), 1e-300))
            worst_pair = max(worst_pair, abs(cv.real - v) / max(abs(v), 1e-300))
    r.add("series imaginary part (relative)", worst_im, 0.0, 1e-10, error=worst_im)
    r.add("paired vs unpaired real part", worst_pair, 0.0, 1e-10, error=worst_pair)
    cs = st.make_string("cantor")
    eps = np.logspace(-6, 1, 300)
    tube = ms.EmpiricalTube(eps, np.array([st.tube_exact(cs, e) for e in eps]), np.zeros(300))
    r.check("Cantor tube monotone with ceiling 1", ms.check_tube(tube, 1.0))
    ras = ms.rasterize("square_boundary", 1, 256)
    rt = ms.tube_volume(ras, np.linspace(0.02, 0.6, 40), relative_to_omega=True)
    r.check("raster tube monotone with ceiling |Omega|", ms.check_tube(rt, 1.0))
    poly = mo.DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    big = Window(-1.3, 1.1, -30.0, 30.0)
    top, bottom = Window(-1.3, 1.1, 0.37, 30.0), Window(-1.3, 1.1, -30.0, 0.37)
    n_all = mo.winding_count(poly, big)
    r.add("winding additivity", mo.winding_count(poly, top) + mo.winding_count(poly, bottom), n_all, 0)
    g = sp.catalog_get("gasket")
    worst = 0.0
    for w in [complex(g.D, k * 2 * math.pi / LOG2) for k in range(-3, 4)] + [0j]:
        a = ex.residue(g.zeta, w)
        b = _contour_residue(g.zeta, w)
        worst = max(worst, abs(a - b) / abs(a))
    r.add("residue vs contour (gasket)", worst, 0.0, 1e-9, error=worst)
    xs = list(range(1, 41))
    one = pmap(_square, xs, workers=1)
    two = pmap(_square, xs, workers=2)
    r.check("worker count does not change results", one == two)


def _contour_residue(e, w, radius=1e-2):
    return ex.laurent_coeffs(e, ex.ContourSpec(w, radius), -1, -1)[0]


CRITERIA = (
    (1, "Cantor string exact tube formula", _c1, 1.0),
    (2, "Cantor string lower and upper contents", _c2, 1.0),
    (3, "Moran roots of 1 - 2*3^-s", _c3, 5.0),
    (4, "nonlattice dimension of {1/2, 1/3}", _c4, None),
    (5, "stored residue tables", _c5, None),
    (6, "half square double pole Laurent coefficients", _c6, None),
    (7, "spray factorization and functional equation", _c7, None),
    (8, "functional equations by quadrature", _c8, None),
    (9, "gasket tube formula vs raster", _c9, 60.0),
    (10, "divisor Minkowski sums", _c10, None),
    (11, "Cesaro average contents", _c11, None),
    (12, "spectral second term of the a-string", _c12, 30.0),
    (13, "classification suite", _c13, None),
    (14, "property suites", _c14, None),
)


def run_criterion(cid: int) -> Result:
    for c, title, fn, budget in CRITERIA:
        if c == cid:
            return _timed(fn, c, title, budget)
    raise KeyError(cid)


def run_all(ids=None, workers: int = 1) -> list:
    ids = [c for c, *_ in CRITERIA] if ids is None else sorted(set(ids))
    return pmap(run_criterion, ids, workers=workers)
