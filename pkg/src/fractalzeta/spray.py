"""Self-similar sprays, the closed-form catalog, divisors and Minkowski sums.

Divisor orders follow the usual sign rule: zeros count positively and
poles negatively, so a simple pole has order -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .errors import BadParameter, NonIntegerWinding, UnsupportedParams
from .expr import Add, Const, Div, ExpBase, Expr, Mul, s
from .moran import DirichletPolynomial, Window, classify, rect_roots

SQ3 = math.sqrt(3.0)
LOG2, LOG3 = math.log(2.0), math.log(3.0)
PT_TOL = 1e-8


def _pow_term(coeff, base, shift=0) -> Expr:
    """coeff * base**(s - shift) as Const * ExpBase."""
    base = Fraction(base) if isinstance(base, int) else base
    b = ExpBase(base)
    return Mul((Const(coeff * math.exp(-shift * b.logb)), b))


def _lin(a) -> Expr:
    """s - a."""
    return s - a if a else s


# -- generators and sprays ---------------------------------------------------

@dataclass(frozen=True)
class MonophaseGenerator:
    """Generator whose inner tube V(eps) = sum kappa[a] eps**(N-a) for eps <= g."""
    N: int
    g: float
    kappa: tuple  # kappa[a] for a = 0..N-1

    def __post_init__(self):
        if self.N < 1 or len(self.kappa) != self.N:
            raise BadParameter("kappa must have exactly N entries")
        if not self.g > 0:
            raise BadParameter("inradius must be positive")
        t = np.linspace(0, self.g, 257)[1:]
        v = self.tube(t)
        if np.any(v < -1e-12 * self.volume) or np.any(np.diff(v) < -1e-12 * self.volume):
            raise BadParameter("generator tube volume must be nonnegative and nondecreasing")
        if not self.volume > 0:
            raise BadParameter("generator volume must be positive")

    @property
    def volume(self) -> float:
        return float(sum(k * self.g ** (self.N - a) for a, k in enumerate(self.kappa)))

    def tube(self, eps):
        eps = np.minimum(np.asarray(eps, dtype=float), self.g)
        return sum(k * eps ** (self.N - a) for a, k in enumerate(self.kappa))

    def scaled(self, lam: float) -> "MonophaseGenerator":
        return MonophaseGenerator(self.N, self.g * lam,
                                  tuple(k * lam ** a for a, k in enumerate(self.kappa)))

    def to_json(self):
        return {"N": self.N, "g": self.g, "kappa": list(self.kappa)}

    @classmethod
    def from_json(cls, obj) -> "MonophaseGenerator":
        return cls(int(obj["N"]), float(obj["g"]), tuple(float(k) for k in obj["kappa"]))

    # common shapes
    @classmethod
    def interval(cls, length: float = 1.0):
        return cls(1, length / 2, (2.0,))

    @classmethod
    def square(cls, side: float = 1.0):
        return cls(2, side / 2, (-4.0, 4.0 * side))

    @classmethod
    def triangle(cls, side: float = 1.0):
        """Equilateral triangle."""
        area, r = SQ3 / 4 * side ** 2, side / (2 * SQ3)
        return cls(2, r, (-area / r ** 2, 2 * area / r))

    @classmethod
    def octahedron(cls, side: float = 1.0):
        vol, r = math.sqrt(2.0) / 3 * side ** 3, side / math.sqrt(6.0)
        return cls(3, r, (vol / r ** 3, -3 * vol / r ** 2, 3 * vol / r))

    @classmethod
    def ball(cls, N: int, radius: float = 1.0):
        theta = math.pi ** (N / 2) / math.gamma(N / 2 + 1)
        kap = tuple(theta * math.comb(N, N - a) * (-1) ** (N - a + 1) * radius ** a for a in range(N))
        return cls(N, radius, kap)


def generator_zeta(gen: MonophaseGenerator) -> Expr:
    """Distance zeta of (boundary G, G) with delta = g:
    sum (N-a) kappa_a g**(s-a) / (s-a)."""
    terms = []
    for a, k in enumerate(gen.kappa):
        if k == 0:
            continue
        terms.append(Div(_pow_term((gen.N - a) * k, gen.g, a), _lin(a)))
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


@dataclass(frozen=True)
class SelfSimilarSpray:
    ratios: tuple
    generators: tuple  # MonophaseGenerator or Expr
    N: int

    def __post_init__(self):
        if len(self.ratios) < 2:
            raise BadParameter("a spray needs at least two ratios")
        if any(not 0 < float(r) < 1 for r in self.ratios):
            raise BadParameter("ratios must lie in (0,1)")
        if sum(float(r) ** self.N for r in self.ratios) >= 1:
            raise BadParameter("total volume is infinite: sum r**N >= 1")
        for gen in self.generators:
            if isinstance(gen, MonophaseGenerator) and gen.N != self.N:
                raise BadParameter("generator dimension differs from the spray's")

    @property
    def poly(self) -> DirichletPolynomial:
        return DirichletPolynomial.from_ratios(self.ratios)

    def generator_expr(self) -> Expr:
        parts = [generator_zeta(g) if isinstance(g, MonophaseGenerator) else g
                 for g in self.generators]
        return parts[0] if len(parts) == 1 else Add.of(*parts)

    @classmethod
    def from_json(cls, obj) -> "SelfSimilarSpray":
        gens = tuple(MonophaseGenerator.from_json(g) for g in obj["generators"])
        if not gens:
            raise BadParameter("spray needs a generator")
        ratios = tuple(Fraction(r).limit_denominator(10**9) if isinstance(r, str) else float(r)
                       for r in obj["ratios"])
        return cls(ratios, gens, gens[0].N)


def spray_zeta(spray: SelfSimilarSpray) -> Expr:
    """Factorization: generator zeta over 1 - sum r_j**s."""
    return Div(spray.generator_expr(), spray.poly.to_expr())


def functional_equation_residual(spray: SelfSimilarSpray, z) -> float:
    """|zeta - (zeta_gen + sum r**s zeta)| / |zeta| at z."""
    z = complex(z)
    zeta = ex.evaluate(spray_zeta(spray), z)
    gen = ex.evaluate(spray.generator_expr(), z)
    scal = sum(complex(float(r)) ** z for r in spray.ratios)
    return abs(zeta - (gen + scal * zeta)) / max(abs(zeta), 1e-300)


# -- divisors ----------------------------------------------------------------

def _same(a: complex, b: complex, tol=PT_TOL) -> bool:
    return abs(a - b) <= tol * (1 + abs(a))


def _canon(entries):
    return tuple(sorted(entries, key=lambda t: (round(t[0].imag, 9), round(t[0].real, 9))))


@dataclass(frozen=True)
class Divisor:
    """Formal sum of points with nonzero integer orders inside a window."""
    entries: tuple  # ((omega, order), ...)
    window: Optional[Window] = None

    def __post_init__(self):
        merged = []
        for w, m in self.entries:
            w = complex(w)
            if abs(w.imag) <= 1e-13 * (1 + abs(w.real)):
                w = complex(w.real, 0.0)  # roundoff off the real axis
            for i, (u, k) in enumerate(merged):
                if _same(u, w):
                    merged[i] = (u, k + int(m))
                    break
            else:
                merged.append((w, int(m)))
        object.__setattr__(self, "entries", _canon([(w, m) for w, m in merged if m != 0]))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def points(self):
        return [w for w, _ in self.entries]

    def poles(self) -> "Divisor":
        return Divisor(tuple(e for e in self.entries if e[1] < 0), self.window)

    def zeros(self) -> "Divisor":
        return Divisor(tuple(e for e in self.entries if e[1] > 0), self.window)

    def order_at(self, w) -> int:
        for u, m in self.entries:
            if _same(u, complex(w)):
                return m
        return 0

    def restrict(self, win: Window, tol: float = 1e-9) -> "Divisor":
        return Divisor(tuple(e for e in self.entries if win.contains(e[0], tol)), win)

    def same_as(self, other: "Divisor", tol: float = PT_TOL) -> bool:
        if len(self) != len(other):
            return False
        return all(abs(other.order_at(w) - m) == 0 and any(_same(w, u, tol) for u in other.points)
                   for w, m in self.entries)

    def conjugation_closed(self, tol: float = PT_TOL) -> bool:
        return all(self.order_at(w.conjugate()) == m for w, m in self.entries
                   if self.window is None or self.window.contains(w.conjugate(), 1e-9))

    def to_json(self):
        d = {"entries": [{"re": w.real, "im": w.imag, "order": m} for w, m in self.entries]}
        if self.window is not None:
            d["window"] = self.window.to_json()
        return d

    @classmethod
    def from_json(cls, obj) -> "Divisor":
        win = None
        if "window" in obj:
            (a, b), (c, d) = obj["window"]["re"], obj["window"]["im"]
            win = Window(a, b, c, d)
        return cls(tuple((complex(e["re"], e["im"]), int(e["order"])) for e in obj["entries"]), win)


@dataclass(frozen=True)
class Line:
    """Vertically periodic family re + i*period*k, every point of one order."""
    re: float
    period: float
    order: int = -1

    def points(self, win: Window):
        kmin = math.ceil((win.im_lo - 1e-9) / self.period)
        kmax = math.floor((win.im_hi + 1e-9) / self.period)
        if not win.re_lo - 1e-9 <= self.re <= win.re_hi + 1e-9:
            return []
        return [(complex(self.re, k * self.period), self.order) for k in range(kmin, kmax + 1)]


def divisor_from_parts(points, lines, win: Window, cancelled=()) -> Divisor:
    """Stated points first; line points falling on a stated point are skipped."""
    entries = [(complex(w), m) for w, m in points if win.contains(complex(w), 1e-9)]
    for ln in lines:
        entries.extend(e for e in ln.points(win) if not any(_same(e[0], complex(w)) for w, _ in points))
    entries = [e for e in entries if not any(_same(e[0], complex(c)) for c in cancelled)]
    return Divisor(tuple(entries), win)


def _entire_factors(e: Expr) -> list:
    """Factors of e that contain no division and are not constants or pure exponentials."""
    if isinstance(e, Mul):
        return [f for fac in e.factors for f in _entire_factors(fac)]
    if isinstance(e, (Const, ExpBase)):
        return []
    if ex.has_div(e):
        return []
    return [e]


def _den_factors(e: Expr, out: list):
    if isinstance(e, Div):
        out.extend(_entire_factors(e.den))
        _den_factors(e.num, out)
        _den_factors(e.den, out)
    elif isinstance(e, Add):
        for t in e.terms:
            _den_factors(t, out)
    elif isinstance(e, Mul):
        for f in e.factors:
            _den_factors(f, out)


def _factor_roots(factor: Expr, win: Window) -> list:
    df = ex.deriv(factor)
    f = lambda z: ex.evaluate(factor, z, guard=False)
    d = lambda z: ex.evaluate(df, z, guard=False)
    return [w for w, _ in rect_roots(f, d, win).roots]


def _net_order(e: Expr, center: complex, radius: float) -> int:
    r = radius
    for _ in range(8):
        try:
            return ex.stable_order(e, center, r)
        except NonIntegerWinding:
            r *= 0.7
    raise NonIntegerWinding(f"could not resolve the order at {center}")


def divisor_of(e: Expr, win: Window, zeros: bool = True) -> Divisor:
    """Poles (and optionally zeros) of a closed form inside the window.

    Pole candidates are the roots of every entire denominator factor; the
    net order at each candidate comes from the argument principle, so
    cancellations between terms are resolved. Zeros are the roots of
    e * prod (s - p)**m over the poles p of order m.
    """
    facs = []
    _den_factors(e, facs)
    search = win.grow(1e-3)
    cands = []
    for fac in facs:
        for w in _factor_roots(fac, search):
            if not any(_same(w, c, 1e-7) for c in cands):
                cands.append(w)
    poles = []
    for c in cands:
        others = [o for o in cands if o is not c]
        rad = ex.default_radius(c, others, cap=0.25)
        k = _net_order(e, c, rad)
        if k > 0:
            poles.append((c, k))
    entries = [(w, -k) for w, k in poles]
    if zeros:
        de = ex.deriv(e)

        def g(z):
            out = ex.evaluate(e, z, guard=False)
            for p, k in poles:
                out = out * (z - p) ** k
            return out

        def dg(z):
            # (e * prod)' = e' * prod + e * prod * sum k/(z-p), no division by e
            prod = 1.0
            for p, k in poles:
                prod = prod * (z - p) ** k
            val = ex.evaluate(e, z, guard=False)
            out = ex.evaluate(de, z, guard=False) * prod
            for p, k in poles:
                out = out + val * prod * k / (z - p)
            return out

        with np.errstate(all="ignore"):
            zs = rect_roots(g, dg, search).roots
        entries.extend((w, m) for w, m in zs)
    return Divisor(tuple(entries), win).restrict(win, 1e-6)


def divisor_add(d1: Divisor, d2: Divisor) -> Divisor:
    """Pointwise sum of orders (the formal sum of divisors)."""
    return Divisor(d1.entries + d2.entries, d1.window or d2.window)


def _sum_window(w1: Optional[Window], w2: Optional[Window]) -> Optional[Window]:
    if w1 is None or w2 is None:
        return w1 or w2
    return Window(w1.re_lo + w2.re_lo, w1.re_hi + w2.re_hi,
                  max(w1.im_lo, w2.im_lo), min(w1.im_hi, w2.im_hi))


def minkowski_sum(d1: Divisor, d2: Divisor, window: Optional[Window] = None) -> Divisor:
    """Complex dimensions of a product predicted from those of the factors.

    Points are all sums w1 + w2 of poles. A pole pair of orders n1, n2 gives
    order n1 + n2 - 1 (Mellin convolution of two Laurent tails). Coincident
    sums keep the most singular order; they do not accumulate. Zeros are
    not part of the sum.
    """
    win = window or _sum_window(d1.window, d2.window)
    out = {}
    for w1, m1 in d1.poles():
        for w2, m2 in d2.poles():
            w = w1 + w2
            if win is not None and not win.contains(w, 1e-9):
                continue
            order = m1 + m2 + 1
            key = next((u for u in out if _same(u, w)), None)
            if key is None:
                out[w] = order
            else:
                out[key] = min(out[key], order)
    return Divisor(tuple(out.items()), win)


def product_conjecture_check(d1: Divisor, d2: Divisor, observed: Divisor,
                             window: Optional[Window] = None) -> dict:
    """Compare an observed product divisor with the Minkowski-sum prediction."""
    win = window or observed.window
    pred = minkowski_sum(d1, d2, win)
    obs = observed.poles() if win is None else observed.poles().restrict(win)
    missing = [w for w in pred.points if obs.order_at(w) == 0]
    extra = [w for w in obs.points if pred.order_at(w) == 0]
    orders_match = all(obs.order_at(w) == m for w, m in pred.entries if w not in missing)
    return {
        "contained": not extra,
        "equal": not extra and not missing and orders_match,
        "missing": [[w.real, w.imag] for w in missing],
        "extra": [[w.real, w.imag] for w in extra],
        "predicted": pred.to_json(),
        "status": "conjectural",
    }


# -- catalog -----------------------------------------------------------------

@dataclass
class CatalogEntry:
    name: str
    N: int
    zeta: Optional[Expr]
    D: float
    form: str = "distance"  # distance | tube | string
    points: tuple = ()  # ((omega, order), ...)
    lines: tuple = ()
    cancelled: tuple = ()
    residues: tuple = ()  # ((omega, value, label), ...) stored from the source
    line_residue: Optional[Callable] = None  # k -> residue on the principal line
    eps_max: Optional[float] = None
    eps_note: str = ""
    params: dict = field(default_factory=dict)
    ratios: tuple = ()
    notes: str = ""
    conjectural: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def period(self) -> Optional[float]:
        return self.lines[0].period if self.lines else None

    def default_window(self, periods: float = 5.0) -> Window:
        p = self.period if self.period else 10.0
        return Window(-1.0, float(self.N), -periods * p, periods * p)

    def divisor(self, window: Optional[Window] = None) -> Divisor:
        """Divisor (poles) as stated for this entry."""
        return divisor_from_parts(self.points, self.lines, window or self.default_window(),
                                  self.cancelled)

    def residue_table(self, kmax: int = 5):
        rows = list(self.residues)
        if self.line_residue is not None:
            ln = self.lines[0]
            for k in range(-kmax, kmax + 1):
                w = complex(ln.re, k * ln.period)
                if any(_same(w, r[0]) for r in rows):
                    continue
                v = self.line_residue(k)
                if v is not None:
                    rows.append((w, v, f"principal line, k={k}"))
        return rows

    def to_json(self):
        d = {"name": self.name, "N": self.N, "D": self.D, "form": self.form,
             "params": self.params, "conjectural": self.conjectural, "notes": self.notes,
             "eps_max": self.eps_max, "divisor": self.divisor().to_json(),
             "residues": [{"re": complex(w).real, "im": complex(w).imag,
                           "value": [complex(v).real, complex(v).imag], "label": lab}
                          for w, v, lab in self.residue_table()]}
        if self.zeta is not None:
            d["zeta"] = ex.to_json(self.zeta)
        return d


def _delta_terms(pairs, delta) -> list:
    """sum c * delta**(s-j)/(s-j) for (c, j) in pairs."""
    return [Div(_pow_term(c, delta, j), _lin(j)) for c, j in pairs]


def _check_delta(delta, lo, name):
    if not delta > lo:
        raise BadParameter(f"{name} needs delta > {lo:.6g}")


def _cantor_string(**_):
    D, p = math.log(2) / LOG3, 2 * math.pi / LOG3
    zeta = Div(Const(1.0), Add((ExpBase(Fraction(3)), Const(-2.0))))
    return CatalogEntry(
        "cantor_string", 1, zeta, D, form="string", lines=(Line(D, p),),
        line_residue=lambda k: 1 / (2 * LOG3), eps_max=1 / 6,
        ratios=(Fraction(1, 3), Fraction(1, 3)),
        notes="geometric zeta of the Cantor string; tube terms use the string form")


def _cantor_string_rfd(**_):
    D, p = math.log(2) / LOG3, 2 * math.pi / LOG3
    zeta = Div(_pow_term(2.0, Fraction(1, 2)), Mul((s, Add((ExpBase(Fraction(3)), Const(-2.0))))))
    return CatalogEntry(
        "cantor_string_rfd", 1, zeta, D, points=((0.0, -1),), lines=(Line(D, p),),
        residues=((0.0, -2.0, "res at 0"),),
        line_residue=lambda k: 2 ** (1 - complex(D, k * p)) / complex(D, k * p) / (2 * LOG3),
        eps_max=1 / 6, ratios=(Fraction(1, 3), Fraction(1, 3)),
        notes="distance zeta of the RFD realizing the Cantor string; its poles are the "
              "complex dimensions used for the Cantor set in product examples")


def _unit_interval(delta=0.5, **_):
    zeta = Add(tuple(_delta_terms(((1.0, 1), (2.0, 0)), delta)))
    return CatalogEntry("unit_interval", 1, zeta, 1.0, form="tube",
                        points=((0.0, -1), (1.0, -1)),
                        residues=((0.0, 2.0, "res at 0"), (1.0, 1.0, "res at 1")),
                        params={"delta": delta}, notes="tube zeta of [0,1]")


def _gasket(delta=0.5, **_):
    _check_delta(delta, 1 / (4 * SQ3), "gasket")
    D, p = math.log(3) / LOG2, 2 * math.pi / LOG2
    first = Div(Mul((Const(6 * SQ3), ExpBase(1 / SQ3), ExpBase(Fraction(1, 2)))),
                Mul((s, s - 1, Add((ExpBase(Fraction(2)), Const(-3.0))))))
    zeta = Add((first, *_delta_terms(((2 * math.pi, 0), (3.0, 1)), delta)))

    def lres(k):
        w = complex(D, k * p)
        return 6 * SQ3 ** (1 - w) / (LOG2 * 4 ** w * w * (w - 1))

    return CatalogEntry(
        "gasket", 2, zeta, D, points=((0.0, -1),), lines=(Line(D, p),),
        residues=((0.0, 3 * SQ3 + 2 * math.pi, "res at 0"), (1.0, 0.0, "res at 1")),
        line_residue=lres, eps_max=1 / (2 * SQ3), params={"delta": delta},
        ratios=(Fraction(1, 2),) * 3, extra={"first_term": first},
        notes="s = 1 is not a pole: the two contributions cancel")


def _carpet(delta=0.5, **_):
    _check_delta(delta, 1 / 6, "carpet")
    D, p = math.log(8) / LOG3, 2 * math.pi / LOG3
    first = Div(Mul((Const(8.0), ExpBase(Fraction(1, 2)))),
                Mul((s, s - 1, Add((ExpBase(Fraction(3)), Const(-8.0))))))
    zeta = Add((first, *_delta_terms(((2 * math.pi, 0), (4.0, 1)), delta)))

    def lres(k):
        w = complex(D, k * p)
        return 2 ** (-w) / (LOG3 * w * (w - 1))

    return CatalogEntry(
        "carpet", 2, zeta, D, points=((0.0, -1), (1.0, -1)), lines=(Line(D, p),),
        residues=((0.0, 2 * math.pi + 8 / 7, "res at 0"), (1.0, 16 / 5, "res at 1")),
        line_residue=lres, eps_max=0.5, eps_note="validity radius taken as 1/2",
        params={"delta": delta}, ratios=(Fraction(1, 3),) * 8, extra={"first_term": first})


def _carpet3d(delta=0.5, **_):
    _check_delta(delta, 1 / 6, "carpet3d")
    D, p = math.log(26) / LOG3, 2 * math.pi / LOG3
    first = Div(Mul((Const(48.0), ExpBase(Fraction(1, 2)))),
                Mul((s, s - 1, s - 2, Add((ExpBase(Fraction(3)), Const(-26.0))))))
    zeta = Add((first, *_delta_terms(((4 * math.pi, 0), (6 * math.pi, 1), (6.0, 2)), delta)))

    def lres(k):
        w = complex(D, k * p)
        return 24 / (13 * 2 ** w * w * (w - 1) * (w - 2) * LOG3)

    return CatalogEntry(
        "carpet3d", 3, zeta, D, points=((0.0, -1), (1.0, -1), (2.0, -1)), lines=(Line(D, p),),
        residues=((0.0, 4 * math.pi - 24 / 25, "res at 0"), (1.0, 6 * math.pi + 24 / 23, "res at 1"),
                  (2.0, 96 / 17, "res at 2")),
        line_residue=lres, eps_max=1 / 6, eps_note="validity radius guessed as 1/6",
        params={"delta": delta}, ratios=(Fraction(1, 3),) * 26)


def _n_gasket_generator(N):
    if N == 2:
        return MonophaseGenerator.triangle(0.5)
    if N == 3:
        return MonophaseGenerator.octahedron(0.5)
    raise UnsupportedParams(f"no closed form generator for the {N}-gasket")


def n_gasket_g(N: int) -> Expr:
    """Entire numerator g_N: generator zeta times s(s-1)...(s-N+1)."""
    gen = _n_gasket_generator(N)
    poly = Mul(tuple(_lin(j) for j in range(N)))
    return Mul.of(generator_zeta(gen), poly)


def _n_gasket(N=2, **_):
    N = int(N)
    if N < 2:
        raise BadParameter("N-gasket needs N >= 2")
    D = max(N - 1.0, math.log2(N + 1))
    p = 2 * math.pi / LOG2
    sig = math.log2(N + 1)
    # when the scaling line meets an integer pole (N = 3), that pole is double
    points = [(float(j), -2 if abs(j - sig) < 1e-12 else -1) for j in range(N)]
    ratios = (Fraction(1, 2),) * (N + 1)
    zeta, eps_max = None, None
    if N in (2, 3):
        gen = _n_gasket_generator(N)
        zeta = spray_zeta(SelfSimilarSpray(ratios, (gen,), N))
        eps_max = gen.g
    entry = CatalogEntry(
        "n_gasket", N, zeta, D, points=tuple(points), lines=(Line(sig, p),), params={"N": N},
        ratios=ratios, eps_max=eps_max, eps_note="validity radius taken as the generator inradius",
        notes="closed form only for N = 2, 3; divisor only otherwise")
    return entry


def _n_carpet(N=2, **_):
    N = int(N)
    if N < 2:
        raise BadParameter("N-carpet needs N >= 2")
    D, p = math.log(3 ** N - 1) / LOG3, 2 * math.pi / LOG3
    return CatalogEntry("n_carpet", N, None, D, points=tuple((float(j), -1) for j in range(N)),
                        lines=(Line(D, p),), params={"N": N},
                        ratios=(Fraction(1, 3),) * (3 ** N - 1), notes="divisor only")


def _theta(N):
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def _sphere(N=2, delta=0.5, **_):
    N = int(N)
    if N < 1:
        raise BadParameter("sphere needs N >= 1")
    if not 0 < delta < 1:
        raise BadParameter("sphere needs delta in (0,1)")
    th = _theta(N)
    pairs, pts, res = [], [], []
    for k in range(N + 1):
        c = (1 - (-1) ** k) * math.comb(N, k) * th
        if c:
            pairs.append((c, N - k))
            pts.append((float(N - k), -1))
            res.append((float(N - k), 2 * th * math.comb(N, N - k), f"res at {N - k}"))
    zeta = Add(tuple(_delta_terms(pairs, delta)))
    return CatalogEntry("sphere", N, zeta, N - 1.0, form="tube", points=tuple(pts),
                        residues=tuple(res), params={"N": N, "delta": delta}, eps_max=delta,
                        notes="tube zeta of the unit sphere in R^N",
                        extra={"content": 2 * N * th})


def _sphere_rfd(N=2, **_):
    N = int(N)
    if N < 1:
        raise BadParameter("sphere RFD needs N >= 1")
    th = _theta(N)
    terms, res = [], []
    for j in range(N):
        c = N * th * math.comb(N - 1, j) * (-1) ** (N - j - 1)
        terms.append(Div(Const(c), _lin(j)))
        res.append((float(j), c, f"res at {j}"))
    zeta = terms[0] if len(terms) == 1 else Add(tuple(terms))
    return CatalogEntry("sphere_rfd", N, zeta, N - 1.0, points=tuple((float(j), -1) for j in range(N)),
                        residues=tuple(res), params={"N": N}, eps_max=1.0,
                        notes="unit sphere relative to the open unit ball",
                        extra={"content": N * th})


def _cantor_graph_rfd(**_):
    D0, p = math.log(2) / LOG3, 2 * math.pi / LOG3
    zeta = Div(Const(2.0), Mul((s, Add((ExpBase(Fraction(3)), Const(-2.0))), s - 1)))

    def lres(k):
        w = complex(D0, k * p)
        return 1 / (LOG3 * (w - 1) * w)

    return CatalogEntry(
        "cantor_graph_rfd", 2, zeta, 1.0, points=((0.0, -1), (1.0, -1)), lines=(Line(D0, p),),
        residues=((0.0, 2.0, "res at 0"), (1.0, 2.0, "res at 1")), line_residue=lres,
        eps_max=1.0, ratios=(Fraction(1, 3), Fraction(1, 3)),
        notes="triangles above and below the flat parts of the Cantor function")


def _half_square(delta=0.5, **_):
    _check_delta(delta, 0.25, "half_square")
    p = 2 * math.pi / LOG2
    rel = Div(ExpBase(Fraction(1, 2)) * Const(0.5),
              Mul((s, s - 1, Add((_pow_term(1.0, Fraction(2), 1), Const(-1.0))))))
    zeta = Add((rel, *_delta_terms(((4.0, 1), (2 * math.pi, 0)), delta)))

    def lres_stated(k):
        w = complex(1.0, k * p)
        return 4 ** (-1j * p * k) / (4 * w * (w - 1))

    return CatalogEntry(
        "half_square", 2, zeta, 1.0, points=((0.0, -1), (1.0, -2)),
        lines=(Line(1.0, p),), residues=((0.0, 1 + 2 * math.pi, "res at 0"),),
        line_residue=lambda k: None if k == 0 else lres_stated(k),
        eps_max=0.25, eps_note="validity radius guessed as the generator inradius 1/4",
        params={"delta": delta}, ratios=(Fraction(1, 2),) * 2,
        extra={"relative": rel, "c_m2": 1 / (4 * LOG2), "c_m1": (29 * LOG2 - 2) / (8 * LOG2)},
        notes="D = 1 is a double pole; the other principal poles are simple")


def _third_square(**_):
    p = 2 * math.pi / LOG3
    D0 = math.log(2) / LOG3
    return CatalogEntry(
        "third_square", 2, None, 1.0, points=((0.0, -1), (1.0, -1)), lines=(Line(D0, p),),
        residues=((0.0, 12 + math.pi, "res at 0 (stated)"), (1.0, 16.0, "res at 1 (stated)")),
        ratios=(Fraction(1, 3),) * 2, conjectural=True,
        notes="entire factor not modeled; the line is an upper bound and equality is conjectural")


def _cantor_grill(**_):
    D0, p = math.log(2) / LOG3, 2 * math.pi / LOG3
    return CatalogEntry("cantor_grill", 2, None, 1 + D0, points=((0.0, -1), (1.0, -1)),
                        lines=(Line(D0, p), Line(1 + D0, p)), conjectural=False,
                        notes="C x [0,1]; divisor only")


def _cantor_dust(**_):
    D0, p = math.log(2) / LOG3, 2 * math.pi / LOG3
    return CatalogEntry("cantor_dust", 2, None, 2 * D0, points=((0.0, -1),),
                        lines=(Line(D0, p), Line(2 * D0, p)), conjectural=True,
                        notes="C x C; stated set is an upper bound, equality conjectural")


_CATALOG = {
    "cantor_string": _cantor_string,
    "cantor_string_rfd": _cantor_string_rfd,
    "unit_interval": _unit_interval,
    "gasket": _gasket,
    "carpet": _carpet,
    "carpet3d": _carpet3d,
    "n_gasket": _n_gasket,
    "n_carpet": _n_carpet,
    "sphere": _sphere,
    "sphere_rfd": _sphere_rfd,
    "cantor_graph_rfd": _cantor_graph_rfd,
    "half_square": _half_square,
    "third_square": _third_square,
    "cantor_grill": _cantor_grill,
    "cantor_dust": _cantor_dust,
}


def catalog_names():
    return sorted(_CATALOG)


def catalog_get(name: str, **params) -> CatalogEntry:
    if name not in _CATALOG:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(catalog_names())}")
    return _CATALOG[name](**params)


def catalog_expr(name: str, **params) -> Expr:
    e = catalog_get(name, **params)
    if e.zeta is None:
        raise UnsupportedParams(f"{name} has no closed form")
    return e.zeta


def scaled_zeta(entry: CatalogEntry, lam: float) -> Expr:
    """zeta of (lam A, lam Omega) as lam**s * zeta."""
    if entry.zeta is None:
        raise UnsupportedParams(f"{entry.name} has no closed form")
    return ex.scale_expr(entry.zeta, lam)
