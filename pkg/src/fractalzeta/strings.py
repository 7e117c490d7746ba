"""Fractal strings: length enumeration, counting, exact tube volumes, zetas."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import BadParameter, Divergent
from .expr import Add, Const, Div, ExpBase, Expr, Mul, evaluate, s

REL_EQ = 1e-12


def _base(x):
    """Keep rational inputs exact for ExpBase."""
    if isinstance(x, Fraction):
        return x
    f = Fraction(x).limit_denominator(10**6)
    return f if abs(float(f) - x) <= 1e-15 * x else float(x)


@dataclass(frozen=True)
class FractalString:
    kind: str
    params: dict
    total_length: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def lengths(self) -> Iterator[tuple]:
        """(length, multiplicity) in strictly decreasing length order."""
        return _ITER[self.kind](self)

    def lengths_above(self, cutoff: float):
        """Arrays (lengths, multiplicities) of all groups with length >= cutoff."""
        return _ABOVE[self.kind](self, cutoff)

    @property
    def infinite(self) -> bool:
        return self.kind != "explicit"

    def to_json(self):
        return {"kind": self.kind, **{k: _jsonable(v) for k, v in self.params.items()}}


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# -- constructors ------------------------------------------------------------

def make_string(kind: str, **params) -> FractalString:
    if kind == "cantor":
        return _gen_cantor(Fraction(1, 3), "cantor")
    if kind == "generalized_cantor":
        return _gen_cantor(_base(params["a"]), kind)
    if kind == "a_string":
        a = float(params["a"])
        if not a > 0:
            raise BadParameter("a must be positive")
        return FractalString("a_string", {"a": a}, 1.0)
    if kind == "self_similar":
        return _self_similar(params["ratios"], params["gaps"])
    if kind == "lapma":
        return _lapma(float(params["D"]), float(params["tau"]), float(params["beta"]))
    if kind == "explicit":
        return _explicit(params["lengths"])
    raise BadParameter(f"unknown string kind {kind!r}")


def from_json(obj: dict) -> FractalString:
    obj = dict(obj)
    kind = obj.pop("kind")
    if kind == "self_similar":
        obj = {"ratios": [Fraction(r) if isinstance(r, str) else r for r in obj["ratios"]],
               "gaps": [Fraction(g) if isinstance(g, str) else g for g in obj["gaps"]]}
    elif kind == "generalized_cantor" and isinstance(obj.get("a"), str):
        obj["a"] = Fraction(obj["a"])
    return make_string(kind, **obj)


def _gen_cantor(a, kind):
    if not 0 < a < 0.5:
        raise BadParameter("generalized Cantor needs 0 < a < 1/2")
    return FractalString(kind, {"a": a}, 1.0)


def _self_similar(ratios, gaps):
    ratios = [_base(r) for r in ratios]
    gaps = [_base(g) for g in gaps]
    if len(ratios) < 2:
        raise BadParameter("need at least two scaling ratios")
    if any(not 0 < r < 1 for r in ratios) or any(g <= 0 for g in gaps) or not gaps:
        raise BadParameter("ratios must lie in (0,1) and gaps must be positive")
    sr = float(sum(float(r) for r in ratios))
    if sr >= 1:
        raise BadParameter("sum of ratios must be < 1 for finite total length")
    total = sum(float(g) for g in gaps) / (1 - sr)
    return FractalString("self_similar", {"ratios": ratios, "gaps": gaps}, total)


def _lapma(D, tau, beta):
    if not (0 < D < 1 and tau > 0 and 0 < beta < D / (2 * (D + tau))):
        raise BadParameter("lapma needs 0<D<1, tau>0, 0<beta<D/(2(D+tau))")
    st = FractalString("lapma", {"D": D, "tau": tau, "beta": beta}, float("nan"))
    object.__setattr__(st, "total_length", _lapma_sum_from(st, 0))
    return st


def _explicit(lengths):
    groups = {}
    for item in lengths:
        if isinstance(item, (tuple, list)):
            l, m = float(item[0]), int(item[1])
        else:
            l, m = float(item), 1
        if l <= 0 or m <= 0:
            raise BadParameter("lengths and multiplicities must be positive")
        groups[l] = groups.get(l, 0) + m
    items = sorted(groups.items(), reverse=True)
    return FractalString("explicit", {"lengths": [[l, m] for l, m in items]},
                         float(sum(l * m for l, m in items)))


# -- enumeration -------------------------------------------------------------

def _iter_cantor(st):
    a = float(st.params["a"])
    n = 1
    while True:
        yield a ** (n - 1) * (1 - 2 * a), 2 ** (n - 1)
        n += 1


def _above_cantor(st, cutoff):
    a = float(st.params["a"])
    first = 1 - 2 * a
    if cutoff > first:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    m = int(math.floor(math.log(first / cutoff) / math.log(1 / a) + 1e-12)) + 1
    n = np.arange(1, m + 1)
    return a ** (n - 1) * first, 2 ** (n - 1)


def _astring_len(a, j):
    j = np.asarray(j, dtype=float)
    return j ** (-a) * -np.expm1(-a * np.log1p(1.0 / j))


def _iter_astring(st):
    a = st.params["a"]
    j = 1
    while True:
        yield float(_astring_len(a, j)), 1
        j += 1


def _astring_count(a, cutoff):
    """#{j : l_j >= cutoff}, l_j strictly decreasing."""
    if cutoff > _astring_len(a, 1):
        return 0
    lo, hi = 1, 2
    while _astring_len(a, hi) >= cutoff:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _astring_len(a, mid) >= cutoff:
            lo = mid
        else:
            hi = mid
    return lo


def _above_astring(st, cutoff):
    J = _astring_count(st.params["a"], cutoff)
    j = np.arange(1, J + 1)
    return _astring_len(st.params["a"], j), np.ones(J, dtype=np.int64)


def _ss_words(ratios):
    """Distinct products of ratios with multiplicities, nonincreasing."""
    distinct = {}
    for r in ratios:
        distinct[r] = distinct.get(r, 0) + 1
    rs = sorted(distinct, reverse=True)
    mult = [distinct[r] for r in rs]
    logs = [math.log(float(r)) for r in rs]
    k = len(rs)
    start = (0,) * k
    heap = [(-0.0, start)]
    while heap:
        negval, vec = heapq.heappop(heap)
        n = sum(vec)
        c = math.factorial(n)
        for i, e in enumerate(vec):
            c //= math.factorial(e)
            c *= mult[i] ** e
        yield math.exp(-negval), c
        last = max([i for i, e in enumerate(vec) if e] or [0])
        for i in range(last, k):
            nv = vec[:i] + (vec[i] + 1,) + vec[i + 1:]
            heapq.heappush(heap, (negval - logs[i], nv))


def _iter_selfsim(st):
    gaps = [float(g) for g in st.params["gaps"]]
    gens = [((g * w, c) for w, c in _ss_words(st.params["ratios"])) for g in gaps]
    merged = heapq.merge(*gens, key=lambda t: -t[0])
    cur, cm = None, 0
    for l, m in merged:
        if cur is not None and abs(l - cur) <= REL_EQ * cur:
            cm += m
            continue
        if cur is not None:
            yield cur, cm
        cur, cm = l, m


def _above_generic(st, cutoff):
    ls, ms = [], []
    for l, m in st.lengths():
        if l < cutoff * (1 - REL_EQ):
            break
        ls.append(l)
        ms.append(m)
    return np.array(ls, dtype=float), np.array(ms, dtype=np.int64)


def _iter_explicit(st):
    for l, m in st.params["lengths"]:
        yield l, m


# lapma: V(x) = x^D (1 + 2 beta cos(tau log x)); x_j solves V(x_j) = j; l_j = 1/x_j

def lapma_profile(st, x):
    D, tau, beta = st.params["D"], st.params["tau"], st.params["beta"]
    x = np.asarray(x, dtype=float)
    return x ** D * (1 + 2 * beta * np.cos(tau * np.log(x)))


def _lapma_dprofile(st, x):
    D, tau, beta = st.params["D"], st.params["tau"], st.params["beta"]
    u = tau * np.log(x)
    return x ** (D - 1) * (D * (1 + 2 * beta * np.cos(u)) - 2 * beta * tau * np.sin(u))


def _lapma_invert(st, j):
    """x with V(x) = j for an array of positive targets j."""
    D, beta = st.params["D"], st.params["beta"]
    j = np.asarray(j, dtype=float)
    lo = (j / (1 + 2 * beta)) ** (1 / D)
    hi = (j / (1 - 2 * beta)) ** (1 / D)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = lapma_profile(st, mid) < j
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(6):
        x = x - (lapma_profile(st, x) - j) / _lapma_dprofile(st, x)
    return x


def _lapma_x(st, n):
    """First n solutions x_1..x_n (cached, grown in chunks)."""
    xs = st._cache.get("x")
    if xs is None or len(xs) < n:
        m = max(n, 2 * (0 if xs is None else len(xs)), 4096)
        xs = _lapma_invert(st, np.arange(1, m + 1))
        st._cache["x"] = xs
    return xs[:n]


def _lapma_tail_integral(st, x0):
    """Integral over x > x0 of V'(x)/x dx (= sum of l_j over j > V(x0), smoothed)."""
    D, tau, beta = st.params["D"], st.params["tau"], st.params["beta"]
    u0 = math.log(x0)
    k = D - 1.0
    # antiderivatives of e^{ku} cos(tau u) and e^{ku} sin(tau u), evaluated at u0 (value at +inf is 0)
    e = math.exp(k * u0)
    den = k * k + tau * tau
    ic = e * (k * math.cos(tau * u0) + tau * math.sin(tau * u0)) / den
    is_ = e * (k * math.sin(tau * u0) - tau * math.cos(tau * u0)) / den
    i0 = e / k
    return -(D * i0 + 2 * beta * D * ic - 2 * beta * tau * is_)


def _lapma_sum_from(st, J, explicit=20000):
    """sum_{j>J} l_j: explicit terms then a midpoint-integral tail."""
    M = J + explicit
    xs = _lapma_x(st, M)
    head = float(np.sum(1.0 / xs[J:M]))
    xm = float(_lapma_invert(st, np.array([M + 0.5]))[0])
    return head + _lapma_tail_integral(st, xm)


def _iter_lapma(st):
    j = 0
    while True:
        j += 1
        yield float(1.0 / _lapma_x(st, j)[-1]), 1


def _lapma_count_x(st, x):
    """#{j : x_j <= x}."""
    x = x * (1 + REL_EQ)
    if x < _lapma_x(st, 1)[0]:
        return 0
    n = int(math.floor(float(lapma_profile(st, x)))) + 2
    xs = _lapma_x(st, n)
    return int(np.searchsorted(xs, x, side="right"))


def _above_lapma(st, cutoff):
    J = _lapma_count_x(st, 1.0 / cutoff)
    xs = _lapma_x(st, J)
    return 1.0 / xs, np.ones(J, dtype=np.int64)


_ITER = {"cantor": _iter_cantor, "generalized_cantor": _iter_cantor, "a_string": _iter_astring,
         "self_similar": _iter_selfsim, "lapma": _iter_lapma, "explicit": _iter_explicit}
_ABOVE = {"cantor": _above_cantor, "generalized_cantor": _above_cantor, "a_string": _above_astring,
          "self_similar": _above_generic, "lapma": _above_lapma, "explicit": _above_generic}


# -- counting and tubes ------------------------------------------------------

def counting(st: FractalString, x: float) -> int:
    """Geometric counting function #{j : 1/l_j <= x} with multiplicity."""
    if x <= 0:
        return 0
    if st.kind == "lapma":
        return _lapma_count_x(st, x)
    if st.kind == "a_string":
        return _astring_count(st.params["a"], (1.0 / x) * (1 - REL_EQ))
    _, m = st.lengths_above((1.0 / x) * (1 - REL_EQ))
    return int(np.sum(m))


def tube_exact(st: FractalString, eps: float) -> float:
    """V(eps) = sum_j min(l_j, 2 eps), with the tail summed exactly."""
    if eps <= 0:
        raise BadParameter("eps must be positive")
    t = 2.0 * eps
    if st.kind in ("cantor", "generalized_cantor"):
        a = float(st.params["a"])
        first = 1 - 2 * a
        M = 0 if t > first else int(math.floor(math.log(first / t) / math.log(1 / a) + 1e-12)) + 1
        return t * (2.0 ** M - 1) + (2 * a) ** M
    if st.kind == "a_string":
        a = st.params["a"]
        J = _astring_count(a, t)
        return t * J + (J + 1.0) ** (-a)
    if st.kind == "lapma":
        J = _lapma_count_x(st, 1.0 / t)
        return t * J + _lapma_sum_from(st, J)
    ls, ms = st.lengths_above(t)
    covered = float(np.sum(ls * ms))
    return t * float(np.sum(ms)) + max(st.total_length - covered, 0.0)


# -- zeta functions ----------------------------------------------------------

@dataclass(frozen=True)
class GeometricZetaForm:
    closed: Optional[Expr] = None
    partial: Optional[Callable] = None

    @property
    def is_closed(self) -> bool:
        return self.closed is not None


def _cantor_expr(a) -> Expr:
    if a == Fraction(1, 3):
        return Div(Const(1.0), Add((ExpBase(3), Const(-2.0))))
    return Div(ExpBase(_base(1 - 2 * a)), Add((Const(1.0), Mul((Const(-2.0), ExpBase(a))))))


def geometric_zeta(st: FractalString) -> GeometricZetaForm:
    if st.kind in ("cantor", "generalized_cantor"):
        return GeometricZetaForm(closed=_cantor_expr(st.params["a"]))
    if st.kind == "self_similar":
        num = Add(tuple(ExpBase(g) for g in st.params["gaps"]))
        den = Add((Const(1.0),) + tuple(Mul((Const(-1.0), ExpBase(r))) for r in st.params["ratios"]))
        return GeometricZetaForm(closed=Div(num, den))
    if st.kind == "explicit":
        terms = tuple(Mul((Const(m), ExpBase(_base(l)))) for l, m in st.params["lengths"])
        return GeometricZetaForm(closed=Add(terms))
    return GeometricZetaForm(partial=lambda z, **kw: zeta_partial(st, z, **kw))


@dataclass(frozen=True)
class PartialValue:
    value: complex
    tail_bound: float
    terms: int


def _tail_bound(st, sigma, J):
    if st.kind == "a_string":
        a = st.params["a"]
        q = (a + 1) * sigma
        return a ** sigma * J ** (1 - q) / (q - 1)
    D, beta = st.params["D"], st.params["beta"]
    q = sigma / D
    return (1 + 2 * beta) ** q * J ** (1 - q) / (q - 1)


def zeta_partial(st: FractalString, z, cutoff: Optional[int] = None, tol: float = 1e-12,
                 max_terms: int = 10**7) -> PartialValue:
    """Partial sum of sum_j l_j^z with a rigorous bound on the omitted tail."""
    z = complex(z)
    hi = abscissa_estimate(st).hi
    if z.real <= hi:
        raise Divergent(f"Re(s)={z.real} is not beyond the abscissa {hi}")
    if st.kind not in ("a_string", "lapma"):
        return PartialValue(evaluate(geometric_zeta(st).closed, z), 0.0, 0)
    if cutoff is None:
        J = 1000
        while J < max_terms and _tail_bound(st, z.real, J) > tol:
            J *= 2
        J = min(J, max_terms)
    else:
        J = int(cutoff)
    j = np.arange(1, J + 1)
    ls = _astring_len(st.params["a"], j) if st.kind == "a_string" else 1.0 / _lapma_x(st, J)
    val = complex(np.sum(np.exp(z * np.log(ls))))
    return PartialValue(val, float(_tail_bound(st, z.real, J)), J)


@dataclass(frozen=True)
class RfdZeta:
    """zeta of any geometric realization: 2^{1-s} zeta_L(s) / s."""
    string: FractalString
    expr: Optional[Expr]
    extra_points: tuple = (0.0,)

    def __call__(self, z):
        if self.expr is not None:
            return evaluate(self.expr, z)
        pv = zeta_partial(self.string, z)
        f = 2.0 ** (1 - complex(z)) / complex(z)
        return PartialValue(f * pv.value, abs(f) * pv.tail_bound, pv.terms)


def string_rfd_zeta(st: FractalString) -> RfdZeta:
    g = geometric_zeta(st)
    if not g.is_closed:
        return RfdZeta(st, None)
    z = g.closed
    two = Mul((Const(2.0), ExpBase(Fraction(1, 2))))
    if isinstance(z, Div):
        return RfdZeta(st, Div(Mul.of(two, z.num), Mul.of(s, z.den)))
    return RfdZeta(st, Div(Mul.of(two, z), s))


def rfd_residue(res_l: complex, w: complex) -> complex:
    """Residue of the RFD zeta at a simple pole w != 0 of zeta_L."""
    return 2.0 ** (1 - w) / w * res_l


@dataclass(frozen=True)
class Abscissa:
    lo: float
    hi: float

    @property
    def value(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def entire(self) -> bool:
        return self.hi == -math.inf


def _converges(st, sigma) -> bool:
    k = st.kind
    if k in ("cantor", "generalized_cantor"):
        a = float(st.params["a"])
        return 2 * a ** sigma < 1
    if k == "self_similar":
        return sum(float(r) ** sigma for r in st.params["ratios"]) < 1
    if k == "a_string":
        return sigma * (st.params["a"] + 1) > 1
    if k == "lapma":
        return sigma > st.params["D"]
    raise ValueError(k)


def abscissa_estimate(st: FractalString, width: float = 1e-6) -> Abscissa:
    """Bracket of the abscissa of convergence of sum l_j^sigma."""
    if not st.infinite:
        return Abscissa(-math.inf, -math.inf)
    lo, hi = 0.0, 1.0
    while hi - lo > width / 4:
        mid = 0.5 * (lo + hi)
        if _converges(st, mid):
            hi = mid
        else:
            lo = mid
    return Abscissa(lo, hi)
