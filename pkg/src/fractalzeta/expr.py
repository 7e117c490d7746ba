"""Small expression trees for meromorphic closed forms in one variable s.

Node kinds: Const, Var, Add, Mul, Div and ExpBase (b**s with b > 0).
Trees are immutable and evaluated as built; there is no simplifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Union

import numpy as np

from .errors import HigherOrder, NonIntegerWinding, NotAZero, PoleHit

POLE_GUARD = 1e-12
ZERO_TOL = 1e-9     # |den(w)| relative to its magnitude scale
SIMPLE_TOL = 1e-8   # |den'(w)| relative to its magnitude scale


class Expr:
    """Base class. Supports +, -, *, / and integer powers."""

    def __add__(self, other):
        return Add.of(self, as_expr(other))

    def __radd__(self, other):
        return Add.of(as_expr(other), self)

    def __sub__(self, other):
        return Add.of(self, -as_expr(other))

    def __rsub__(self, other):
        return Add.of(as_expr(other), -self)

    def __mul__(self, other):
        return Mul.of(self, as_expr(other))

    def __rmul__(self, other):
        return Mul.of(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Mul.of(Const(-1.0), self)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if n == 0:
            return Const(1.0)
        return Mul(tuple([self] * n))

    def __call__(self, s):
        return evaluate(self, s)


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, eq=False)
class Var(Expr):
    pass


@dataclass(frozen=True, eq=False)
class Add(Expr):
    terms: tuple

    @staticmethod
    def of(*items):
        out = []
        for it in items:
            out.extend(it.terms if isinstance(it, Add) else [it])
        return Add(tuple(out))


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    factors: tuple

    @staticmethod
    def of(*items):
        out = []
        for it in items:
            out.extend(it.factors if isinstance(it, Mul) else [it])
        return Mul(tuple(out))


@dataclass(frozen=True, eq=False)
class Div(Expr):
    num: Expr
    den: Expr

    def __post_init__(self):
        if isinstance(self.den, Const) and self.den.value == 0:
            raise ValueError("literal zero denominator")


@dataclass(frozen=True, eq=False)
class ExpBase(Expr):
    """b**s for a positive real base b (kept as a Fraction when rational)."""
    base: Union[Fraction, float]

    def __post_init__(self):
        b = self.base
        if isinstance(b, int):
            b = Fraction(b)
        if not isinstance(b, Fraction):
            b = float(b)
        if b <= 0:
            raise ValueError("ExpBase needs a positive base")
        object.__setattr__(self, "base", b)

    @property
    def logb(self) -> float:
        b = self.base
        if isinstance(b, Fraction):
            return math.log(b.numerator) - math.log(b.denominator)
        return math.log(b)


s = Var()


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Number):
        return Const(complex(x))
    raise TypeError(f"cannot make an Expr from {type(x).__name__}")


def const(c) -> Const:
    return Const(c)


def power(b, shift=0.0, coeff=1.0) -> Expr:
    """coeff * b**(s + shift) as Mul[Const, ExpBase]."""
    b = ExpBase(b)
    return Mul((Const(coeff * math.exp(shift * b.logb)), b))


def scale_expr(expr: Expr, lam) -> Expr:
    """zeta of the scaled pair: lam**s * zeta."""
    return Mul.of(ExpBase(lam), expr)


# -- evaluation --------------------------------------------------------------

def _ev(e: Expr, z, guard: bool):
    if isinstance(e, Const):
        return e.value + 0 * z
    if isinstance(e, Var):
        return z
    if isinstance(e, ExpBase):
        return np.exp(z * e.logb)
    if isinstance(e, Add):
        acc = 0
        for t in e.terms:
            acc = acc + _ev(t, z, guard)
        return acc
    if isinstance(e, Mul):
        acc = 1
        for f in e.factors:
            acc = acc * _ev(f, z, guard)
        return acc
    if isinstance(e, Div):
        n = _ev(e.num, z, guard)
        d = _ev(e.den, z, guard)
        if guard and np.any(np.abs(d) < POLE_GUARD * (1 + np.abs(n))):
            raise PoleHit("denominator vanishes at the evaluation point")
        return n / d
    raise TypeError(f"unknown node {e!r}")


def evaluate(expr: Expr, z, guard: bool = True):
    """Value of expr at z (scalar or numpy array of complex)."""
    z = np.asarray(z, dtype=complex)
    out = _ev(expr, z, guard)
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out


def absmag(e: Expr, z):
    """Magnitude scale of e at z: sums of |terms|, products of |factors|."""
    if isinstance(e, Const):
        return abs(e.value) + 0 * np.abs(z)
    if isinstance(e, Var):
        return np.abs(z)
    if isinstance(e, ExpBase):
        return np.exp(np.real(z) * e.logb)
    if isinstance(e, Add):
        return sum(absmag(t, z) for t in e.terms)
    if isinstance(e, Mul):
        acc = 1.0
        for f in e.factors:
            acc = acc * absmag(f, z)
        return acc
    if isinstance(e, Div):
        return absmag(e.num, z) / np.maximum(np.abs(_ev(e.den, z, False)), 1e-300)
    raise TypeError(f"unknown node {e!r}")


# -- differentiation ---------------------------------------------------------

def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def deriv(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, ExpBase):
        return Mul((Const(e.logb), e))
    if isinstance(e, Add):
        parts = [d for d in (deriv(t) for t in e.terms) if not _is_zero(d)]
        if not parts:
            return Const(0.0)
        return parts[0] if len(parts) == 1 else Add(tuple(parts))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = deriv(f)
            if _is_zero(df):
                continue
            parts.append(Mul(fs[:i] + (df,) + fs[i + 1:]))
        if not parts:
            return Const(0.0)
        return parts[0] if len(parts) == 1 else Add(tuple(parts))
    if isinstance(e, Div):
        dn, dd = deriv(e.num), deriv(e.den)
        if _is_zero(dd):
            return Const(0.0) if _is_zero(dn) else Div(dn, e.den)
        if _is_zero(dn):
            top = Mul((Const(-1.0), e.num, dd))
        else:
            top = Add((Mul((dn, e.den)), Mul((Const(-1.0), e.num, dd))))
        return Div(top, Mul((e.den, e.den)))
    raise TypeError(f"unknown node {e!r}")


# -- residues and contour analysis ------------------------------------------

def vanishes_at(den: Expr, w, tol=ZERO_TOL) -> bool:
    v = abs(evaluate(den, w, guard=False))
    return v <= tol * max(float(absmag(den, w)), 1e-300)


def has_div(e: Expr) -> bool:
    if isinstance(e, Div):
        return True
    if isinstance(e, Add):
        return any(has_div(t) for t in e.terms)
    if isinstance(e, Mul):
        return any(has_div(f) for f in e.factors)
    return False


def _singular_at(e: Expr, w) -> bool:
    """True if some Div inside e has a denominator vanishing at w."""
    if isinstance(e, Div):
        return vanishes_at(e.den, w) or _singular_at(e.num, w) or _singular_at(e.den, w)
    if isinstance(e, Add):
        return any(_singular_at(t, w) for t in e.terms)
    if isinstance(e, Mul):
        return any(_singular_at(f, w) for f in e.factors)
    return False


def residue_simple(num: Expr, den: Expr, w) -> complex:
    """Residue of num/den at a simple zero w of den: num(w)/den'(w)."""
    w = complex(w)
    if not vanishes_at(den, w):
        raise NotAZero(f"denominator does not vanish at {w}")
    dden = deriv(den)
    dv = evaluate(dden, w, guard=False)
    if abs(dv) <= SIMPLE_TOL * max(float(absmag(dden, w)), 1e-300):
        raise HigherOrder(f"denominator has a multiple zero at {w}")
    return evaluate(num, w, guard=False) / dv


def residue(expr: Expr, w) -> complex:
    """Residue at a simple pole w, summed over the Div terms singular at w.

    Works for sums of c*num/den terms; each term whose denominator vanishes
    at w must have a simple zero there.
    """
    w = complex(w)
    if isinstance(expr, Add):
        return sum(residue(t, w) for t in expr.terms)
    if isinstance(expr, Div):
        if vanishes_at(expr.den, w):
            if not _singular_at(expr.num, w):
                return residue_simple(expr.num, expr.den, w)
        elif has_div(expr.den):
            pass
        elif has_div(expr.num):
            return residue(expr.num, w) / evaluate(expr.den, w, guard=False)
        else:
            return 0j
    if isinstance(expr, Mul):
        divs = [f for f in expr.factors if has_div(f)]
        if len(divs) == 1:
            rest = [f for f in expr.factors if f is not divs[0]]
            c = evaluate(Mul(tuple(rest)), w, guard=False) if rest else 1.0
            return c * residue(divs[0], w)
        if not divs:
            return 0j
    elif not has_div(expr):
        return 0j
    # fall back to the contour
    return laurent_coeffs(expr, ContourSpec(w, 1e-3), -1, -1)[0]


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    nodes: int = 256

    def __post_init__(self):
        if self.radius <= 0 or self.nodes <= 0:
            raise ValueError("radius and node count must be positive")


def default_radius(center, others, cap=0.25) -> float:
    d = [abs(complex(o) - complex(center)) for o in others if abs(complex(o) - complex(center)) > 0]
    return min(cap, 0.5 * min(d)) if d else cap


MAX_NODES = 1 << 16


def _circle(spec: ContourSpec, n: int):
    theta = 2 * np.pi * np.arange(n) / n
    u = spec.radius * np.exp(1j * theta)
    return complex(spec.center) + u, u


def winding_integral(expr: Expr, spec: ContourSpec, dexpr: Expr | None = None) -> complex:
    """(1/2 pi i) * contour integral of expr'/expr, trapezoid with node doubling."""
    dexpr = deriv(expr) if dexpr is None else dexpr
    n = spec.nodes
    prev = None
    while n <= MAX_NODES:
        z, u = _circle(spec, n)
        with np.errstate(divide="ignore", invalid="ignore"):  # checked just below
            f = evaluate(expr, z, guard=False)
            df = evaluate(dexpr, z, guard=False)
        if not np.all(np.isfinite(f)) or np.any(f == 0):
            raise NonIntegerWinding("singularity on the contour")
        val = np.mean(df / f * u)
        if prev is not None and abs(val - prev) <= 1e-10:
            return val
        prev = val
        n *= 2
    return prev


def pole_order(expr: Expr, spec: ContourSpec) -> int:
    """Positive for a pole of that order, negative for a zero, 0 if regular."""
    w = -winding_integral(expr, spec)
    k = round(w.real)
    if abs(w - k) > 0.25:
        raise NonIntegerWinding(f"winding {w} is not close to an integer")
    return int(k)


def stable_order(expr: Expr, center, radius: float, min_radius: float = 1e-6,
                 probe: float = 1e-3) -> int:
    """pole_order on a small circle, halved until two successive radii agree.

    A zero of a sum can sit very close to one of its poles, so the first
    circle is at most `probe` wide no matter how isolated the center is.
    """
    r = min(radius, probe)
    prev = pole_order(expr, ContourSpec(center, r))
    r /= 2
    while r >= min_radius:
        cur = pole_order(expr, ContourSpec(center, r))
        if cur == prev:
            return cur
        prev = cur
        r /= 2
    return prev


def laurent_coeffs(expr: Expr, spec: ContourSpec, k_min: int, k_max: int) -> list:
    """c_k = (1/2 pi i) * integral of expr * (s - center)^(-k-1) ds, k_min..k_max."""
    ks = np.arange(k_min, k_max + 1)
    n = max(spec.nodes, 2 * (k_max - k_min + 1))
    prev = None
    while n <= MAX_NODES:
        z, u = _circle(spec, n)
        f = evaluate(expr, z, guard=False)
        if not np.all(np.isfinite(f)):
            raise NonIntegerWinding("singularity on the contour")
        c = np.array([np.mean(f * u ** (-int(k))) for k in ks])
        if prev is not None and np.all(np.abs(c - prev) <= 1e-10 * (1 + np.abs(c))):
            return [complex(x) for x in c]
        prev = c
        n *= 2
    return [complex(x) for x in prev]


# -- JSON --------------------------------------------------------------------

def to_json(e: Expr):
    if isinstance(e, Const):
        return {"const": [e.value.real, e.value.imag]}
    if isinstance(e, Var):
        return {"var": "s"}
    if isinstance(e, Add):
        return {"add": [to_json(t) for t in e.terms]}
    if isinstance(e, Mul):
        return {"mul": [to_json(f) for f in e.factors]}
    if isinstance(e, Div):
        return {"div": [to_json(e.num), to_json(e.den)]}
    if isinstance(e, ExpBase):
        b = e.base
        return {"expbase": f"{b.numerator}/{b.denominator}" if isinstance(b, Fraction) else repr(b)}
    raise TypeError(f"unknown node {e!r}")


def from_json(obj) -> Expr:
    (tag, val), = obj.items()
    if tag == "const":
        return Const(complex(val[0], val[1]))
    if tag == "var":
        return s
    if tag == "add":
        return Add(tuple(from_json(v) for v in val))
    if tag == "mul":
        return Mul(tuple(from_json(v) for v in val))
    if tag == "div":
        return Div(from_json(val[0]), from_json(val[1]))
    if tag == "expbase":
        return ExpBase(Fraction(val) if "/" in val else float(val))
    raise ValueError(f"unknown tag {tag}")
