"""Roots of Dirichlet polynomials 1 - sum c_j r_j^s and lattice classification.

The rectangle solver (`rect_roots`) is generic: it takes any vectorized
analytic f and f' and is reused by the divisor code in `spray`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import Ambiguous, CountMismatch, IllConditioned, NoRealRoot, NotLattice
from .expr import Add, Const, ExpBase, Expr, Mul

EDGE_NODES = 1024
JUMP = math.pi / 3
SPLIT_FRACTIONS = (0.4913, 0.5437, 0.4521, 0.5819, 0.4139)


@dataclass(frozen=True)
class DirichletPolynomial:
    """f(s) = 1 - sum coeff * ratio**s."""
    terms: tuple  # ((coeff, ratio), ...)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one term")
        for c, r in self.terms:
            if not 0 < float(r) < 1:
                raise ValueError("ratios must lie in (0,1)")

    @classmethod
    def from_ratios(cls, ratios) -> "DirichletPolynomial":
        groups = {}
        for r in ratios:
            groups[r] = groups.get(r, 0) + 1
        return cls(tuple((float(m), r) for r, m in sorted(groups.items(), key=lambda t: -float(t[0]))))

    @property
    def logs(self):
        return np.array([math.log(float(r)) for _, r in self.terms])

    @property
    def coeffs(self):
        return np.array([float(c) for c, _ in self.terms])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for c, lr in zip(self.coeffs, self.logs):
            out = out - c * np.exp(z * lr)
        return out

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c, lr in zip(self.coeffs, self.logs):
            out = out - c * lr * np.exp(z * lr)
        return out

    def to_expr(self) -> Expr:
        return Add((Const(1.0),) + tuple(Mul((Const(-float(c)), ExpBase(r))) for c, r in self.terms))

    def real_min(self) -> float:
        """Left edge of the root strip: no roots with Re s below it."""
        c, lr = self.coeffs, self.logs
        if len(c) == 1:
            return real_dimension(self) - 1e-9
        j = int(np.argmin(lr))  # smallest ratio dominates as Re s -> -inf

        def dominated(sig):
            big = c[j] * math.exp(sig * lr[j])
            rest = 1 + sum(c[i] * math.exp(sig * lr[i]) for i in range(len(c)) if i != j)
            return big > rest

        lo = -1.0
        while not dominated(lo):
            lo *= 2
        hi = real_dimension(self) if self.coeffs.sum() > 1 else 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if dominated(mid):
                lo = mid
            else:
                hi = mid
        return lo


# -- real root ---------------------------------------------------------------

def real_dimension(poly: DirichletPolynomial, method: str = "hybrid") -> float:
    """Unique real root of the Moran equation sum c r^sigma = 1."""
    if poly.coeffs.sum() <= 1:
        raise NoRealRoot("sum of coefficients must exceed 1")

    def f(x):
        return float(poly(x).real)

    def df(x):
        return float(poly.deriv(x).real)

    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
    if method in ("bisection", "hybrid"):
        stop = 1e-3 if method == "hybrid" else 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi) or hi - lo <= stop:
                break
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        if method == "bisection":
            return min((lo, hi), key=lambda x: abs(f(x)))
    elif method != "newton":
        raise ValueError(f"unknown method {method!r}")
    # f is concave and increasing, so Newton from the left is monotone
    x = lo
    for _ in range(100):
        step = f(x) / df(x)
        x_new = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)) or x_new == x:
            x = x_new
            break
        x = x_new
    return x


# -- rectangle root finder ---------------------------------------------------

@dataclass(frozen=True)
class Window:
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def contains(self, z, tol=0.0) -> bool:
        return (self.re_lo - tol <= z.real <= self.re_hi + tol
                and self.im_lo - tol <= z.imag <= self.im_hi + tol)

    def grow(self, d) -> "Window":
        return Window(self.re_lo - d, self.re_hi + d, self.im_lo - d, self.im_hi + d)

    @property
    def corners(self):
        return (complex(self.re_lo, self.im_lo), complex(self.re_hi, self.im_lo),
                complex(self.re_hi, self.im_hi), complex(self.re_lo, self.im_hi))

    @property
    def size(self) -> float:
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def to_json(self):
        return {"re": [self.re_lo, self.re_hi], "im": [self.im_lo, self.im_hi]}


@dataclass
class RootSet:
    window: Window
    roots: list  # [(complex, order)]
    certified_count: int
    meta: dict = field(default_factory=dict)

    @property
    def locations(self):
        return np.array([w for w, _ in self.roots], dtype=complex)

    def to_json(self):
        return {"window": self.window.to_json(),
                "roots": [{"re": w.real, "im": w.imag, "order": m} for w, m in self.roots],
                "certified_count": self.certified_count, **self.meta}


def _segment_phase(f, a, b, n, min_len):
    """Total change of arg f along the segment a -> b, refined where it jumps."""
    t = np.linspace(0.0, 1.0, n + 1)
    z = a + (b - a) * t
    v = f(z)
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        raise IllConditioned("f vanishes on the contour")
    d = np.angle(v[1:] / v[:-1])
    bad = np.nonzero(np.abs(d) > JUMP)[0]
    if bad.size:
        seg = abs(b - a) / n
        if seg < min_len:
            raise IllConditioned("phase jump unresolved at the contour resolution limit")
        for i in bad:
            d[i] = _segment_phase(f, z[i], z[i + 1], 16, min_len)
    return float(np.sum(d))


def winding_count(f, win: Window, n: int = EDGE_NODES, min_len: float = 1e-10) -> int:
    c = win.corners
    total = sum(_segment_phase(f, c[i], c[(i + 1) % 4], n, min_len) for i in range(4))
    w = total / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 0.1:
        raise IllConditioned(f"non-integral winding {w}")
    return int(k)


def _newton(f, df, z, iters=60):
    with np.errstate(all="ignore"):
        for _ in range(iters):
            d = df(z)
            if d == 0 or not np.isfinite(d):
                return None
            step = f(z) / d
            if not np.isfinite(step):
                return None
            z = z - step
            if abs(step) <= 1e-15 * (1 + abs(z)):
                return z
    return z


def _split(win: Window, frac: float):
    if win.re_hi - win.re_lo >= win.im_hi - win.im_lo:
        x = win.re_lo + frac * (win.re_hi - win.re_lo)
        return Window(win.re_lo, x, win.im_lo, win.im_hi), Window(x, win.re_hi, win.im_lo, win.im_hi)
    y = win.im_lo + frac * (win.im_hi - win.im_lo)
    return Window(win.re_lo, win.re_hi, win.im_lo, y), Window(win.re_lo, win.re_hi, y, win.im_hi)


def _solve(f, df, win: Window, count: int, depth: int, n: int, res_tol: float):
    if count == 0:
        return []
    fs = lambda z: complex(f(np.asarray(z)))
    dfs = lambda z: complex(df(np.asarray(z)))
    if count == 1:
        c = complex(0.5 * (win.re_lo + win.re_hi), 0.5 * (win.im_lo + win.im_hi))
        z = _newton(fs, dfs, c)
        if z is not None and win.contains(z, tol=1e-12 * (1 + abs(z))) and abs(fs(z)) <= res_tol:
            return [(z, 1)]
    if win.size < 1e-7 or depth > 200:
        # cluster of coincident roots: modified Newton with the counted order
        c = complex(0.5 * (win.re_lo + win.re_hi), 0.5 * (win.im_lo + win.im_hi))
        z = c
        for _ in range(60):
            d = dfs(z)
            if d == 0:
                break
            step = count * fs(z) / d
            z -= step
            if abs(step) <= 1e-15 * (1 + abs(z)):
                break
        return [(z, count)]
    for frac in SPLIT_FRACTIONS:
        w1, w2 = _split(win, frac)
        try:
            c1 = winding_count(f, w1, n)
            c2 = winding_count(f, w2, n)
        except IllConditioned:
            continue
        if c1 + c2 != count:
            continue
        return (_solve(f, df, w1, c1, depth + 1, n, res_tol)
                + _solve(f, df, w2, c2, depth + 1, n, res_tol))
    raise CountMismatch(f"could not split {win} consistently")


def _canonical(roots):
    return sorted(roots, key=lambda t: (round(t[0].imag, 9), round(t[0].real, 9)))


def rect_roots(f: Callable, df: Callable, window: Window, n: int = EDGE_NODES,
               res_tol: float = 1e-10, perturb: float = 1e-6) -> RootSet:
    """All zeros of an analytic f inside the window, with orders.

    If a zero sits on the boundary the window is pushed outward by `perturb`.
    """
    win = window
    meta = {}
    try:
        count = winding_count(f, win, n)
    except IllConditioned:
        win = window.grow(perturb)
        meta["perturbed"] = perturb
        count = winding_count(f, win, n)
    if count < 0:
        raise CountMismatch("negative count: f has poles in the window")
    roots = _solve(f, df, win, count, 0, max(128, n // 4), res_tol)
    if sum(m for _, m in roots) != count:
        raise CountMismatch("refined roots do not match the certified count")
    for z, _ in roots:
        if abs(complex(f(np.asarray(z)))) > res_tol * 1e3:
            raise CountMismatch(f"root {z} fails the residual check")
    return RootSet(win, _canonical(roots), count, meta)


def default_window(poly: DirichletPolynomial, periods: float = 5.0) -> Window:
    p0 = 2 * math.pi / float(np.min(-poly.logs))
    hi = real_dimension(poly) + 0.1 if poly.coeffs.sum() > 1 else 1.0
    return Window(poly.real_min() - 0.1, hi, -periods * p0, periods * p0)


def find_roots(poly: DirichletPolynomial, window: Optional[Window] = None, **kw) -> RootSet:
    window = default_window(poly) if window is None else window
    return rect_roots(poly, poly.deriv, window, **kw)


def residual_check(poly: DirichletPolynomial, rootset: RootSet) -> float:
    if not rootset.roots:
        return 0.0
    return float(np.max(np.abs(poly(rootset.locations))))


# -- lattice classification --------------------------------------------------

TAU = 1e-9
QMAX = 10**6


@dataclass(frozen=True)
class LatticeClassification:
    kind: str  # "lattice" or "nonlattice"
    r: Optional[float] = None
    p: Optional[float] = None
    exponents: Optional[dict] = None
    generic: Optional[bool] = None
    rank: Optional[int] = None

    @property
    def is_lattice(self) -> bool:
        return self.kind == "lattice"

    def to_json(self):
        d = {"kind": self.kind}
        if self.is_lattice:
            d.update(r=self.r, p=self.p, exponents={str(k): v for k, v in self.exponents.items()})
        else:
            d.update(generic=self.generic, rank=self.rank)
        return d


def _best_rational(y: float):
    """Continued-fraction convergent p/q (q <= QMAX) with the smallest |q y - p|."""
    best = None
    h0, h1, k0, k1 = 0, 1, 1, 0
    x = y
    for _ in range(64):
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > QMAX:
            break
        res = abs(k1 * y - h1)
        if best is None or res < best[2]:
            best = (h1, k1, res)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1 / frac
    return best


def _rational_ratio(y: float):
    """Fraction if y is rational within TAU, None if clearly irrational."""
    p, q, res = _best_rational(y)
    if res <= TAU:
        return Fraction(p, q)
    if res <= 10 * TAU:
        raise Ambiguous(f"log-ratio {y!r} is within {res:.2e} of {p}/{q}")
    return None


def _relation_rank(xs: Sequence[float], cmax: int = 12) -> int:
    """Upper bound on the Z-rank of xs via a bounded integer-relation search."""
    basis = []
    for x in xs:
        dependent = False
        for size in range(1, len(basis) + 1):
            for sub in itertools.combinations(basis, size):
                for cs in itertools.product(range(-cmax, cmax + 1), repeat=size):
                    if not any(cs):
                        continue
                    val = sum(c * b for c, b in zip(cs, sub))
                    for k in range(1, cmax + 1):
                        if abs(k * x - val) <= TAU * max(1.0, abs(k * x)):
                            dependent = True
                            break
                    if dependent:
                        break
                if dependent:
                    break
            if dependent:
                break
        if not dependent:
            basis.append(x)
    return len(basis)


def classify(ratios) -> LatticeClassification:
    distinct = sorted({float(r) for r in ratios}, reverse=True)
    if any(not 0 < r < 1 for r in distinct):
        raise ValueError("ratios must lie in (0,1)")
    xs = [-math.log(r) for r in distinct]
    x1 = xs[0]
    fracs = []
    for x in xs:
        fr = _rational_ratio(x / x1)
        if fr is None:
            rank = _relation_rank(xs) if len(xs) <= 4 else _pairwise_rank(xs)
            return LatticeClassification("nonlattice", generic=(rank == len(xs) and len(xs) >= 2),
                                         rank=rank)
        fracs.append(fr)
    L = math.lcm(*[f.denominator for f in fracs])
    ns = [f.numerator * (L // f.denominator) for f in fracs]
    G = math.gcd(*ns)
    ks = [n // G for n in ns]
    g = sum(k * x for k, x in zip(ks, xs)) / sum(k * k for k in ks)
    exps = {}
    for r in ratios:
        exps[r] = ks[distinct.index(float(r))]
    return LatticeClassification("lattice", r=math.exp(-g), p=2 * math.pi / g, exponents=exps)


def _pairwise_rank(xs):
    classes = []
    for x in xs:
        for c in classes:
            if _rational_ratio(x / c) is not None:
                break
        else:
            classes.append(x)
    return len(classes)


def periodic_extend(rootset: RootSet, p: float, k_range: Sequence[int],
                    classification: Optional[LatticeClassification] = None) -> RootSet:
    """Translate one period's roots by i k p, k in k_range."""
    if classification is not None and not classification.is_lattice:
        raise NotLattice("periodic extension needs a lattice classification")
    if p is None or not p > 0:
        raise NotLattice("period must be positive")
    out = []
    for k in k_range:
        for w, m in rootset.roots:
            z = w + 1j * k * p
            if not any(abs(z - u) <= 1e-9 * (1 + abs(z)) for u, _ in out):
                out.append((z, m))
    ks = list(k_range)
    win = Window(rootset.window.re_lo, rootset.window.re_hi,
                 rootset.window.im_lo + min(ks) * p, rootset.window.im_hi + max(ks) * p)
    return RootSet(win, _canonical(out), sum(m for _, m in out), {"extended": True})
