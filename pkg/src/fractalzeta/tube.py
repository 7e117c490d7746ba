"""Fractal tube formulas synthesized from poles and residues.

A pole w of order n contributes res(eps**(N-s) h(s), w) with h = zeta/(N-s)
for distance zetas and h = zeta for tube zetas. Writing
lam = log(1/eps), that residue is

    eps**(N-w) * sum_{a<n} lam**a / a! * h_{-1-a},

where h_k are the Laurent coefficients of h at w. Each (w, a, c) triple
is stored as one term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import InsufficientWindow, NotAPole, OutOfValidity
from .expr import Div, Expr, Mul, s
from .moran import Window
from .spray import CatalogEntry, Divisor, _same

DEFAULT_K = 200
PRINCIPAL_TOL = 1e-8


@dataclass
class TubeSeries:
    N: int
    terms: list  # [(omega, m, c)] -> c * eps**(N-omega) * log(1/eps)**m
    form: str
    K: Optional[int] = None
    eps_max: Optional[float] = None
    tail_coeff: list = field(default_factory=list)  # [(re, C)] with |c_k| <= C/k**2
    label: str = "truncated, heuristic error"

    def to_json(self):
        return {"N": self.N, "form": self.form, "K": self.K, "eps_max": self.eps_max,
                "label": self.label,
                "terms": [{"re": w.real, "im": w.imag, "log_power": m, "c": [c.real, c.imag]}
                          for w, m, c in self.terms]}


def _h(zeta: Expr, N: int, form: str) -> Expr:
    if form == "tube":
        return zeta
    return Div(zeta, ex.as_expr(float(N)) - s)


def _pole_terms(zeta: Expr, w: complex, n: int, N: int, form: str, others) -> list:
    """Terms for a pole of order n at w."""
    if n == 1:
        r = ex.residue(zeta, w)
        if abs(r) <= 1e-12:
            # a vanishing residue may be a cancelled pole; confirm by winding
            rad = ex.default_radius(w, others, cap=0.1)
            if ex.stable_order(zeta, w, rad) == 0:
                raise NotAPole(f"{w} is a removable point of the given zeta")
        c = r if form == "tube" else r / (N - w)
        return [(w, 0, c)]
    rad = ex.default_radius(w, others, cap=0.1)
    cs = ex.laurent_coeffs(zeta, ex.ContourSpec(w, rad), -n, -1)  # c_{-n}..c_{-1}
    lc = {k: v for k, v in zip(range(-n, 0), cs)}
    out = []
    for a in range(n):
        if form == "tube":
            hk = lc[-1 - a]
        else:
            # 1/(N-s) = sum_b (s-w)**b / (N-w)**(b+1)
            hk = sum(lc[-1 - a - b] / (N - w) ** (b + 1) for b in range(n - a))
        out.append((w, a, hk / math.factorial(a)))
    return out


def _fit_envelope(terms, N):
    """Per real part, C with |c_k| k**2 <= C over the outer half of the kept k."""
    lines = {}
    for w, m, c in terms:
        if abs(w.imag) > 0 and m == 0:
            lines.setdefault(round(w.real, 9), []).append((abs(w.imag), abs(c)))
    env = []
    for re, vals in lines.items():
        vals.sort()
        top = vals[-1][0]
        outer = [(y, a) for y, a in vals if y >= top / 2]
        if not outer:
            continue
        # express in units of the smallest spacing so k is an integer index
        p = vals[0][0]
        C = max(a * (y / p) ** 2 for y, a in outer)
        env.append((re, C, top / p))
    return env


def series_from_divisor(zeta: Expr, divisor: Divisor, N: int, form: str = "distance",
                        eps_max: Optional[float] = None, K: Optional[int] = None) -> TubeSeries:
    """Tube series from the poles listed in the divisor.

    form: "distance" (zeta is a distance zeta), "tube" (tube zeta) or
    "string" (zeta is a geometric zeta; it is first turned into the
    distance zeta 2**(1-s) zeta / s with N = 1 and a pole added at 0).
    """
    if form == "string":
        zeta = Div(Mul((ex.Const(2.0), ex.ExpBase(0.5), zeta)), s)
        m0 = divisor.order_at(0.0)
        divisor = Divisor(tuple(e for e in divisor.entries if not _same(e[0], 0j)) + ((0j, m0 - 1),),
                          divisor.window)
        N, form = 1, "distance"
    poles = divisor.poles()
    pts = poles.points
    terms = []
    for i, (w, m) in enumerate(poles.entries):
        if form == "distance" and _same(w, complex(N)):
            raise NotAPole("a pole at s = N is outside the distance tube formula")
        near = pts[max(0, i - 4): i + 5]
        try:
            terms.extend(_pole_terms(zeta, w, -m, N, form, [o for o in near if o is not w]))
        except ex.NotAZero as exc:
            raise NotAPole(f"{w} is not a pole of the given zeta") from exc
    return TubeSeries(N, terms, form, K=K, eps_max=eps_max, tail_coeff=_fit_envelope(terms, N))


def catalog_series(entry: CatalogEntry, K: int = DEFAULT_K) -> TubeSeries:
    """Series for a catalog entry with K conjugate pairs per vertical line."""
    if entry.zeta is None:
        raise NotAPole(f"{entry.name} has no closed form to take residues of")
    p = entry.period or 1.0
    lo = min([complex(w).real for w, _ in entry.points] + [ln.re for ln in entry.lines] + [0.0]) - 0.5
    win = Window(lo, float(entry.N), -(K + 0.5) * p, (K + 0.5) * p)
    ser = series_from_divisor(entry.zeta, entry.divisor(win), entry.N, entry.form,
                              eps_max=entry.eps_max, K=K)
    return ser


def _check_eps(series: TubeSeries, eps: float):
    if not eps > 0:
        raise OutOfValidity("eps must be positive")
    if series.eps_max is not None and eps > series.eps_max * (1 + 1e-12):
        raise OutOfValidity(f"eps={eps} exceeds the validity bound {series.eps_max}")


def _term_values(series: TubeSeries, eps: float, paired: bool):
    lam = math.log(1.0 / eps)
    out = []
    conj_present = {(round(w.real, 9), round(w.imag, 9), m) for w, m, _ in series.terms}
    for w, m, c in series.terms:
        v = c * np.exp((series.N - w) * math.log(eps)) * lam ** m
        if not paired:
            out.append(v)
        elif w.imag > 0 and (round(w.real, 9), round(-w.imag, 9), m) in conj_present:
            out.append(2 * v.real)
        elif w.imag < 0 and (round(w.real, 9), round(-w.imag, 9), m) in conj_present:
            continue
        else:
            out.append(v.real)
    return out


def eval_series(series: TubeSeries, eps: float):
    """(value, tail bound) at eps; conjugate pairs are combined as 2 Re."""
    _check_eps(series, eps)
    vals = _term_values(series, eps, paired=True)
    value = float(math.fsum(vals))
    tail = 0.0
    for re, C, kmax in series.tail_coeff:
        tail += 2 * C / kmax * eps ** (series.N - re)
    return value, tail


def eval_series_complex(series: TubeSeries, eps: float) -> complex:
    """Unpaired complex sum; its imaginary part measures conjugate symmetry."""
    _check_eps(series, eps)
    vals = _term_values(series, eps, paired=False)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


# -- measurability and fractality -------------------------------------------

@dataclass
class Verdict:
    D: float
    measurable: str  # yes | no | degenerate
    gauge: Optional[int] = None  # log power of the gauge when degenerate
    content: Optional[float] = None
    average_content: Optional[float] = None
    h_content: Optional[float] = None
    fractal_dims: tuple = ()
    critical: bool = False

    @property
    def fractal(self) -> bool:
        return bool(self.fractal_dims)

    @property
    def subcritical(self) -> bool:
        return self.fractal and not self.critical

    def to_json(self):
        return {"D": self.D, "measurable": self.measurable, "gauge": self.gauge,
                "content": self.content, "average_content": self.average_content,
                "h_content": self.h_content, "fractal_dims": list(self.fractal_dims),
                "fractal": self.fractal, "critical": self.critical,
                "subcritical": self.subcritical}


def fractality(divisor: Divisor, D: float) -> tuple:
    """(real parts carrying nonreal poles, whether D is among them)."""
    dims = sorted({round(w.real, 12) for w, m in divisor.poles() if abs(w.imag) > PRINCIPAL_TOL})
    return tuple(dims), any(abs(d - D) < PRINCIPAL_TOL for d in dims)


def measurability(divisor: Divisor, D: float, zeta: Optional[Expr] = None, N: Optional[int] = None,
                  form: str = "distance", residue_at_D: Optional[complex] = None) -> Verdict:
    """Minkowski measurability from the principal poles.

    Content values need either the closed form (zeta with N) or the
    residue at D supplied directly.
    """
    win = divisor.window
    principal = [(w, -m) for w, m in divisor.poles() if abs(w.real - D) < PRINCIPAL_TOL]
    nonreal = [w for w, _ in principal if abs(w.imag) > PRINCIPAL_TOL]
    if win is not None:
        if not win.re_lo - 1e-9 <= D <= win.re_hi + 1e-9:
            raise InsufficientWindow("window does not reach the line Re s = D")
        span = min(win.im_hi, -win.im_lo)
        if nonreal:
            p = min(abs(w.imag) for w in nonreal)
            if span < 3 * p:
                raise InsufficientWindow("window covers fewer than 3 periods of the principal line")
        elif span < 10:
            raise InsufficientWindow("window too short to certify a pole-free principal line")
    order = next((n for w, n in principal if abs(w.imag) <= PRINCIPAL_TOL), 0)
    if order == 0:
        raise NotAPole(f"D = {D} is not a pole")
    dims, crit = fractality(divisor, D)
    v = Verdict(D, "yes", fractal_dims=dims, critical=crit)
    scale = 1.0 if form == "tube" else 1.0 / (N - D) if N is not None else None
    if order >= 2:
        v.measurable, v.gauge = "degenerate", order - 1
        if zeta is not None and scale is not None:
            others = [w for w, _ in divisor.poles() if not _same(w, complex(D))]
            rad = ex.default_radius(D, others, cap=0.1)
            top = ex.laurent_coeffs(zeta, ex.ContourSpec(D, rad), -order, -order)[0]
            v.h_content = float((top * scale / math.factorial(order - 1)).real)
        return v
    res = residue_at_D
    if res is None and zeta is not None:
        res = ex.residue(zeta, D)
    val = None if res is None or scale is None else float((res * scale).real)
    if nonreal:
        v.measurable, v.average_content = "no", val
    else:
        v.content = val
    return v


def classify_entry(entry: CatalogEntry, window: Optional[Window] = None) -> Verdict:
    d = entry.divisor(window or entry.default_window())
    return measurability(d, entry.D, entry.zeta, entry.N, entry.form)
