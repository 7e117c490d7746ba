"""Frequency counting for fractal strings and the Riemann zeta constants it needs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import strings as st
from .errors import BadParameter, PoleHit
from .measure import oscillation_from_profile
from .strings import FractalString, REL_EQ

DEFAULT_M = 50
DEFAULT_K = 6  # Bernoulli corrections B_2 .. B_12


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2, from the standard recurrence."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B[n]


@dataclass(frozen=True)
class ZetaEvaluator:
    M: int = DEFAULT_M
    K: int = DEFAULT_K

    def __call__(self, z) -> complex:
        z = complex(z)
        if abs(z - 1) < 1e-14:
            raise PoleHit("zeta has a pole at s = 1")
        if z.real <= -1:
            raise BadParameter("riemann_zeta needs Re s > -1")
        # keep |s| / (2 pi M) small high up the critical strip
        M = max(self.M, int(math.ceil(abs(z.imag))))
        n = np.arange(1, M, dtype=float)
        head = complex(np.sum(np.exp(-z * np.log(n))))
        Mz = complex(np.exp(-z * math.log(M)))
        total = head + M * Mz / (z - 1) + Mz / 2
        rising = z  # s (s+1) ... (s+2k-2)
        powM = Mz / M  # M**(-s-1)
        for k in range(1, self.K + 1):
            total += float(bernoulli(2 * k)) / math.factorial(2 * k) * rising * powM
            rising *= (z + 2 * k - 1) * (z + 2 * k)
            powM /= M * M
        return total

    def self_check(self, z) -> float:
        return abs(self(z) - ZetaEvaluator(2 * self.M, self.K + 2)(z))


def riemann_zeta(z, M: int = DEFAULT_M, K: int = DEFAULT_K) -> complex:
    """Euler-Maclaurin evaluation of the Riemann zeta function for Re s > -1."""
    return ZetaEvaluator(M, K)(z)


def weyl_term(string: FractalString, x: float) -> float:
    if x < 0:
        raise BadParameter("x must be nonnegative")
    return string.total_length * x


@dataclass
class SpectralCounter:
    string: FractalString
    cache: dict = field(default_factory=dict)

    def __call__(self, x: float) -> int:
        if x not in self.cache:
            self.cache[x] = frequency_count(self.string, x)
        return self.cache[x]


def frequency_count(string: FractalString, x: float) -> int:
    """N_nu(x) = sum_j floor(x l_j); only lengths with x l_j >= 1 contribute."""
    if x <= 0:
        return 0
    ls, ms = string.lengths_above((1.0 / x) * (1 - REL_EQ))
    if not len(ls):
        return 0
    fl = np.floor(x * np.asarray(ls, float) * (1 + REL_EQ)).astype(np.int64)
    return int(np.sum(fl * np.asarray(ms, dtype=np.int64)))


def frequency_count_dual(string: FractalString, x: float) -> int:
    """The same count as sum_n N_L(x/n), grouping by frequency index n."""
    if x <= 0:
        return 0
    first = next(iter(string.lengths()))[0]
    nmax = int(math.floor(x * first * (1 + REL_EQ)))
    return int(sum(st.counting(string, x / n) for n in range(1, nmax + 1)))


def c_D(D: float) -> float:
    return (1 - D) * 2 ** (-(1 - D)) * -riemann_zeta(D).real


def _astring_content(a: float) -> float:
    D = 1 / (a + 1)
    return 2 ** (1 - D) * a ** D / (1 - D)


@dataclass
class SecondTerm:
    D: float
    rows: list  # (x, N_nu, W, ratio, pre_asymptotic)
    target: Optional[float]
    converged: bool
    oscillation: Optional[object] = None

    def to_json(self):
        return {"D": self.D, "target": self.target, "converged": self.converged,
                "rows": [{"x": x, "N_nu": n, "W": w, "ratio": r, "pre_asymptotic": p}
                         for x, n, w, r, p in self.rows],
                "oscillation": self.oscillation.to_json() if self.oscillation else None}


def second_term_check(string: FractalString, xs: Sequence[float], D: Optional[float] = None,
                      content: Optional[float] = None, tol: float = 0.05) -> SecondTerm:
    """(W(x) - N_nu(x))/x**D on a grid, with the target c_D * M when it is known.

    Convergence means the last three decades present in the grid agree
    within tol (relative).
    """
    if string.kind == "a_string":
        a = string.params["a"]
        D = 1 / (a + 1) if D is None else D
        content = _astring_content(a) if content is None else content
    elif string.kind in ("cantor", "generalized_cantor") and D is None:
        a = float(string.params["a"])
        D = math.log(2) / math.log(1 / a)
    if D is None:
        raise BadParameter("D must be given for this string")
    first = next(iter(string.lengths()))[0]
    rows = []
    for x in xs:
        n = frequency_count(string, x)
        w = weyl_term(string, x)
        rows.append((float(x), n, w, (w - n) / x ** D, bool(x < 1 / first)))
    target = c_D(D) * content if content is not None else None
    by_decade = {}
    for x, _, _, r, pre in rows:
        if not pre:
            by_decade[math.floor(math.log10(x) + 1e-9)] = r
    last = [by_decade[k] for k in sorted(by_decade)[-3:]]
    converged = len(last) == 3 and (max(last) - min(last)) <= tol * abs(np.mean(last))
    osc = None
    if len(rows) >= 16:
        u = np.log([r[0] for r in rows])
        if np.allclose(np.diff(u), u[1] - u[0], rtol=1e-6):
            osc = oscillation_from_profile(u, np.array([r[3] for r in rows]))
    return SecondTerm(D, rows, target, bool(converged), osc)


def cantor_spectral_terms(x: float, K: int) -> float:
    """x + (1/(2 log 3)) sum_{|k|<=K} zeta(w_k) x**w_k / w_k with w_k = D + i k p."""
    if not x > 1:
        raise BadParameter("x must exceed 1")
    D = math.log(2) / math.log(3)
    p = 2 * math.pi / math.log(3)
    total = riemann_zeta(D).real * x ** D / D
    for k in range(1, K + 1):
        w = complex(D, k * p)
        total += 2 * (riemann_zeta(w) * np.exp(w * math.log(x)) / w).real
    return x + total / (2 * math.log(3))


def cantor_explicit_band(xs: Sequence[float], K: int):
    """(explicit - exact) over a grid; its spread is the O(1) band."""
    cs = st.make_string("cantor")
    diff = np.array([cantor_spectral_terms(x, K) - frequency_count(cs, x) for x in xs])
    return diff


def lapma_demo(D: float = 0.5, tau_zero: float = 14.134725, tau_other: float = 10.0,
               beta: float = 0.01, xs: Optional[Sequence[float]] = None) -> dict:
    """Spectral oscillation sizes for lapma strings built at a zeta zero and away from one.

    The constants in front of the x**omega terms are not known, so this
    only reports the measured amplitudes of (W - N_nu)/x**D side by side.
    """
    if xs is None:
        xs = np.exp(np.linspace(math.log(1e5), math.log(1e7), 400))
    out = {}
    for label, tau in (("zero", tau_zero), ("nonzero", tau_other)):
        s_ = st.make_string("lapma", D=D, tau=tau, beta=beta)
        g = np.array([(weyl_term(s_, x) - frequency_count(s_, x)) / x ** D for x in xs])
        osc = oscillation_from_profile(np.log(xs), g)
        out[label] = {"tau": tau, "zeta_at_omega": abs(riemann_zeta(complex(D, tau))),
                      "amplitude": osc.amplitude, "mean": osc.mean}
    return out
